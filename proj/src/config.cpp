#include "wickspde/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "wickspde/util.hpp"
#include "wickspde/wick.hpp"

namespace wickspde {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

[[noreturn]] void fail(const std::string& msg) {
  throw std::invalid_argument("config error: " + msg);
}

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& key, const std::string& v) {
  if (v == "inf") return kInf;
  if (v == "-inf") return -kInf;
  std::size_t pos = 0;
  double x = 0.0;
  try {
    x = std::stod(v, &pos);
  } catch (const std::exception&) {
    fail("key '" + key + "' needs a numeric value, got '" + v + "'");
  }
  if (pos != v.size()) fail("key '" + key + "' has trailing junk in value '" + v + "'");
  if (std::isnan(x)) fail("key '" + key + "' must not be NaN");
  return x;
}

long long parse_int(const std::string& key, const std::string& v) {
  std::size_t pos = 0;
  long long x = 0;
  try {
    x = std::stoll(v, &pos);
  } catch (const std::exception&) {
    fail("key '" + key + "' needs an integer value, got '" + v + "'");
  }
  if (pos != v.size()) fail("key '" + key + "' has trailing junk in value '" + v + "'");
  return x;
}

std::uint64_t parse_u64(const std::string& key, const std::string& v) {
  if (!v.empty() && v[0] == '-') fail("key '" + key + "' must be nonnegative, got '" + v + "'");
  std::size_t pos = 0;
  std::uint64_t x = 0;
  try {
    x = std::stoull(v, &pos);
  } catch (const std::exception&) {
    fail("key '" + key + "' needs an unsigned integer value, got '" + v + "'");
  }
  if (pos != v.size()) fail("key '" + key + "' has trailing junk in value '" + v + "'");
  return x;
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true") return true;
  if (v == "false") return false;
  fail("key '" + key + "' needs 'true' or 'false', got '" + v + "'");
}

std::vector<std::string> split_ws(const std::string& v) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : v) {
    if (c == ' ' || c == '\t' || c == ',') {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

std::vector<int> parse_int_list(const std::string& key, const std::string& v) {
  std::vector<int> out;
  for (const std::string& tok : split_ws(v))
    out.push_back(static_cast<int>(parse_int(key, tok)));
  if (out.empty()) fail("key '" + key + "' needs at least one integer");
  return out;
}

std::array<double, 2> parse_pair(const std::string& key, const std::string& v) {
  std::vector<std::string> toks = split_ws(v);
  if (toks.size() != 2) fail("key '" + key + "' needs exactly two coordinates");
  return {parse_double(key, toks[0]), parse_double(key, toks[1])};
}

JumpLaw law_from_name(const std::string& v) {
  if (v == "fixed") return JumpLaw::fixed;
  if (v == "exponential") return JumpLaw::exponential;
  if (v == "uniform") return JumpLaw::uniform;
  fail("jump_law must be fixed, exponential, or uniform, got '" + v + "'");
}

std::string law_name(JumpLaw law) {
  switch (law) {
    case JumpLaw::fixed: return "fixed";
    case JumpLaw::exponential: return "exponential";
    case JumpLaw::uniform: return "uniform";
  }
  return "fixed";
}

std::string fmt_num(double x) {
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  return fmt17(x);
}

void apply_key(ExperimentConfig& c, const std::string& section, const std::string& key,
               const std::string& v) {
  const std::string full = section.empty() ? key : section + "." + key;
  if (section.empty()) {
    if (key == "command") {
      try {
        c.command = command_from_name(v);
      } catch (const std::invalid_argument& e) {
        fail(e.what());
      }
      return;
    }
  } else if (section == "subordinator") {
    if (key == "kind") {
      try {
        c.spec.kind = kind_from_name(v);
      } catch (const std::invalid_argument& e) {
        fail(e.what());
      }
      return;
    }
    if (key == "drift") { c.spec.drift = parse_double(full, v); return; }
    if (key == "rate") { c.spec.rate = parse_double(full, v); return; }
    if (key == "jump_law") { c.spec.jump_law = law_from_name(v); return; }
    if (key == "jump_a") { c.spec.jump_a = parse_double(full, v); return; }
    if (key == "jump_b") { c.spec.jump_b = parse_double(full, v); return; }
    if (key == "gamma_shape") { c.spec.gamma_shape = parse_double(full, v); return; }
    if (key == "gamma_rate") { c.spec.gamma_rate = parse_double(full, v); return; }
    if (key == "stable_c") { c.spec.stable_c = parse_double(full, v); return; }
    if (key == "stable_alpha") { c.spec.stable_alpha = parse_double(full, v); return; }
    if (key == "stable_theta") { c.spec.stable_theta = parse_double(full, v); return; }
    if (key == "truncation") { c.spec.truncation = parse_double(full, v); return; }
  } else if (section == "field") {
    if (key == "kind") {
      try {
        c.kind = convolution_kind_from_name(v);
      } catch (const std::invalid_argument& e) {
        fail(e.what());
      }
      return;
    }
    if (key == "order") { c.order = static_cast<int>(parse_int(full, v)); return; }
    if (key == "cutoff") { c.cutoff = static_cast<int>(parse_int(full, v)); return; }
    if (key == "cutoffs") { c.cutoffs = parse_int_list(full, v); return; }
  } else if (section == "time") {
    if (key == "horizon") { c.horizon = parse_double(full, v); return; }
    if (key == "cells") { c.time_cells = static_cast<int>(parse_int(full, v)); return; }
    if (key == "t_past") { c.t_past = parse_double(full, v); return; }
  } else if (section == "norm") {
    if (key == "alpha") { c.alpha = parse_double(full, v); return; }
    if (key == "p") { c.p = parse_double(full, v); return; }
    if (key == "q") { c.q = parse_double(full, v); return; }
    if (key == "sup_time") { c.sup_time = parse_bool(full, v); return; }
    if (key == "gamma") { c.gamma = parse_double(full, v); return; }
    if (key == "epsilon") { c.epsilon = parse_double(full, v); return; }
    if (key == "delta") { c.delta = parse_double(full, v); return; }
  } else if (section == "run") {
    if (key == "ensemble") {
      c.ensemble = static_cast<std::size_t>(parse_u64(full, v));
      return;
    }
    if (key == "seed") { c.seed = parse_u64(full, v); return; }
    if (key == "workers") { c.workers = static_cast<int>(parse_int(full, v)); return; }
    if (key == "out") { c.out_dir = v; return; }
  } else if (section == "solver") {
    if (key == "sign") { c.sign = parse_double(full, v); return; }
    if (key == "dt") { c.dt = parse_double(full, v); return; }
    if (key == "cutoff") { c.solver_cutoff = static_cast<int>(parse_int(full, v)); return; }
    if (key == "blowup_radius") { c.blowup_radius = parse_double(full, v); return; }
    if (key == "picard_tol") { c.picard_tol = parse_double(full, v); return; }
    if (key == "picard_max") { c.picard_max = static_cast<int>(parse_int(full, v)); return; }
    if (key == "max_halvings") {
      c.max_halvings = static_cast<int>(parse_int(full, v));
      return;
    }
    if (key == "nonlinear") { c.nonlinear = parse_bool(full, v); return; }
    if (key == "residual_tol") { c.residual_tol = parse_double(full, v); return; }
    if (key == "emit_fields") { c.emit_fields = parse_bool(full, v); return; }
  } else if (section == "points") {
    if (key == "order_m") { c.order_m = static_cast<int>(parse_int(full, v)); return; }
    if (key == "s") { c.time_s = parse_double(full, v); return; }
    if (key == "t") { c.time_t = parse_double(full, v); return; }
    if (key == "x") { c.point_x = parse_pair(full, v); return; }
    if (key == "y") { c.point_y = parse_pair(full, v); return; }
  }
  fail("unknown key '" + full + "'");
}

void require(bool ok, const std::string& msg) {
  if (!ok) fail(msg);
}

void validate_solver_block(const ExperimentConfig& c) {
  require(c.sign == 1.0 || c.sign == -1.0,
          "solver.sign must be +1 or -1 (got " + fmt_num(c.sign) + ")");
  require(c.dt > 0, "solver.dt > 0 violated (dt = " + fmt_num(c.dt) + ")");
  require(c.blowup_radius > 0, "solver.blowup_radius > 0 violated");
  require(c.picard_tol > 0, "solver.picard_tol > 0 violated");
  require(c.picard_max >= 1, "solver.picard_max >= 1 violated");
  require(c.max_halvings >= 0, "solver.max_halvings >= 0 violated");
  require(c.residual_tol > 0, "solver.residual_tol > 0 violated");
  int m = c.resolved_solver_cutoff();
  require(m >= c.order * c.cutoff,
          "solver.cutoff >= order * field.cutoff violated (M = " + std::to_string(m) +
              ", k*N = " + std::to_string(c.order * c.cutoff) + ")");
}

void validate(const ExperimentConfig& c) {
  try {
    c.spec.validate();
  } catch (const std::invalid_argument& e) {
    fail(e.what());
  }
  require(c.cutoff >= 1, "field.cutoff >= 1 violated (cutoff = " + std::to_string(c.cutoff) + ")");
  for (std::size_t i = 0; i < c.cutoffs.size(); ++i) {
    require(c.cutoffs[i] >= 1, "field.cutoffs entries must be >= 1");
    if (i) require(c.cutoffs[i] > c.cutoffs[i - 1], "field.cutoffs must be strictly increasing");
  }
  require(c.horizon > 0, "time.horizon > 0 violated (horizon = " + fmt_num(c.horizon) + ")");
  require(c.time_cells >= 1, "time.cells >= 1 violated");
  require(c.t_past > 0, "time.t_past > 0 violated (t_past = " + fmt_num(c.t_past) + ")");
  require(c.p >= 1.0, "norm.p >= 1 violated (p = " + fmt_num(c.p) + ")");
  require(c.q >= 1.0, "norm.q >= 1 violated (q = " + fmt_num(c.q) + ")");
  require(c.gamma > 0, "norm.gamma > 0 violated (gamma = " + fmt_num(c.gamma) + ")");
  require(c.workers >= 1, "run.workers >= 1 violated");
  require(!c.out_dir.empty(), "run.out must not be empty");
  require(c.order >= 0, "field.order >= 0 violated");
  require(c.order_m >= 0, "points.order_m >= 0 violated");

  switch (c.command) {
    case Command::isometry:
      require(c.ensemble >= 100, "run.ensemble >= 100 violated for command isometry (ensemble = " +
                                     std::to_string(c.ensemble) + ")");
      break;
    case Command::covariance: {
      require(c.kind == ConvolutionKind::heat || c.kind == ConvolutionKind::wave,
              "command covariance requires field.kind heat or wave (got " +
                  convolution_kind_name(c.kind) + ")");
      require(c.order >= 1, "field.order >= 1 violated for command covariance");
      require(c.resolved_order_m() >= 1, "points.order_m >= 1 violated for command covariance");
      require(c.ensemble >= 100, "run.ensemble >= 100 violated for command covariance (ensemble = " +
                                     std::to_string(c.ensemble) + ")");
      require(c.time_s >= 0 && c.time_s <= c.horizon && c.time_t >= 0 && c.time_t <= c.horizon,
              "probe times points.s and points.t must lie in [0, horizon]");
      break;
    }
    case Command::wick_convergence: {
      require(c.kind == ConvolutionKind::heat || c.kind == ConvolutionKind::wave,
              "command wick-convergence requires field.kind heat or wave (got " +
                  convolution_kind_name(c.kind) + ")");
      require(c.order >= 1, "field.order >= 1 violated for command wick-convergence");
      require(c.resolved_cutoffs().size() >= 2,
              "command wick-convergence needs at least two entries in field.cutoffs");
      require(c.ensemble >= 2, "run.ensemble >= 2 violated for command wick-convergence");
      StudyConfig sc;
      sc.kind = c.kind;
      sc.order = c.order;
      sc.cutoffs = c.resolved_cutoffs();
      sc.norm = {c.alpha, c.p, c.q, c.sup_time, c.gamma, c.epsilon};
      sc.horizon = c.horizon;
      sc.time_cells = c.time_cells;
      sc.ensemble = c.ensemble;
      sc.seed = c.seed;
      sc.workers = c.workers;
      sc.spec = c.spec;
      check_study_constraints(sc);  // throws naming the violated inequality
      break;
    }
    case Command::renorm_divergence:
      require(c.spec.kind == LevyKind::deterministic_linear && c.spec.drift == 1.0,
              "command renorm-divergence requires L(t) = t "
              "(subordinator.kind = deterministic-linear, drift = 1)");
      break;
    case Command::jump_continuity:
      require(c.spec.kind == LevyKind::poisson || c.spec.kind == LevyKind::compound_poisson,
              "command jump-continuity requires a finite-activity jump subordinator "
              "(subordinator.kind poisson or compound-poisson)");
      require(c.spec.rate > 0, "subordinator.rate > 0 violated for command jump-continuity");
      break;
    case Command::solve_heat:
      require(c.kind == ConvolutionKind::heat,
              "command solve-heat requires field.kind = heat (got " +
                  convolution_kind_name(c.kind) + ")");
      require(c.order == 2,
              "field.order = " + std::to_string(c.order) +
                  " with command solve-heat violates the k = 2 restriction: the quadratic "
                  "equation is the only renormalized heat case treated (powers k >= 3 of the "
                  "heat field are not time-integrable)");
      require(c.delta > 0, "norm.delta > 0 violated for the heat blow-up gate");
      validate_solver_block(c);
      break;
    case Command::solve_wave:
      require(c.kind == ConvolutionKind::wave,
              "command solve-wave requires field.kind = wave (got " +
                  convolution_kind_name(c.kind) + ")");
      require(c.order >= 2, "field.order >= 2 violated for command solve-wave (order = " +
                                std::to_string(c.order) + ")");
      require(c.epsilon > 0 && c.epsilon < 1,
              "0 < norm.epsilon < 1 violated for the wave energy norms (epsilon = " +
                  fmt_num(c.epsilon) + ")");
      validate_solver_block(c);
      break;
    case Command::stationary_check:
      require(is_stationary_kind(c.kind),
              "command stationary-check requires field.kind heat-stationary or "
              "damped-wave-stationary (got " +
                  convolution_kind_name(c.kind) + ")");
      require(c.ensemble >= 100,
              "run.ensemble >= 100 violated for command stationary-check (ensemble = " +
                  std::to_string(c.ensemble) + ")");
      require(c.time_s >= 0 && c.time_s < c.time_t && c.time_t <= c.horizon,
              "probe times 0 <= points.s < points.t <= horizon violated");
      break;
  }
}

}  // namespace

std::string command_name(Command cmd) {
  switch (cmd) {
    case Command::isometry: return "isometry";
    case Command::covariance: return "covariance";
    case Command::wick_convergence: return "wick-convergence";
    case Command::renorm_divergence: return "renorm-divergence";
    case Command::jump_continuity: return "jump-continuity";
    case Command::solve_heat: return "solve-heat";
    case Command::solve_wave: return "solve-wave";
    case Command::stationary_check: return "stationary-check";
  }
  throw std::logic_error("unknown command");
}

Command command_from_name(const std::string& name) {
  if (name == "isometry") return Command::isometry;
  if (name == "covariance") return Command::covariance;
  if (name == "wick-convergence") return Command::wick_convergence;
  if (name == "renorm-divergence") return Command::renorm_divergence;
  if (name == "jump-continuity") return Command::jump_continuity;
  if (name == "solve-heat") return Command::solve_heat;
  if (name == "solve-wave") return Command::solve_wave;
  if (name == "stationary-check") return Command::stationary_check;
  throw std::invalid_argument(
      "unknown command '" + name +
      "' (expected isometry, covariance, wick-convergence, renorm-divergence, "
      "jump-continuity, solve-heat, solve-wave, or stationary-check)");
}

std::vector<int> ExperimentConfig::resolved_cutoffs() const {
  return cutoffs.empty() ? std::vector<int>{cutoff} : cutoffs;
}

int ExperimentConfig::resolved_solver_cutoff() const {
  return solver_cutoff > 0 ? solver_cutoff : order * cutoff;
}

int ExperimentConfig::resolved_order_m() const { return order_m > 0 ? order_m : order; }

ExperimentConfig parse_config(const std::string& text) {
  ExperimentConfig cfg;
  static const std::set<std::string> kSections = {"subordinator", "field", "time", "norm",
                                                  "run", "solver", "points"};
  std::set<std::string> seen;
  std::string section;
  std::istringstream is(text);
  std::string raw;
  int lineno = 0;
  while (std::getline(is, raw)) {
    ++lineno;
    std::string line = raw;
    std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        fail("malformed section header at line " + std::to_string(lineno) + ": '" + line + "'");
      section = trim(line.substr(1, line.size() - 2));
      if (!kSections.count(section)) fail("unknown section [" + section + "]");
      continue;
    }
    std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      fail("line " + std::to_string(lineno) + " is not of the form 'key = value': '" + line + "'");
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key.empty()) fail("empty key at line " + std::to_string(lineno));
    if (value.empty()) fail("key '" + key + "' has an empty value");
    std::string full = section.empty() ? key : section + "." + key;
    if (!seen.insert(full).second) fail("duplicate key '" + full + "'");
    apply_key(cfg, section, key, value);
  }
  validate(cfg);
  return cfg;
}

ExperimentConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail("cannot open config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string emit_config(const ExperimentConfig& c) {
  std::ostringstream os;
  os << "command = " << command_name(c.command) << "\n";
  os << "\n[subordinator]\n";
  os << "kind = " << kind_name(c.spec.kind) << "\n";
  os << "drift = " << fmt_num(c.spec.drift) << "\n";
  os << "rate = " << fmt_num(c.spec.rate) << "\n";
  os << "jump_law = " << law_name(c.spec.jump_law) << "\n";
  os << "jump_a = " << fmt_num(c.spec.jump_a) << "\n";
  os << "jump_b = " << fmt_num(c.spec.jump_b) << "\n";
  os << "gamma_shape = " << fmt_num(c.spec.gamma_shape) << "\n";
  os << "gamma_rate = " << fmt_num(c.spec.gamma_rate) << "\n";
  os << "stable_c = " << fmt_num(c.spec.stable_c) << "\n";
  os << "stable_alpha = " << fmt_num(c.spec.stable_alpha) << "\n";
  os << "stable_theta = " << fmt_num(c.spec.stable_theta) << "\n";
  os << "truncation = " << fmt_num(c.spec.truncation) << "\n";
  os << "\n[field]\n";
  os << "kind = " << convolution_kind_name(c.kind) << "\n";
  os << "order = " << c.order << "\n";
  os << "cutoff = " << c.cutoff << "\n";
  if (!c.cutoffs.empty()) {
    os << "cutoffs =";
    for (int n : c.cutoffs) os << " " << n;
    os << "\n";
  }
  os << "\n[time]\n";
  os << "horizon = " << fmt_num(c.horizon) << "\n";
  os << "cells = " << c.time_cells << "\n";
  os << "t_past = " << fmt_num(c.t_past) << "\n";
  os << "\n[norm]\n";
  os << "alpha = " << fmt_num(c.alpha) << "\n";
  os << "p = " << fmt_num(c.p) << "\n";
  os << "q = " << fmt_num(c.q) << "\n";
  os << "sup_time = " << (c.sup_time ? "true" : "false") << "\n";
  os << "gamma = " << fmt_num(c.gamma) << "\n";
  os << "epsilon = " << fmt_num(c.epsilon) << "\n";
  os << "delta = " << fmt_num(c.delta) << "\n";
  os << "\n[run]\n";
  os << "ensemble = " << c.ensemble << "\n";
  os << "seed = " << c.seed << "\n";
  os << "workers = " << c.workers << "\n";
  os << "out = " << c.out_dir << "\n";
  os << "\n[solver]\n";
  os << "sign = " << fmt_num(c.sign) << "\n";
  os << "dt = " << fmt_num(c.dt) << "\n";
  os << "cutoff = " << c.solver_cutoff << "\n";
  os << "blowup_radius = " << fmt_num(c.blowup_radius) << "\n";
  os << "picard_tol = " << fmt_num(c.picard_tol) << "\n";
  os << "picard_max = " << c.picard_max << "\n";
  os << "max_halvings = " << c.max_halvings << "\n";
  os << "nonlinear = " << (c.nonlinear ? "true" : "false") << "\n";
  os << "residual_tol = " << fmt_num(c.residual_tol) << "\n";
  os << "emit_fields = " << (c.emit_fields ? "true" : "false") << "\n";
  os << "\n[points]\n";
  os << "order_m = " << c.order_m << "\n";
  os << "s = " << fmt_num(c.time_s) << "\n";
  os << "t = " << fmt_num(c.time_t) << "\n";
  os << "x = " << fmt_num(c.point_x[0]) << " " << fmt_num(c.point_x[1]) << "\n";
  os << "y = " << fmt_num(c.point_y[0]) << " " << fmt_num(c.point_y[1]) << "\n";
  return os.str();
}

bool operator==(const ExperimentConfig& a, const ExperimentConfig& b) {
  const SubordinatorSpec &s = a.spec, &t = b.spec;
  bool spec_eq = s.kind == t.kind && s.drift == t.drift && s.rate == t.rate &&
                 s.jump_law == t.jump_law && s.jump_a == t.jump_a && s.jump_b == t.jump_b &&
                 s.gamma_shape == t.gamma_shape && s.gamma_rate == t.gamma_rate &&
                 s.stable_c == t.stable_c && s.stable_alpha == t.stable_alpha &&
                 s.stable_theta == t.stable_theta && s.truncation == t.truncation;
  return spec_eq && a.command == b.command && a.kind == b.kind && a.order == b.order &&
         a.cutoff == b.cutoff && a.cutoffs == b.cutoffs && a.horizon == b.horizon &&
         a.time_cells == b.time_cells && a.t_past == b.t_past && a.alpha == b.alpha &&
         a.p == b.p && a.q == b.q && a.sup_time == b.sup_time && a.gamma == b.gamma &&
         a.epsilon == b.epsilon && a.delta == b.delta && a.ensemble == b.ensemble &&
         a.seed == b.seed && a.workers == b.workers && a.out_dir == b.out_dir &&
         a.sign == b.sign && a.dt == b.dt && a.solver_cutoff == b.solver_cutoff &&
         a.blowup_radius == b.blowup_radius && a.picard_tol == b.picard_tol &&
         a.picard_max == b.picard_max && a.max_halvings == b.max_halvings &&
         a.nonlinear == b.nonlinear && a.residual_tol == b.residual_tol &&
         a.emit_fields == b.emit_fields && a.order_m == b.order_m && a.time_s == b.time_s &&
         a.time_t == b.time_t && a.point_x == b.point_x && a.point_y == b.point_y;
}

}  // namespace wickspde
