#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "doctest.h"
#include "json.hpp"
#include "wickspde/config.hpp"
#include "wickspde/experiments.hpp"

using namespace wickspde;
namespace fs = std::filesystem;

namespace {

using KV = std::vector<std::pair<std::string, std::string>>;

// Renders "section.key" pairs as a config document, opening each [section]
// the first time it appears.  Top-level keys (no dot) must come first.
std::string make_doc(const KV& entries) {
  std::ostringstream os;
  std::string section;
  for (const auto& [full, value] : entries) {
    std::size_t dot = full.find('.');
    std::string sec = dot == std::string::npos ? "" : full.substr(0, dot);
    std::string key = dot == std::string::npos ? full : full.substr(dot + 1);
    if (sec != section) {
      os << "[" << sec << "]\n";
      section = sec;
    }
    os << key << " = " << value << "\n";
  }
  return os.str();
}

std::string parse_error(const std::string& text) {
  try {
    parse_config(text);
  } catch (const std::invalid_argument& e) {
    return e.what();
  }
  return "<no exception>";
}

bool contains(const std::string& hay, const std::string& needle) {
  return hay.find(needle) != std::string::npos;
}

std::string read_file(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  REQUIRE_MESSAGE(f.good(), "cannot open " << p.string());
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

// Scratch directory under the system temp root, wiped on construction and
// destruction so reruns never compare against stale artifacts.
struct ScratchDir {
  fs::path path;
  explicit ScratchDir(const std::string& name)
      : path(fs::temp_directory_path() / ("wickspde-cli-" + name)) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~ScratchDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
};

std::string strip_wall_seconds(const std::string& manifest_text) {
  std::istringstream is(manifest_text);
  std::ostringstream os;
  std::string line;
  while (std::getline(is, line))
    if (!contains(line, "wall_seconds")) os << line << '\n';
  return os.str();
}

double metric(const RunManifest& m, const std::string& name) {
  for (const Metric& mm : m.metrics)
    if (mm.name == name) return mm.value;
  FAIL("missing metric '" << name << "'");
  return 0.0;
}

const Check* find_check(const RunManifest& m, const std::string& name) {
  for (const Check& c : m.checks)
    if (c.name == name) return &c;
  return nullptr;
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("a one-line document yields the documented defaults") {
  ExperimentConfig c = parse_config("command = solve-heat\n");
  CHECK(c.command == Command::solve_heat);
  CHECK(c.blowup_radius == 10.0);
  CHECK(c.dt == 1e-3);
  CHECK(c.t_past == 8.0);
  CHECK(c.kind == ConvolutionKind::heat);
  CHECK(c.order == 2);
  CHECK(c.cutoff == 8);
  CHECK(c.cutoffs.empty());
  CHECK(c.horizon == 0.5);
  CHECK(c.time_cells == 32);
  CHECK(c.alpha == -0.5);
  CHECK(std::isinf(c.p));
  CHECK(std::isinf(c.q));
  CHECK_FALSE(c.sup_time);
  CHECK(c.gamma == 1.0);
  CHECK(c.epsilon == 0.2);
  CHECK(c.delta == 0.5);
  CHECK(c.ensemble == 20);
  CHECK(c.seed == 1);
  CHECK(c.workers == 1);
  CHECK(c.out_dir == "wickspde-out");
  CHECK(c.sign == -1.0);
  CHECK(c.solver_cutoff == 0);
  CHECK(c.picard_tol == 1e-9);
  CHECK(c.picard_max == 50);
  CHECK(c.max_halvings == 8);
  CHECK(c.nonlinear);
  CHECK(std::isinf(c.residual_tol));
  CHECK(c.emit_fields);
  CHECK(c.spec.kind == LevyKind::deterministic_linear);
  CHECK(c.spec.drift == 0.0);
  CHECK(c.order_m == 0);
  CHECK(c.time_s == 0.25);
  CHECK(c.time_t == 0.5);

  // Unset values resolve from their companions.
  CHECK(c.resolved_cutoffs() == std::vector<int>{8});
  CHECK(c.resolved_solver_cutoff() == 16);
  CHECK(c.resolved_order_m() == 2);
  ExperimentConfig d = c;
  d.cutoffs = {4, 8, 16};
  d.solver_cutoff = 20;
  d.order_m = 1;
  CHECK(d.resolved_cutoffs() == std::vector<int>{4, 8, 16});
  CHECK(d.resolved_solver_cutoff() == 20);
  CHECK(d.resolved_order_m() == 1);
}

TEST_CASE("comments, blank lines, CRLF endings, and loose spacing are tolerated") {
  std::string doc =
      "# quadratic heat run\r\n"
      "command = solve-heat   # command comes first\r\n"
      "\r\n"
      "  [time]  \r\n"
      "\thorizon\t=\t0.25\r\n"
      "cells = 8 # coarse grid\r\n"
      "\n"
      "[run]\n"
      "out = runs/heat smoke\n";
  ExperimentConfig c = parse_config(doc);
  CHECK(c.horizon == 0.25);
  CHECK(c.time_cells == 8);
  CHECK(c.out_dir == "runs/heat smoke");
}

TEST_CASE("inf is accepted wherever a norm index or tolerance may be infinite") {
  ExperimentConfig c = parse_config(make_doc({{"command", "solve-heat"},
                                              {"norm.p", "inf"},
                                              {"norm.q", "inf"},
                                              {"solver.residual_tol", "inf"}}));
  CHECK(std::isinf(c.p));
  CHECK(c.p > 0);
  CHECK(std::isinf(c.q));
  CHECK(std::isinf(c.residual_tol));
  // finite values still parse through the same path
  ExperimentConfig d =
      parse_config(make_doc({{"command", "solve-heat"}, {"norm.p", "2"}, {"norm.q", "1"}}));
  CHECK(d.p == 2.0);
  CHECK(d.q == 1.0);
}

TEST_CASE("strict parsing rejects malformed documents with precise messages") {
  CHECK(parse_error("bogus = 3\n") == "config error: unknown key 'bogus'");
  CHECK(parse_error("command = isometry\n[field]\nbogus = 3\n") ==
        "config error: unknown key 'field.bogus'");
  CHECK(parse_error("[fields]\n") == "config error: unknown section [fields]");
  CHECK(parse_error("command = isometry\n[field]\norder = 2\norder = 2\n") ==
        "config error: duplicate key 'field.order'");
  CHECK(parse_error("[time]\nhorizon =\n") ==
        "config error: key 'horizon' has an empty value");
  CHECK(parse_error("[time]\nhorizon = fast\n") ==
        "config error: key 'time.horizon' needs a numeric value, got 'fast'");
  CHECK(parse_error("[time]\nhorizon = 0.5x\n") ==
        "config error: key 'time.horizon' has trailing junk in value '0.5x'");
  CHECK(parse_error("[time]\nhorizon = nan\n") ==
        "config error: key 'time.horizon' must not be NaN");
  CHECK(parse_error("[time\nhorizon = 1\n") ==
        "config error: malformed section header at line 1: '[time'");
  CHECK(parse_error("hello there\n") ==
        "config error: line 1 is not of the form 'key = value': 'hello there'");
  CHECK(parse_error("= 3\n") == "config error: empty key at line 1");
  CHECK(parse_error("[norm]\nsup_time = yes\n") ==
        "config error: key 'norm.sup_time' needs 'true' or 'false', got 'yes'");
  CHECK(parse_error("[field]\ncutoff = 8.5\n") ==
        "config error: key 'field.cutoff' has trailing junk in value '8.5'");
  CHECK(parse_error("[run]\nseed = -3\n") ==
        "config error: key 'run.seed' must be nonnegative, got '-3'");
  CHECK(parse_error("[points]\nx = 1.0\n") ==
        "config error: key 'points.x' needs exactly two coordinates");
  CHECK(contains(parse_error("command = simulate\n"), "unknown command 'simulate'"));
  CHECK(contains(parse_error("[subordinator]\njump_law = pareto\n"),
                 "jump_law must be fixed, exponential, or uniform"));
  CHECK(contains(parse_error("[field]\nkind = cold\n"), "unknown convolution kind"));
}

TEST_CASE("the heat solve command is restricted to the quadratic equation") {
  std::string msg = parse_error(make_doc({{"command", "solve-heat"},
                                          {"field.order", "3"},
                                          {"field.cutoff", "4"},
                                          {"solver.cutoff", "12"}}));
  CHECK(contains(msg, "field.order = 3"));
  CHECK(contains(msg, "k = 2 restriction"));
  CHECK(contains(msg, "not time-integrable"));
}

TEST_CASE("one violation per parameter window is rejected, naming the window") {
  struct BadDoc {
    const char* name;
    KV doc;
    const char* fragment;
  };
  const std::vector<BadDoc> cases = {
      {"isometry-small-ensemble",
       {{"command", "isometry"}, {"run.ensemble", "50"}},
       "run.ensemble >= 100 violated for command isometry (ensemble = 50)"},
      {"covariance-wrong-kind",
       {{"command", "covariance"}, {"field.kind", "heat-stationary"}, {"run.ensemble", "200"}},
       "command covariance requires field.kind heat or wave"},
      {"covariance-probe-outside-horizon",
       {{"command", "covariance"}, {"run.ensemble", "200"}, {"points.s", "0.6"}},
       "must lie in [0, horizon]"},
      {"study-single-cutoff",
       {{"command", "wick-convergence"}},
       "needs at least two entries in field.cutoffs"},
      {"study-heat-sup-time",
       {{"command", "wick-convergence"}, {"field.cutoffs", "4 8"}, {"norm.sup_time", "true"}},
       "require an L^gamma time norm"},
      {"study-heat-gamma-window",
       {{"command", "wick-convergence"}, {"field.cutoffs", "4 8"}, {"norm.gamma", "1.5"}},
       "gamma < 2/((1-epsilon)*k) violated"},
      {"study-heat-alpha-window",
       {{"command", "wick-convergence"}, {"field.cutoffs", "4 8"}, {"norm.alpha", "-0.1"}},
       "alpha < -epsilon*k violated"},
      {"study-wave-alpha-positive",
       {{"command", "wick-convergence"},
        {"field.kind", "wave"},
        {"field.cutoffs", "4 8"},
        {"norm.alpha", "0.1"},
        {"norm.sup_time", "true"}},
       "alpha < 0 violated"},
      {"divergence-random-subordinator",
       {{"command", "renorm-divergence"}, {"subordinator.kind", "poisson"},
        {"subordinator.rate", "1"}},
       "requires L(t) = t"},
      {"divergence-wrong-drift",
       {{"command", "renorm-divergence"}, {"subordinator.drift", "2"}},
       "requires L(t) = t"},
      {"jump-probe-infinite-activity",
       {{"command", "jump-continuity"}, {"subordinator.kind", "gamma"},
        {"subordinator.truncation", "0.01"}},
       "finite-activity"},
      {"heat-solve-zero-delta",
       {{"command", "solve-heat"}, {"norm.delta", "0"}},
       "norm.delta > 0 violated"},
      {"solver-bad-sign",
       {{"command", "solve-heat"}, {"solver.sign", "2"}},
       "solver.sign must be +1 or -1"},
      {"solver-zero-dt",
       {{"command", "solve-heat"}, {"solver.dt", "0"}},
       "solver.dt > 0 violated"},
      {"solver-cutoff-below-product",
       {{"command", "solve-heat"}, {"solver.cutoff", "15"}},
       "solver.cutoff >= order * field.cutoff violated (M = 15, k*N = 16)"},
      {"wave-solve-heat-field",
       {{"command", "solve-wave"}, {"field.order", "3"}},
       "command solve-wave requires field.kind = wave (got heat)"},
      {"wave-solve-linear-order",
       {{"command", "solve-wave"}, {"field.kind", "wave"}, {"field.order", "1"}},
       "field.order >= 2 violated for command solve-wave"},
      {"wave-solve-epsilon-window",
       {{"command", "solve-wave"}, {"field.kind", "wave"}, {"field.order", "3"},
        {"field.cutoff", "3"}, {"norm.epsilon", "1.5"}, {"solver.cutoff", "9"}},
       "0 < norm.epsilon < 1 violated"},
      {"stationary-transient-kind",
       {{"command", "stationary-check"}, {"run.ensemble", "100"}},
       "requires field.kind heat-stationary or damped-wave-stationary"},
      {"stationary-small-ensemble",
       {{"command", "stationary-check"}, {"field.kind", "heat-stationary"},
        {"run.ensemble", "99"}},
       "run.ensemble >= 100 violated for command stationary-check"},
      {"stationary-probes-out-of-order",
       {{"command", "stationary-check"}, {"field.kind", "heat-stationary"},
        {"run.ensemble", "100"}, {"points.s", "0.5"}, {"points.t", "0.25"}},
       "0 <= points.s < points.t <= horizon violated"},
      {"cutoff-zero",
       {{"command", "isometry"}, {"field.cutoff", "0"}, {"run.ensemble", "200"}},
       "field.cutoff >= 1 violated (cutoff = 0)"},
      {"cutoffs-not-increasing",
       {{"command", "isometry"}, {"field.cutoffs", "4 4"}, {"run.ensemble", "200"}},
       "field.cutoffs must be strictly increasing"},
      {"zero-horizon",
       {{"command", "isometry"}, {"time.horizon", "0"}, {"run.ensemble", "200"}},
       "time.horizon > 0 violated"},
      {"zero-cells",
       {{"command", "isometry"}, {"time.cells", "0"}, {"run.ensemble", "200"}},
       "time.cells >= 1 violated"},
      {"zero-warmup",
       {{"command", "isometry"}, {"time.t_past", "0"}, {"run.ensemble", "200"}},
       "time.t_past > 0 violated"},
      {"p-below-one",
       {{"command", "isometry"}, {"norm.p", "0.5"}, {"run.ensemble", "200"}},
       "norm.p >= 1 violated (p = 0.5)"},
      {"q-below-one",
       {{"command", "isometry"}, {"norm.q", "0"}, {"run.ensemble", "200"}},
       "norm.q >= 1 violated"},
      {"zero-workers",
       {{"command", "isometry"}, {"run.workers", "0"}, {"run.ensemble", "200"}},
       "run.workers >= 1 violated"},
      {"negative-order",
       {{"command", "isometry"}, {"field.order", "-1"}, {"run.ensemble", "200"}},
       "field.order >= 0 violated"},
      {"uniform-jump-bounds-reversed",
       {{"command", "isometry"}, {"subordinator.kind", "compound-poisson"},
        {"subordinator.rate", "2"}, {"subordinator.jump_law", "uniform"},
        {"subordinator.jump_a", "0.8"}, {"subordinator.jump_b", "0.5"},
        {"run.ensemble", "200"}},
       "uniform jump bounds need 0 < lo < hi"},
      {"gamma-without-truncation",
       {{"command", "isometry"}, {"subordinator.kind", "gamma"}, {"run.ensemble", "200"}},
       "truncation required: infinite-activity kind needs eps > 0"},
  };
  for (const BadDoc& c : cases) {
    CAPTURE(c.name);
    std::string msg = parse_error(make_doc(c.doc));
    CHECK_MESSAGE(contains(msg, c.fragment), c.name << ": got '" << msg << "'");
  }

  // The windows themselves are inhabited: nearby compliant documents parse.
  CHECK_NOTHROW(parse_config(make_doc({{"command", "wick-convergence"},
                                       {"field.cutoffs", "4 8"}})));
  CHECK_NOTHROW(parse_config(make_doc({{"command", "wick-convergence"},
                                       {"field.kind", "wave"},
                                       {"field.order", "3"},
                                       {"field.cutoffs", "4 8"},
                                       {"norm.alpha", "-0.1"},
                                       {"norm.sup_time", "true"}})));
  CHECK_NOTHROW(parse_config(make_doc({{"command", "solve-wave"},
                                       {"field.kind", "wave"},
                                       {"field.order", "3"},
                                       {"field.cutoff", "3"},
                                       {"solver.cutoff", "9"}})));
  CHECK_NOTHROW(parse_config(make_doc({{"command", "stationary-check"},
                                       {"subordinator.kind", "gamma"},
                                       {"subordinator.truncation", "0.01"},
                                       {"field.kind", "damped-wave-stationary"},
                                       {"run.ensemble", "100"}})));
}

TEST_CASE("emit and parse are exact inverses") {
  SUBCASE("documented defaults") {
    ExperimentConfig c = parse_config("command = solve-heat\n");
    std::string text = emit_config(c);
    ExperimentConfig c2 = parse_config(text);
    CHECK(c2 == c);
    CHECK(emit_config(c2) == text);
  }
  SUBCASE("every key set away from its default") {
    std::string doc = make_doc({
        {"command", "wick-convergence"},
        {"subordinator.kind", "tempered-stable"},
        {"subordinator.drift", "0.25"},
        {"subordinator.rate", "3.5"},
        {"subordinator.jump_law", "uniform"},
        {"subordinator.jump_a", "0.2"},
        {"subordinator.jump_b", "0.9"},
        {"subordinator.gamma_shape", "2.5"},
        {"subordinator.gamma_rate", "1.5"},
        {"subordinator.stable_c", "0.7"},
        {"subordinator.stable_alpha", "0.4"},
        {"subordinator.stable_theta", "2.0"},
        {"subordinator.truncation", "0.001"},
        {"field.kind", "wave"},
        {"field.order", "3"},
        {"field.cutoff", "5"},
        {"field.cutoffs", "3 6 12"},
        {"time.horizon", "0.75"},
        {"time.cells", "24"},
        {"time.t_past", "4"},
        {"norm.alpha", "-0.3"},
        {"norm.p", "4.5"},
        {"norm.q", "2"},
        {"norm.sup_time", "true"},
        {"norm.gamma", "2.5"},
        {"norm.epsilon", "0.4"},
        {"norm.delta", "0.25"},
        {"run.ensemble", "8"},
        {"run.seed", "123456789"},
        {"run.workers", "3"},
        {"run.out", "runs/maximal"},
        {"solver.sign", "1"},
        {"solver.dt", "0.002"},
        {"solver.cutoff", "15"},
        {"solver.blowup_radius", "25"},
        {"solver.picard_tol", "1e-7"},
        {"solver.picard_max", "9"},
        {"solver.max_halvings", "3"},
        {"solver.nonlinear", "false"},
        {"solver.residual_tol", "0.125"},
        {"solver.emit_fields", "false"},
        {"points.order_m", "2"},
        {"points.s", "0.1"},
        {"points.t", "0.7"},
        {"points.x", "0.5 1.25"},
        {"points.y", "-0.75 2"},
    });
    ExperimentConfig c = parse_config(doc);
    CHECK(c.spec.kind == LevyKind::tempered_stable);
    CHECK(c.spec.stable_alpha == 0.4);
    CHECK(c.cutoffs == std::vector<int>{3, 6, 12});
    CHECK(c.point_x == std::array<double, 2>{0.5, 1.25});
    CHECK(c.point_y == std::array<double, 2>{-0.75, 2.0});
    CHECK_FALSE(c.nonlinear);
    CHECK_FALSE(c.emit_fields);

    std::string text = emit_config(c);
    ExperimentConfig c2 = parse_config(text);
    CHECK(c2 == c);
    CHECK(emit_config(c2) == text);
    // the canonical form includes the infinity spelling when present
    ExperimentConfig e = c;
    e.residual_tol = std::numeric_limits<double>::infinity();
    CHECK(contains(emit_config(e), "residual_tol = inf"));
  }
}

TEST_CASE("config files parse like in-memory text and missing files are named") {
  ScratchDir sd("config-file");
  fs::path file = sd.path / "run.cfg";
  std::string doc = make_doc(
      {{"command", "jump-continuity"}, {"subordinator.kind", "poisson"},
       {"subordinator.rate", "4"}, {"field.cutoff", "4"}});
  {
    std::ofstream f(file);
    f << doc;
  }
  ExperimentConfig a = parse_config_file(file.string());
  ExperimentConfig b = parse_config(doc);
  CHECK(a == b);

  fs::path missing = sd.path / "nope.cfg";
  try {
    parse_config_file(missing.string());
    FAIL("expected a throw");
  } catch (const std::invalid_argument& e) {
    CHECK(contains(e.what(), "config error: cannot open config file"));
    CHECK(contains(e.what(), missing.string()));
  }
}

TEST_CASE("identical runs write byte-identical reports apart from wall time") {
  ScratchDir sd("rerun");
  ExperimentConfig cfg = parse_config(make_doc(
      {{"command", "jump-continuity"}, {"subordinator.kind", "compound-poisson"},
       {"subordinator.rate", "4"}, {"subordinator.jump_law", "exponential"},
       {"subordinator.jump_a", "0.5"}, {"field.cutoff", "4"}, {"time.cells", "16"},
       {"time.horizon", "1"}, {"run.seed", "7"}}));
  cfg.out_dir = (sd.path / "out").string();

  RunResult r1 = run_experiment(cfg);
  std::vector<std::string> written = emit_report(r1);
  REQUIRE(written.size() == 3);
  CHECK(contains(written[0], "summary.json"));
  CHECK(contains(written[1], "jumps.csv"));
  CHECK(contains(written[2], "manifest.json"));
  std::string sum1 = read_file(written[0]);
  std::string csv1 = read_file(written[1]);
  std::string man1 = read_file(written[2]);
  CHECK(contains(man1, "wall_seconds"));
  CHECK(contains(man1, kVersionTag));

  RunResult r2 = run_experiment(cfg);
  emit_report(r2);
  CHECK(read_file(written[0]) == sum1);
  CHECK(read_file(written[1]) == csv1);
  // wall time is the only field allowed to move between identical runs
  CHECK(strip_wall_seconds(read_file(written[2])) == strip_wall_seconds(man1));

  // the manifest embeds the exact config; reparsing it reproduces the run
  nlohmann::json man = nlohmann::json::parse(man1);
  ExperimentConfig c2 = parse_config(man["config"].get<std::string>());
  CHECK(c2 == cfg);
  CHECK(man["version"].get<std::string>() == kVersionTag);

  // this command's identities hold exactly on the reported path
  CHECK(r1.manifest.pass);
  const Check* jump = find_check(r1.manifest, "heat-jump-identity");
  REQUIRE(jump != nullptr);
  CHECK(jump->pass);
  CHECK(metric(r1.manifest, "n_jumps") > 0);
}

TEST_CASE("worker count changes the schedule, not the statistics") {
  ScratchDir sd("workers");
  ExperimentConfig cfg = parse_config(make_doc(
      {{"command", "isometry"}, {"subordinator.kind", "compound-poisson"},
       {"subordinator.rate", "2"}, {"subordinator.jump_law", "exponential"},
       {"subordinator.jump_a", "0.5"}, {"time.cells", "16"}, {"run.ensemble", "200"},
       {"run.seed", "11"}}));

  cfg.workers = 1;
  cfg.out_dir = (sd.path / "w1").string();
  RunResult r1 = run_experiment(cfg);
  emit_report(r1);

  cfg.workers = 4;
  cfg.out_dir = (sd.path / "w4").string();
  RunResult r4 = run_experiment(cfg);
  emit_report(r4);

  CHECK(read_file(sd.path / "w1" / "summary.json") ==
        read_file(sd.path / "w4" / "summary.json"));
  CHECK(read_file(sd.path / "w1" / "covariance.csv") ==
        read_file(sd.path / "w4" / "covariance.csv"));
  CHECK(metric(r1.manifest, "pair_re_mean") == metric(r4.manifest, "pair_re_mean"));
  CHECK(r1.manifest.pass);
  CHECK(r4.manifest.pass);
  // the conjugate-pair statistic matches its right-point oracle within 4 SE
  const Check* pair = find_check(r1.manifest, "conjugate-pair-covariance-within-4se");
  REQUIRE(pair != nullptr);
  CHECK(pair->pass);
}

TEST_CASE("a convergence study reports one row per cutoff and sample") {
  ScratchDir sd("study");
  ExperimentConfig cfg = parse_config(make_doc(
      {{"command", "wick-convergence"}, {"subordinator.kind", "poisson"},
       {"subordinator.rate", "2"}, {"field.order", "1"}, {"field.cutoffs", "2 4"},
       {"time.horizon", "0.25"}, {"time.cells", "8"}, {"run.ensemble", "3"},
       {"run.seed", "3"}}));
  cfg.out_dir = (sd.path / "out").string();

  RunResult r = run_experiment(cfg);
  REQUIRE(r.tables.size() == 1);
  CHECK(r.tables[0].name == "norms");
  CHECK(r.tables[0].rows.size() == 2 * 3);
  // per-cutoff statistics and the fitted slope land in the manifest
  CHECK(std::isfinite(metric(r.manifest, "mean_N2")));
  CHECK(std::isfinite(metric(r.manifest, "mean_N4")));
  CHECK(std::isfinite(metric(r.manifest, "slope")));

  emit_report(r);
  std::string csv = read_file(sd.path / "out" / "norms.csv");
  std::size_t lines = 0;
  for (std::size_t i = 0; (i = csv.find("\r\n", i)) != std::string::npos; ++i) ++lines;
  CHECK(lines == 1 + 2 * 3);
  CHECK(csv.rfind("kind,k,N,sample,norm_value\r\n", 0) == 0);

  nlohmann::json sum = nlohmann::json::parse(read_file(sd.path / "out" / "summary.json"));
  CHECK(sum["tables"]["norms"]["rows"].get<std::size_t>() == 6);
  CHECK(sum["tables"]["norms"]["file"].get<std::string>() == "norms.csv");
}

TEST_CASE("a run with no jump rows still emits a complete, valid report") {
  ScratchDir sd("empty-table");
  ExperimentConfig cfg = parse_config(make_doc(
      {{"command", "jump-continuity"}, {"subordinator.kind", "poisson"},
       {"subordinator.rate", "1e-6"}, {"field.cutoff", "2"}, {"time.horizon", "0.1"},
       {"time.cells", "4"}, {"run.seed", "1"}}));
  cfg.out_dir = (sd.path / "out").string();

  RunResult r = run_experiment(cfg);
  REQUIRE(r.tables.size() == 1);
  REQUIRE(r.tables[0].rows.empty());
  CHECK(r.manifest.pass);  // the continuity identities hold vacuously

  emit_report(r);
  std::string csv = read_file(sd.path / "out" / "jumps.csv");
  CHECK(csv == "t,jump_size,heat_jump_defect,wave_value_jump,wave_deriv_defect\r\n");
  nlohmann::json sum = nlohmann::json::parse(read_file(sd.path / "out" / "summary.json"));
  CHECK(sum["tables"]["jumps"]["rows"].get<std::size_t>() == 0);
  CHECK(sum["pass"].get<bool>());
}

TEST_CASE("an unwritable output directory is reported as an i/o error") {
  ScratchDir sd("unwritable");
  fs::path blocker = sd.path / "blocker";
  {
    std::ofstream f(blocker);
    f << "a regular file where a directory is needed\n";
  }
  std::string bad = (blocker / "out").string();
  try {
    ensure_writable_dir(bad);
    FAIL("expected a throw");
  } catch (const std::runtime_error& e) {
    CHECK(contains(e.what(), "i/o error"));
    CHECK(contains(e.what(), "not writable"));
  }

  // emit_report performs the same probe before writing anything
  ExperimentConfig cfg = parse_config(make_doc(
      {{"command", "renorm-divergence"}, {"subordinator.drift", "1"},
       {"field.cutoffs", "4 8"}}));
  cfg.out_dir = bad;
  RunResult r = run_experiment(cfg);
  CHECK(r.manifest.pass);
  CHECK(r.tables[0].rows.size() == 2);
  CHECK_THROWS_AS(emit_report(r), std::runtime_error);
}

TEST_CASE("command names round-trip through their parser") {
  const std::vector<std::pair<Command, std::string>> names = {
      {Command::isometry, "isometry"},
      {Command::covariance, "covariance"},
      {Command::wick_convergence, "wick-convergence"},
      {Command::renorm_divergence, "renorm-divergence"},
      {Command::jump_continuity, "jump-continuity"},
      {Command::solve_heat, "solve-heat"},
      {Command::solve_wave, "solve-wave"},
      {Command::stationary_check, "stationary-check"},
  };
  for (const auto& [cmd, name] : names) {
    CHECK(command_name(cmd) == name);
    CHECK(command_from_name(name) == cmd);
  }
  CHECK_THROWS_AS(command_from_name("diffuse"), std::invalid_argument);
}

}  // TEST_SUITE("cli")
