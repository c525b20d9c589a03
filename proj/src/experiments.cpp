#include "wickspde/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"
#include "wickspde/linfield.hpp"
#include "wickspde/pathint.hpp"
#include "wickspde/rng.hpp"
#include "wickspde/solver.hpp"
#include "wickspde/spectral.hpp"
#include "wickspde/util.hpp"
#include "wickspde/wick.hpp"

namespace wickspde {
namespace {

using ojson = nlohmann::ordered_json;

constexpr double kInv2Pi = 1.0 / 6.283185307179586476925286766559;
constexpr double kInf = std::numeric_limits<double>::infinity();

// Fitted convergence slopes must clear this bound for a study to pass.
constexpr double kSlopeBound = -0.1;
// Machine-level identities (jump sizes, continuity) are held to this.
constexpr double kExactTol = 1e-12;
// Relative tolerance on the logarithmic divergence increment.
constexpr double kDivergenceTol = 0.10;

constexpr std::uint64_t kRolePath = 1;
constexpr std::uint64_t kRoleNoise = 2;
constexpr std::uint64_t kRoleStationary = 3;

std::uint64_t stream_key(const ExperimentConfig& cfg, std::uint64_t role, std::uint64_t index) {
  return mix_key({cfg.seed, 0x65787074ULL /* experiment streams */,
                  static_cast<std::uint64_t>(cfg.command), role, index});
}

std::vector<double> uniform_grid(double horizon, int cells) {
  std::vector<double> g(static_cast<std::size_t>(cells) + 1);
  for (int i = 0; i <= cells; ++i) g[static_cast<std::size_t>(i)] = horizon * i / cells;
  g.back() = horizon;
  return g;
}

// Uniform reporting grid refined by every jump of the path: the grid every
// noise sample and convolution in an experiment lives on.
std::vector<double> noise_grid(const SubordinatorPath& path, double horizon, int cells) {
  std::vector<double> g = uniform_grid(horizon, cells);
  for (double s : path.jump_times)
    if (s > 0.0 && s <= horizon) g.push_back(s);
  std::sort(g.begin(), g.end());
  g.erase(std::unique(g.begin(), g.end()), g.end());
  return g;
}

Check check_le(const std::string& name, double value, double bound) {
  return Check{name, value, bound, value <= bound};
}

Check check_lt(const std::string& name, double value, double bound) {
  return Check{name, value, bound, value < bound};
}

void add_metric(RunManifest& m, const std::string& name, double value) {
  m.metrics.push_back(Metric{name, value});
}

std::vector<std::string> row(std::initializer_list<std::string> cells) { return cells; }

StudyConfig make_study(const ExperimentConfig& c) {
  StudyConfig sc;
  sc.kind = c.kind;
  sc.order = c.order;
  sc.cutoffs = c.resolved_cutoffs();
  sc.norm = StudyNorm{c.alpha, c.p, c.q, c.sup_time, c.gamma, c.epsilon};
  sc.horizon = c.horizon;
  sc.time_cells = c.time_cells;
  sc.ensemble = c.ensemble;
  sc.seed = c.seed;
  sc.workers = c.workers;
  sc.spec = c.spec;
  return sc;
}

SolveConfig make_solve(const ExperimentConfig& c) {
  SolveConfig s;
  s.sign = c.sign;
  s.order = c.order;
  s.cutoff = c.resolved_solver_cutoff();
  s.dt = c.dt;
  s.horizon = c.horizon;
  s.blowup_radius = c.blowup_radius;
  s.picard_tol = c.picard_tol;
  s.picard_max = c.picard_max;
  s.max_halvings = c.max_halvings;
  s.nonlinear = c.nonlinear;
  s.gamma = c.gamma;
  s.delta = c.delta;
  s.epsilon = c.epsilon;
  return s;
}

// --- isometry -----------------------------------------------------------------
// For a fixed subordinator path, the mode integrals I_l(f) = sum_i f(t_{i+1})
// dbeta^l_L(cell i) are jointly Gaussian with E[I_l(f) I_{l'}(g)] equal to
// delta_{l,-l'} times the right-point Stieltjes sum of f g against dL (exactly
// the Stieltjes integral when L is pure-jump, since the jumps sit at cell
// right endpoints).
RunResult run_isometry(const ExperimentConfig& cfg) {
  RunResult out;
  const double T = cfg.horizon;
  SubordinatorPath path = sample_subordinator(cfg.spec, T, stream_key(cfg, kRolePath, 0));
  std::vector<double> grid = noise_grid(path, T, cfg.time_cells);
  auto modes = ModeSet::shared(1);
  std::size_t i10 = modes->index_of(1, 0);
  std::size_t i01 = modes->index_of(0, 1);
  std::size_t im10 = modes->index_of(-1, 0);
  auto kern = [T](double s) { return std::exp(-(T - s)); };  // heat kernel, |l|^2 = 1

  const std::size_t n = cfg.ensemble;
  std::vector<double> cross_re(n), cross_im(n), pair_re(n), pair_im(n);
  parallel_for(n, cfg.workers, [&](std::size_t i) {
    ModeNoise noise = sample_mode_noise(path, 1, grid, stream_key(cfg, kRoleNoise, i));
    std::complex<double> z1 = 0.0, z2 = 0.0, z3 = 0.0;
    for (std::size_t c = 0; c + 1 < grid.size(); ++c) {
      double w = kern(grid[c + 1]);
      z1 += w * noise.increment(c, i10);
      z2 += w * noise.increment(c, i01);
      z3 += w * noise.increment(c, im10);
    }
    std::complex<double> cross = z1 * z2, pair = z1 * z3;
    cross_re[i] = cross.real();
    cross_im[i] = cross.imag();
    pair_re[i] = pair.real();
    pair_im[i] = pair.imag();
  });

  // Exact covariance of the discrete statistic: right-point sum of f g dL.
  double oracle = 0.0;
  {
    std::size_t j = 0;
    for (std::size_t c = 0; c + 1 < grid.size(); ++c) {
      double mass = path.drift_eff * (grid[c + 1] - grid[c]);
      while (j < path.jump_times.size() && path.jump_times[j] <= grid[c + 1]) {
        if (path.jump_times[j] > grid[c]) mass += path.jump_sizes[j];
        ++j;
      }
      double w = kern(grid[c + 1]);
      oracle += w * w * mass;
    }
  }
  double oracle_cont =
      stieltjes_integral([&](double s) { return kern(s) * kern(s); }, path, 0.0, T);

  MeanSE cr = mean_se(cross_re), ci = mean_se(cross_im);
  MeanSE pr = mean_se(pair_re), pi = mean_se(pair_im);
  out.manifest.checks.push_back(
      check_le("cross-mode-covariance-re-within-4se", std::fabs(cr.mean), 4.0 * cr.se));
  out.manifest.checks.push_back(
      check_le("cross-mode-covariance-im-within-4se", std::fabs(ci.mean), 4.0 * ci.se));
  out.manifest.checks.push_back(check_le("conjugate-pair-covariance-within-4se",
                                         std::fabs(pr.mean - oracle), 4.0 * pr.se));
  out.manifest.checks.push_back(
      check_le("conjugate-pair-covariance-im-within-4se", std::fabs(pi.mean), 4.0 * pi.se));

  add_metric(out.manifest, "oracle_right_point", oracle);
  add_metric(out.manifest, "oracle_stieltjes", oracle_cont);
  add_metric(out.manifest, "pair_re_mean", pr.mean);
  add_metric(out.manifest, "pair_re_se", pr.se);
  add_metric(out.manifest, "cross_re_mean", cr.mean);
  add_metric(out.manifest, "cross_re_se", cr.se);
  add_metric(out.manifest, "n_jumps", static_cast<double>(path.jump_times.size()));

  ResultTable t{"covariance",
                {"pair", "re_mean", "re_se", "im_mean", "im_se", "oracle"},
                {}};
  t.rows.push_back(row({"(1,0)x(0,1)", fmt17(cr.mean), fmt17(cr.se), fmt17(ci.mean),
                        fmt17(ci.se), fmt17(0.0)}));
  t.rows.push_back(row({"(1,0)x(-1,0)", fmt17(pr.mean), fmt17(pr.se), fmt17(pi.mean),
                        fmt17(pi.se), fmt17(oracle)}));
  out.tables.push_back(std::move(t));
  return out;
}

// --- covariance -----------------------------------------------------------------
RunResult run_covariance(const ExperimentConfig& cfg) {
  RunResult out;
  SubordinatorPath path =
      sample_subordinator(cfg.spec, cfg.horizon, stream_key(cfg, kRolePath, 0));
  CovarianceDiagnostic d = covariance_diagnostic(
      cfg.kind, path, cfg.cutoff, cfg.order, cfg.resolved_order_m(), cfg.time_s, cfg.point_x,
      cfg.time_t, cfg.point_y, cfg.ensemble, cfg.seed, cfg.workers);
  double tol = 4.0 * std::hypot(d.mc_se, d.predicted_se);
  out.manifest.checks.push_back(
      check_le("wick-covariance-within-4se", std::fabs(d.mc_value - d.predicted), tol));
  add_metric(out.manifest, "mc_value", d.mc_value);
  add_metric(out.manifest, "mc_se", d.mc_se);
  add_metric(out.manifest, "base_cov", d.base_cov);
  add_metric(out.manifest, "base_cov_se", d.base_cov_se);
  add_metric(out.manifest, "predicted", d.predicted);
  add_metric(out.manifest, "predicted_se", d.predicted_se);

  ResultTable t{"covariance",
                {"kind", "k", "m", "s", "t", "mc_value", "mc_se", "predicted",
                 "predicted_se", "base_cov", "base_cov_se"},
                {}};
  t.rows.push_back(row({convolution_kind_name(cfg.kind), std::to_string(d.order_k),
                        std::to_string(d.order_m), fmt17(cfg.time_s), fmt17(cfg.time_t),
                        fmt17(d.mc_value), fmt17(d.mc_se), fmt17(d.predicted),
                        fmt17(d.predicted_se), fmt17(d.base_cov), fmt17(d.base_cov_se)}));
  out.tables.push_back(std::move(t));
  return out;
}

// --- wick-convergence -----------------------------------------------------------
RunResult run_wick_convergence(const ExperimentConfig& cfg) {
  RunResult out;
  ConvergenceReport rep = cauchy_convergence_study(make_study(cfg));

  ResultTable t{"norms", {"kind", "k", "N", "sample", "norm_value"}, {}};
  for (std::size_t ci = 0; ci < rep.cutoffs.size(); ++ci)
    for (std::size_t s = 0; s < rep.norms[ci].size(); ++s)
      t.rows.push_back(row({convolution_kind_name(cfg.kind), std::to_string(cfg.order),
                            std::to_string(rep.cutoffs[ci]), std::to_string(s),
                            fmt17(rep.norms[ci][s])}));
  out.tables.push_back(std::move(t));

  double worst_ratio = 0.0;
  for (std::size_t ci = 0; ci + 1 < rep.cutoffs.size(); ++ci)
    worst_ratio = std::max(worst_ratio, rep.mean[ci + 1] / rep.mean[ci]);
  out.manifest.checks.push_back(check_lt("cauchy-means-strictly-decreasing", worst_ratio, 1.0));
  out.manifest.checks.push_back(check_le("cauchy-slope-bound", rep.slope, kSlopeBound));

  for (std::size_t ci = 0; ci < rep.cutoffs.size(); ++ci) {
    add_metric(out.manifest, "mean_N" + std::to_string(rep.cutoffs[ci]), rep.mean[ci]);
    add_metric(out.manifest, "se_N" + std::to_string(rep.cutoffs[ci]), rep.se[ci]);
  }
  add_metric(out.manifest, "slope", rep.slope);
  return out;
}

// --- renorm-divergence ------------------------------------------------------------
RunResult run_renorm_divergence(const ExperimentConfig& cfg) {
  RunResult out;
  double limit = heat_renorm_divergence_limit(cfg.horizon);
  std::vector<int> ns = cfg.resolved_cutoffs();
  ResultTable t{"divergence",
                {"N", "integral_N", "integral_2N", "difference", "limit", "rel_error"},
                {}};
  double dmin = kInf, dmax = -kInf;
  for (int n : ns) {
    double in = heat_renorm_time_integral(n, cfg.horizon);
    double i2n = heat_renorm_time_integral(2 * n, cfg.horizon);
    double diff = i2n - in;
    double rel = std::fabs(diff / limit - 1.0);
    dmin = std::min(dmin, diff);
    dmax = std::max(dmax, diff);
    t.rows.push_back(row({std::to_string(n), fmt17(in), fmt17(i2n), fmt17(diff), fmt17(limit),
                          fmt17(rel)}));
    out.manifest.checks.push_back(
        check_le("difference-matches-limit-N" + std::to_string(n), rel, kDivergenceTol));
    add_metric(out.manifest, "difference_N" + std::to_string(n), diff);
  }
  out.manifest.checks.push_back(
      check_le("differences-constant-across-N", dmax / dmin - 1.0, kDivergenceTol));
  add_metric(out.manifest, "limit", limit);
  out.tables.push_back(std::move(t));
  return out;
}

// --- jump-continuity ---------------------------------------------------------------
RunResult run_jump_continuity(const ExperimentConfig& cfg) {
  RunResult out;
  const double T = cfg.horizon;
  SubordinatorPath path = sample_subordinator(cfg.spec, T, stream_key(cfg, kRolePath, 0));
  std::vector<double> grid = noise_grid(path, T, cfg.time_cells);
  ModeNoise noise = sample_mode_noise(path, cfg.cutoff, grid, stream_key(cfg, kRoleNoise, 0));
  StochasticConvolution heat = heat_convolution(noise, grid);
  StochasticConvolution wave = wave_convolution(noise, grid);

  std::size_t nm = noise.modes->size();
  double heat_defect = 0.0, wave_value_jump = 0.0, wave_deriv_defect = 0.0;
  ResultTable t{"jumps",
                {"t", "jump_size", "heat_jump_defect", "wave_value_jump", "wave_deriv_defect"},
                {}};
  for (std::size_t j = 0; j < path.jump_times.size(); ++j) {
    double s = path.jump_times[j];
    if (s <= 0.0 || s > T) continue;
    std::size_t idx = heat.index_of(s);
    std::size_t cell = idx - 1;  // the jump sits at this cell's right endpoint
    double hd = 0.0, wv = 0.0, wd = 0.0;
    for (std::size_t m = 0; m < nm; ++m) {
      std::complex<double> xi = kInv2Pi * noise.jump[cell * nm + m];
      hd = std::max(hd, std::abs(heat.value[idx].a[m] - heat.value_left[idx].a[m] - xi));
      wv = std::max(wv, std::abs(wave.value[idx].a[m] - wave.value_left[idx].a[m]));
      wd = std::max(wd, std::abs(wave.deriv[idx].a[m] - wave.deriv_left[idx].a[m] - xi));
    }
    heat_defect = std::max(heat_defect, hd);
    wave_value_jump = std::max(wave_value_jump, wv);
    wave_deriv_defect = std::max(wave_deriv_defect, wd);
    t.rows.push_back(
        row({fmt17(s), fmt17(path.jump_sizes[j]), fmt17(hd), fmt17(wv), fmt17(wd)}));
  }
  out.tables.push_back(std::move(t));

  out.manifest.checks.push_back(check_le("heat-jump-identity", heat_defect, kExactTol));
  out.manifest.checks.push_back(check_le("wave-value-continuity", wave_value_jump, kExactTol));
  out.manifest.checks.push_back(
      check_le("wave-derivative-jump-identity", wave_deriv_defect, kExactTol));
  add_metric(out.manifest, "n_jumps", static_cast<double>(path.jump_times.size()));
  add_metric(out.manifest, "heat_jump_defect", heat_defect);
  add_metric(out.manifest, "wave_value_jump", wave_value_jump);
  add_metric(out.manifest, "wave_deriv_defect", wave_deriv_defect);
  return out;
}

// --- solve commands ---------------------------------------------------------------

void add_solution_tables(RunResult& out, const ExperimentConfig& cfg, const SolutionPath& sol,
                         bool wave) {
  ResultTable t{"solution", {"t", "monitored", "recorded", "picard_iterations"}, {}};
  for (std::size_t i = 0; i < sol.times.size(); ++i) {
    int pic = i == 0 ? 0 : sol.picard_iterations[i - 1];
    t.rows.push_back(row({fmt17(sol.times[i]), fmt17(sol.monitored[i]), fmt17(sol.recorded[i]),
                          std::to_string(pic)}));
  }
  out.tables.push_back(std::move(t));

  if (!cfg.emit_fields || sol.times.empty()) return;
  ResultTable f{"fields", {}, {}};
  f.columns = wave ? std::vector<std::string>{"t", "l1", "l2", "re_v", "im_v", "re_vdot",
                                              "im_vdot"}
                   : std::vector<std::string>{"t", "l1", "l2", "re", "im"};
  std::size_t last_emitted = static_cast<std::size_t>(-1);
  for (int j = 0; j <= cfg.time_cells; ++j) {
    double target = cfg.horizon * j / cfg.time_cells;
    auto it = std::upper_bound(sol.times.begin(), sol.times.end(), target + 1e-12);
    std::size_t idx = it == sol.times.begin()
                          ? 0
                          : static_cast<std::size_t>(it - sol.times.begin()) - 1;
    if (idx == last_emitted) continue;
    last_emitted = idx;
    const SpectralField& v = sol.v[idx];
    for (std::size_t m = 0; m < v.modes->size(); ++m) {
      const Mode& md = (*v.modes)[m];
      if (wave) {
        const SpectralField& w = sol.vdot[idx];
        f.rows.push_back(row({fmt17(sol.times[idx]), std::to_string(md.l1),
                              std::to_string(md.l2), fmt17(v.a[m].real()), fmt17(v.a[m].imag()),
                              fmt17(w.a[m].real()), fmt17(w.a[m].imag())}));
      } else {
        f.rows.push_back(row({fmt17(sol.times[idx]), std::to_string(md.l1),
                              std::to_string(md.l2), fmt17(v.a[m].real()),
                              fmt17(v.a[m].imag())}));
      }
    }
  }
  out.tables.push_back(std::move(f));
}

void add_solution_summary(RunResult& out, const ExperimentConfig& cfg, const SolutionPath& sol,
                          double residual) {
  out.manifest.checks.push_back(
      check_le("completed-without-blowup", sol.blew_up ? 1.0 : 0.0, 0.0));
  out.manifest.checks.push_back(check_le("mild-residual", residual, cfg.residual_tol));
  double max_mon = 0.0, max_rec = 0.0;
  long long total_picard = 0;
  for (double x : sol.monitored) max_mon = std::max(max_mon, x);
  for (double x : sol.recorded) max_rec = std::max(max_rec, x);
  for (int p : sol.picard_iterations) total_picard += p;
  add_metric(out.manifest, "exit_time", sol.blew_up ? sol.exit_time : cfg.horizon);
  add_metric(out.manifest, "max_monitored", max_mon);
  add_metric(out.manifest, "max_recorded", max_rec);
  add_metric(out.manifest, "final_monitored",
             sol.monitored.empty() ? 0.0 : sol.monitored.back());
  add_metric(out.manifest, "mild_residual", residual);
  add_metric(out.manifest, "output_steps", static_cast<double>(sol.times.size()));
  add_metric(out.manifest, "total_picard_iterations", static_cast<double>(total_picard));
}

RunResult run_solve_heat(const ExperimentConfig& cfg) {
  RunResult out;
  SubordinatorPath path =
      sample_subordinator(cfg.spec, cfg.horizon, stream_key(cfg, kRolePath, 0));
  std::vector<double> grid = noise_grid(path, cfg.horizon, cfg.time_cells);
  ModeNoise noise = sample_mode_noise(path, cfg.cutoff, grid, stream_key(cfg, kRoleNoise, 0));
  StochasticConvolution conv = heat_convolution(noise, grid);
  RenormConstants cons = renorm_constants(ConvolutionKind::heat, path, cfg.cutoff, grid);
  WickPower phi = wick_power(conv, cons, 1);
  WickPower phi2 = wick_power(conv, cons, 2);
  SolveConfig scfg = make_solve(cfg);
  SolutionPath sol = solve_heat_quadratic(phi, phi2, scfg);
  double residual = sol.blew_up ? kInf : mild_residual(sol, phi, phi2, scfg);
  add_solution_summary(out, cfg, sol, residual);
  add_solution_tables(out, cfg, sol, false);
  return out;
}

RunResult run_solve_wave(const ExperimentConfig& cfg) {
  RunResult out;
  SubordinatorPath path =
      sample_subordinator(cfg.spec, cfg.horizon, stream_key(cfg, kRolePath, 0));
  std::vector<double> grid = noise_grid(path, cfg.horizon, cfg.time_cells);
  ModeNoise noise = sample_mode_noise(path, cfg.cutoff, grid, stream_key(cfg, kRoleNoise, 0));
  StochasticConvolution conv = wave_convolution(noise, grid);
  RenormConstants cons = renorm_constants(ConvolutionKind::wave, path, cfg.cutoff, grid);
  std::vector<WickPower> psi;
  for (int l = 0; l <= cfg.order; ++l) psi.push_back(wick_power(conv, cons, l));
  SolveConfig scfg = make_solve(cfg);
  SolutionPath sol = solve_wave_polynomial(psi, scfg);
  double residual = sol.blew_up ? kInf : mild_residual(sol, psi, scfg);
  add_solution_summary(out, cfg, sol, residual);
  add_solution_tables(out, cfg, sol, true);
  return out;
}

// --- stationary-check ---------------------------------------------------------------
RunResult run_stationary_check(const ExperimentConfig& cfg) {
  RunResult out;
  std::vector<double> tg = {0.0, cfg.time_s, cfg.time_t, cfg.horizon};
  std::sort(tg.begin(), tg.end());
  tg.erase(std::unique(tg.begin(), tg.end()), tg.end());

  const std::size_t n = cfg.ensemble;
  std::vector<double> ms(n), mt(n), bias(n);
  parallel_for(n, cfg.workers, [&](std::size_t i) {
    StationaryConvolution sc = stationary_convolution(cfg.kind, cfg.spec, cfg.cutoff, tg,
                                                      cfg.t_past,
                                                      stream_key(cfg, kRoleStationary, i));
    std::size_t is = sc.convolution.index_of(cfg.time_s);
    std::size_t it = sc.convolution.index_of(cfg.time_t);
    double s2 = lp_norm(sc.convolution.value[is], 2.0);
    double t2 = lp_norm(sc.convolution.value[it], 2.0);
    ms[i] = s2 * s2;
    mt[i] = t2 * t2;
    bias[i] = sc.truncation_bias;
  });

  std::vector<double> diff(n);
  for (std::size_t i = 0; i < n; ++i) diff[i] = ms[i] - mt[i];
  MeanSE a = mean_se(ms), b = mean_se(mt), d = mean_se(diff);
  double limit = stationary_renorm_limit(cfg.cutoff);
  double m1 = cfg.spec.mean_mass_rate();

  out.manifest.checks.push_back(
      check_le("second-moment-time-invariance", std::fabs(d.mean), 4.0 * d.se));
  if (std::isfinite(m1))
    out.manifest.checks.push_back(check_le("second-moment-level",
                                           std::fabs(a.mean - m1 * limit),
                                           4.0 * a.se + bias[0]));
  add_metric(out.manifest, "moment_s_mean", a.mean);
  add_metric(out.manifest, "moment_s_se", a.se);
  add_metric(out.manifest, "moment_t_mean", b.mean);
  add_metric(out.manifest, "moment_t_se", b.se);
  add_metric(out.manifest, "moment_diff_mean", d.mean);
  add_metric(out.manifest, "moment_diff_se", d.se);
  add_metric(out.manifest, "stationary_limit_unit_rate", limit);
  add_metric(out.manifest, "mean_mass_rate", m1);
  add_metric(out.manifest, "truncation_bias", bias[0]);

  ResultTable t{"moments", {"sample", "m_s", "m_t"}, {}};
  for (std::size_t i = 0; i < n; ++i)
    t.rows.push_back(row({std::to_string(i), fmt17(ms[i]), fmt17(mt[i])}));
  out.tables.push_back(std::move(t));
  return out;
}

// --- report emission -----------------------------------------------------------------

std::string csv_escape(const std::string& cell) {
  if (cell.find_first_of(",\"\r\n") == std::string::npos) return cell;
  std::string out = "\"";
  for (char c : cell) {
    if (c == '"') out += "\"\"";
    else out += c;
  }
  out += "\"";
  return out;
}

void write_csv(const std::string& path, const ResultTable& t) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("i/o error: cannot write '" + path + "'");
  for (std::size_t i = 0; i < t.columns.size(); ++i)
    f << (i ? "," : "") << csv_escape(t.columns[i]);
  f << "\r\n";
  for (const auto& r : t.rows) {
    for (std::size_t i = 0; i < r.size(); ++i) f << (i ? "," : "") << csv_escape(r[i]);
    f << "\r\n";
  }
  if (!f) throw std::runtime_error("i/o error: cannot write '" + path + "'");
}

ojson json_number(double x) {
  if (std::isfinite(x)) return x;
  if (std::isnan(x)) return "nan";
  return x > 0 ? "inf" : "-inf";
}

ojson checks_json(const std::vector<Check>& checks) {
  ojson arr = ojson::array();
  for (const Check& c : checks) {
    ojson j;
    j["name"] = c.name;
    j["value"] = json_number(c.value);
    j["bound"] = json_number(c.bound);
    j["pass"] = c.pass;
    arr.push_back(std::move(j));
  }
  return arr;
}

ojson metrics_json(const std::vector<Metric>& metrics) {
  ojson obj = ojson::object();
  for (const Metric& m : metrics) obj[m.name] = json_number(m.value);
  return obj;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("i/o error: cannot write '" + path + "'");
  f << text;
  if (!f) throw std::runtime_error("i/o error: cannot write '" + path + "'");
}

}  // namespace

RunResult run_experiment(const ExperimentConfig& cfg) {
  auto t0 = std::chrono::steady_clock::now();
  RunResult out;
  switch (cfg.command) {
    case Command::isometry: out = run_isometry(cfg); break;
    case Command::covariance: out = run_covariance(cfg); break;
    case Command::wick_convergence: out = run_wick_convergence(cfg); break;
    case Command::renorm_divergence: out = run_renorm_divergence(cfg); break;
    case Command::jump_continuity: out = run_jump_continuity(cfg); break;
    case Command::solve_heat: out = run_solve_heat(cfg); break;
    case Command::solve_wave: out = run_solve_wave(cfg); break;
    case Command::stationary_check: out = run_stationary_check(cfg); break;
  }
  out.manifest.config = cfg;
  out.manifest.version = kVersionTag;
  out.manifest.pass = true;
  for (const Check& c : out.manifest.checks) out.manifest.pass = out.manifest.pass && c.pass;
  out.manifest.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

void ensure_writable_dir(const std::string& dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  fs::path probe = fs::path(dir) / ".write-probe";
  {
    std::ofstream f(probe, std::ios::binary | std::ios::trunc);
    f << "probe";
    f.flush();
    if (!f) {
      throw std::runtime_error("i/o error: output directory '" + dir + "' is not writable");
    }
  }
  fs::remove(probe, ec);
}

std::vector<std::string> emit_report(const RunResult& result) {
  const ExperimentConfig& cfg = result.manifest.config;
  ensure_writable_dir(cfg.out_dir);
  namespace fs = std::filesystem;
  std::vector<std::string> written;

  ojson summary;
  summary["command"] = command_name(cfg.command);
  summary["seed"] = cfg.seed;
  summary["pass"] = result.manifest.pass;
  summary["checks"] = checks_json(result.manifest.checks);
  summary["metrics"] = metrics_json(result.manifest.metrics);
  ojson tables = ojson::object();
  for (const ResultTable& t : result.tables) {
    ojson entry;
    entry["file"] = t.name + ".csv";
    entry["rows"] = t.rows.size();
    tables[t.name] = std::move(entry);
  }
  summary["tables"] = std::move(tables);
  std::string summary_path = (fs::path(cfg.out_dir) / "summary.json").string();
  write_text(summary_path, summary.dump(2) + "\n");
  written.push_back(summary_path);

  for (const ResultTable& t : result.tables) {
    std::string p = (fs::path(cfg.out_dir) / (t.name + ".csv")).string();
    write_csv(p, t);
    written.push_back(p);
  }

  ojson manifest;
  manifest["version"] = result.manifest.version;
  manifest["command"] = command_name(cfg.command);
  manifest["seed"] = cfg.seed;
  manifest["workers"] = cfg.workers;
  manifest["wall_seconds"] = result.manifest.wall_seconds;
  manifest["pass"] = result.manifest.pass;
  manifest["checks"] = checks_json(result.manifest.checks);
  manifest["metrics"] = metrics_json(result.manifest.metrics);
  manifest["config"] = emit_config(cfg);
  std::string manifest_path = (fs::path(cfg.out_dir) / "manifest.json").string();
  write_text(manifest_path, manifest.dump(2) + "\n");
  written.push_back(manifest_path);
  return written;
}

}  // namespace wickspde
