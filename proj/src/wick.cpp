#include "wickspde/wick.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <utility>

#include "wickspde/pathint.hpp"
#include "wickspde/rng.hpp"
#include "wickspde/util.hpp"

namespace wickspde {
namespace {

constexpr std::uint64_t kTagStudyPath = 0x70617468ULL;   // "path"
constexpr std::uint64_t kTagStudyNoise = 0x6e6f6973ULL;  // "nois"
constexpr std::uint64_t kTagCovariance = 0x636f7661ULL;  // "cova"

std::size_t wick_index_of(const std::vector<double>& times, double t) {
  auto it = std::lower_bound(times.begin(), times.end(), t);
  if (it == times.end() || *it != t)
    throw std::out_of_range("wick power: time is not a stored grid point");
  return static_cast<std::size_t>(it - times.begin());
}

// Difference of two band-limited fields embedded into the larger ball.
SpectralField embedded_difference(const SpectralField& a, const SpectralField& b) {
  int cutoff = std::max(a.cutoff, b.cutoff);
  SpectralField out = SpectralField::zero(cutoff);
  for (std::size_t i = 0; i < a.modes->size(); ++i) {
    const Mode& m = (*a.modes)[i];
    out.a[out.modes->index_of(m.l1, m.l2)] += a.a[i];
  }
  for (std::size_t i = 0; i < b.modes->size(); ++i) {
    const Mode& m = (*b.modes)[i];
    out.a[out.modes->index_of(m.l1, m.l2)] -= b.a[i];
  }
  return out;
}

// Sorted union of a uniform grid on [0, horizon] and the path's jump times.
std::vector<double> study_grid(const SubordinatorPath& path, double horizon,
                               int cells) {
  std::vector<double> grid;
  grid.reserve(static_cast<std::size_t>(cells) + path.jump_times.size() + 1);
  for (int i = 0; i <= cells; ++i)
    grid.push_back(horizon * static_cast<double>(i) / cells);
  for (double s : path.jump_times)
    if (s <= horizon) grid.push_back(s);
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  return grid;
}

double time_norm(const std::vector<double>& times, const std::vector<double>& right_norms,
                 const std::vector<double>& left_norms, const StudyNorm& norm) {
  if (norm.sup_time) {
    double s = 0.0;
    for (double v : right_norms) s = std::max(s, v);
    return s;
  }
  // Each cell (t_i, t_{i+1}] is represented by the left limit at its right
  // endpoint. Evaluating the right-continuous value at a jump time instead
  // would weight the instantaneous (measure-zero, unsmoothed) post-jump spike
  // by a whole cell, and that spike grows with the cutoff.
  double integral = 0.0;
  for (std::size_t i = 0; i + 1 < times.size(); ++i)
    integral += (times[i + 1] - times[i]) * std::pow(left_norms[i + 1], norm.gamma);
  return norm.gamma < 1.0 ? integral : std::pow(integral, 1.0 / norm.gamma);
}

}  // namespace

double hermite(int k, double x, double s2) {
  if (k < 0) throw std::invalid_argument("hermite: order must be nonnegative");
  if (s2 < 0.0) throw std::invalid_argument("hermite: variance must be nonnegative");
  double hkm1 = 1.0, hk = x;
  if (k == 0) return 1.0;
  for (int j = 1; j < k; ++j) {
    double next = x * hk - static_cast<double>(j) * s2 * hkm1;
    hkm1 = hk;
    hk = next;
  }
  return hk;
}

std::vector<double> hermite_all(int k, double x, double s2) {
  if (k < 0) throw std::invalid_argument("hermite: order must be nonnegative");
  if (s2 < 0.0) throw std::invalid_argument("hermite: variance must be nonnegative");
  std::vector<double> h(static_cast<std::size_t>(k) + 1);
  h[0] = 1.0;
  if (k >= 1) h[1] = x;
  for (int j = 1; j < k; ++j)
    h[static_cast<std::size_t>(j) + 1] =
        x * h[static_cast<std::size_t>(j)] -
        static_cast<double>(j) * s2 * h[static_cast<std::size_t>(j) - 1];
  return h;
}

std::size_t WickPower::index_of(double t) const { return wick_index_of(times, t); }

WickPower wick_power(const StochasticConvolution& conv,
                     const RenormConstants& constants, int order) {
  if (order < 0)
    throw std::invalid_argument("wick power: order must be nonnegative");
  if (conv.kind != constants.kind)
    throw std::invalid_argument(
        "pairing error: convolution and constants have different kinds");
  if (conv.cutoff != constants.cutoff)
    throw std::invalid_argument(
        "pairing error: convolution and constants have different cutoffs");
  if (conv.times != constants.times)
    throw std::invalid_argument(
        "pairing error: convolution and constants are on different time grids");

  WickPower out;
  out.kind = conv.kind;
  out.order = order;
  out.cutoff = conv.cutoff;
  out.times = conv.times;
  out.constants = constants;
  out.value.reserve(conv.times.size());
  out.value_left.reserve(conv.times.size());

  if (order == 0) {
    SpectralField one = SpectralField::constant(1.0);
    for (std::size_t i = 0; i < conv.times.size(); ++i) {
      out.value.push_back(one);
      out.value_left.push_back(one);
    }
    return out;
  }
  if (order == 1) {  // identity map: keep the coefficients exactly
    out.value = conv.value;
    out.value_left = conv.value_left;
    return out;
  }
  int out_cutoff = order * conv.cutoff;
  for (std::size_t i = 0; i < conv.times.size(); ++i) {
    double c = constants.value[i];
    double cl = constants.value_left[i];
    out.value.push_back(pointwise_map(
        conv.value[i], [order, c](double v) { return hermite(order, v, c); },
        out_cutoff, order));
    out.value_left.push_back(pointwise_map(
        conv.value_left[i],
        [order, cl](double v) { return hermite(order, v, cl); }, out_cutoff,
        order));
  }
  return out;
}

CovarianceDiagnostic covariance_diagnostic(
    ConvolutionKind kind, const SubordinatorPath& path, int cutoff, int order_k,
    int order_m, double s, std::array<double, 2> x, double t,
    std::array<double, 2> y, std::size_t ensemble, std::uint64_t seed,
    int workers) {
  if (ensemble < 100)
    throw std::invalid_argument(
        "covariance diagnostic: ensemble must be at least 100");
  if (order_k < 1 || order_m < 1)
    throw std::invalid_argument("covariance diagnostic: orders must be >= 1");
  if (kind != ConvolutionKind::heat && kind != ConvolutionKind::wave)
    throw std::invalid_argument(
        "covariance diagnostic: kind must be heat or wave");
  path.validate();
  if (s < 0.0 || s > path.horizon || t < 0.0 || t > path.horizon)
    throw std::invalid_argument(
        "covariance diagnostic: evaluation times must lie in [0, horizon]");

  std::vector<double> emit{s};
  if (t != s) emit.push_back(t);
  std::sort(emit.begin(), emit.end());
  std::vector<double> grid{0.0, path.horizon};
  grid.insert(grid.end(), emit.begin(), emit.end());
  grid.insert(grid.end(), path.jump_times.begin(), path.jump_times.end());
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

  RenormConstants constants =
      renorm_constants(kind, path, cutoff, emit);
  double cs = constants.value[constants.index_of(s)];
  double ct = constants.value[constants.index_of(t)];

  std::vector<double> prod(ensemble), base(ensemble);
  parallel_for(ensemble, workers, [&](std::size_t i) {
    ModeNoise noise = sample_mode_noise(
        path, cutoff, grid, mix_key({seed, kTagCovariance, i}));
    StochasticConvolution conv = kind == ConvolutionKind::heat
                                     ? heat_convolution(noise, emit)
                                     : wave_convolution(noise, emit);
    double xs = conv.value[conv.index_of(s)].value_at(x[0], x[1]);
    double xt = conv.value[conv.index_of(t)].value_at(y[0], y[1]);
    prod[i] = hermite(order_k, xs, cs) * hermite(order_m, xt, ct);
    base[i] = xs * xt;
  });

  CovarianceDiagnostic out;
  out.order_k = order_k;
  out.order_m = order_m;
  out.ensemble = ensemble;
  MeanSE mp = mean_se(prod);
  MeanSE mb = mean_se(base);
  out.mc_value = mp.mean;
  out.mc_se = mp.se;
  out.base_cov = mb.mean;
  out.base_cov_se = mb.se;
  if (order_k == order_m) {
    double fact = 1.0;
    for (int j = 2; j <= order_k; ++j) fact *= j;
    out.predicted = fact * std::pow(mb.mean, order_k);
    out.predicted_se =
        std::abs(fact * order_k * std::pow(mb.mean, order_k - 1)) * mb.se;
  }
  return out;
}

void check_study_constraints(const StudyConfig& config) {
  if (config.kind != ConvolutionKind::heat && config.kind != ConvolutionKind::wave)
    throw std::invalid_argument(
        "constraint error: convergence studies support heat and wave kinds");
  if (config.order < 1)
    throw std::invalid_argument("constraint error: order k >= 1 required");
  if (config.cutoffs.empty())
    throw std::invalid_argument("constraint error: at least one cutoff required");
  for (std::size_t i = 0; i < config.cutoffs.size(); ++i) {
    if (config.cutoffs[i] < 1)
      throw std::invalid_argument("constraint error: cutoffs must be >= 1");
    if (i > 0 && config.cutoffs[i] <= config.cutoffs[i - 1])
      throw std::invalid_argument(
          "constraint error: cutoffs must be strictly increasing");
  }
  if (!(config.horizon > 0.0))
    throw std::invalid_argument("constraint error: horizon must be positive");
  if (config.time_cells < 1)
    throw std::invalid_argument("constraint error: need at least one time cell");

  const StudyNorm& n = config.norm;
  double k = static_cast<double>(config.order);
  if (config.kind == ConvolutionKind::heat) {
    if (n.sup_time)
      throw std::invalid_argument(
          "constraint error: heat-kind studies require an L^gamma time norm "
          "(sup-in-time is not integrable for the heat convolution)");
    if (!(n.epsilon > 0.0 && n.epsilon < 1.0)) {
      std::ostringstream os;
      os << "constraint error: 0 < epsilon < 1 violated (epsilon = " << n.epsilon
         << ")";
      throw std::invalid_argument(os.str());
    }
    if (!(n.alpha < -n.epsilon * k)) {
      std::ostringstream os;
      os << "constraint error: alpha < -epsilon*k violated (alpha = " << n.alpha
         << ", -epsilon*k = " << -n.epsilon * k << ")";
      throw std::invalid_argument(os.str());
    }
    if (!(n.gamma > 0.0 && n.gamma < 2.0 / ((1.0 - n.epsilon) * k))) {
      std::ostringstream os;
      os << "constraint error: gamma < 2/((1-epsilon)*k) violated (gamma = "
         << n.gamma << ", bound = " << 2.0 / ((1.0 - n.epsilon) * k) << ")";
      throw std::invalid_argument(os.str());
    }
  } else {
    if (!(n.alpha < 0.0)) {
      std::ostringstream os;
      os << "constraint error: alpha < 0 violated (alpha = " << n.alpha << ")";
      throw std::invalid_argument(os.str());
    }
    if (!n.sup_time && !(n.gamma > 0.0))
      throw std::invalid_argument(
          "constraint error: gamma must be positive for L^gamma time norms");
  }
}

ConvergenceReport cauchy_convergence_study(const StudyConfig& config) {
  check_study_constraints(config);
  config.spec.validate();

  ConvergenceReport report;
  report.config = config;
  report.cutoffs = config.cutoffs;
  report.norms.assign(config.cutoffs.size(),
                      std::vector<double>(config.ensemble, 0.0));

  int max_cutoff = config.cutoffs.back();
  parallel_for(config.ensemble, config.workers, [&](std::size_t sample) {
    SubordinatorPath path = sample_subordinator(
        config.spec, config.horizon, mix_key({config.seed, kTagStudyPath, sample}));
    std::vector<double> grid = study_grid(path, config.horizon, config.time_cells);
    ModeNoise noise =
        sample_mode_noise(path, 2 * max_cutoff, grid,
                          mix_key({config.seed, kTagStudyNoise, sample}));

    for (std::size_t ci = 0; ci < config.cutoffs.size(); ++ci) {
      int n = config.cutoffs[ci];
      ModeNoise noise_n = noise.restricted(n);
      ModeNoise noise_2n = noise.restricted(2 * n);
      RenormConstants const_n =
          renorm_constants(config.kind, path, n, grid);
      RenormConstants const_2n =
          renorm_constants(config.kind, path, 2 * n, grid);
      StochasticConvolution conv_n, conv_2n;
      if (config.kind == ConvolutionKind::heat) {
        conv_n = heat_convolution(noise_n, grid);
        conv_2n = heat_convolution(noise_2n, grid);
      } else {
        conv_n = wave_convolution(noise_n, grid);
        conv_2n = wave_convolution(noise_2n, grid);
      }
      WickPower wick_n = wick_power(conv_n, const_n, config.order);
      WickPower wick_2n = wick_power(conv_2n, const_2n, config.order);

      std::vector<double> right_norms(grid.size()), left_norms(grid.size());
      for (std::size_t i = 0; i < grid.size(); ++i) {
        SpectralField diff =
            embedded_difference(wick_2n.value[i], wick_n.value[i]);
        right_norms[i] =
            besov_norm(diff, config.norm.alpha, config.norm.p, config.norm.q);
        if (config.norm.sup_time) continue;  // the integral rule never reads right values
        SpectralField dleft =
            embedded_difference(wick_2n.value_left[i], wick_n.value_left[i]);
        left_norms[i] =
            besov_norm(dleft, config.norm.alpha, config.norm.p, config.norm.q);
      }
      report.norms[ci][sample] = time_norm(grid, right_norms, left_norms, config.norm);
    }
  });

  report.mean.resize(config.cutoffs.size());
  report.se.resize(config.cutoffs.size());
  std::vector<double> logn, logmean;
  for (std::size_t ci = 0; ci < config.cutoffs.size(); ++ci) {
    MeanSE m = mean_se(report.norms[ci]);
    report.mean[ci] = m.mean;
    report.se[ci] = m.se;
    if (m.mean > 0.0) {
      logn.push_back(std::log(static_cast<double>(config.cutoffs[ci])));
      logmean.push_back(std::log(m.mean));
    }
  }
  report.slope = logn.size() >= 2 ? ls_slope(logn, logmean) : 0.0;
  return report;
}

}  // namespace wickspde
