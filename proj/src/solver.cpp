#include "wickspde/solver.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <utility>

#include "wickspde/fft.hpp"

namespace wickspde {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// --- cadlag step lookups into gridded forcing data ---------------------------

std::size_t floor_index(const std::vector<double>& times, double s) {
  auto it = std::upper_bound(times.begin(), times.end(), s);
  if (it == times.begin())
    throw std::invalid_argument(
        "grid error: forcing data does not cover the requested time");
  return static_cast<std::size_t>(it - times.begin()) - 1;
}

// Value governing the open interval to the right of s (right limit).
const SpectralField& data_right(const WickPower& w, double s) {
  return w.value[floor_index(w.times, s)];
}

// Left limit at s: stored left value on an exact grid hit, otherwise the step
// value from the grid point below.
const SpectralField& data_left(const WickPower& w, double s) {
  std::size_t i = floor_index(w.times, s);
  return w.times[i] == s ? w.value_left[i] : w.value[i];
}

const SpectralField& data_at(const WickPower& w, double s, Side side) {
  return side == Side::right ? data_right(w, s) : data_left(w, s);
}

// --- small stable one-step integrals -----------------------------------------

double etd_phi1(double z) {
  if (z == 0.0) return 1.0;
  return std::expm1(z) / z;
}

double etd_phi2(double z) {
  if (std::abs(z) < 1e-3) return 0.5 + z / 6.0 + z * z / 24.0;
  return (std::expm1(z) - z) / (z * z);
}

// int_0^d sin(w v)/w dv, int_0^d v sin(w v)/w dv, int_0^d cos(w v) dv,
// int_0^d v cos(w v) dv — with small-angle series.
struct WaveWeights {
  double s1, s2, c1, c2;
};

WaveWeights wave_weights(double om, double d) {
  WaveWeights w;
  double u = om * d;
  if (om == 0.0) {
    w.s1 = 0.5 * d * d;
    w.s2 = d * d * d / 3.0;
    w.c1 = d;
    w.c2 = 0.5 * d * d;
    return w;
  }
  double si = std::sin(u), co = std::cos(u);
  double hs = std::sin(0.5 * u);
  w.s1 = 2.0 * hs * hs / (om * om);
  w.c1 = si / om;
  if (std::abs(u) < 1e-2) {
    double u2 = u * u;
    w.s2 = d * d * d * (1.0 / 3.0 - u2 / 30.0 + u2 * u2 / 840.0);
    w.c2 = d * d * (0.5 - u2 / 8.0 + u2 * u2 / 144.0);
  } else {
    w.s2 = (si - u * co) / (om * om * om);
    w.c2 = (co + u * si - 1.0) / (om * om);
  }
  return w;
}

double l2_of(const std::vector<std::complex<double>>& a) {
  double s = 0.0;
  for (const auto& z : a) s += std::norm(z);
  return std::sqrt(s);
}

SpectralField embed_field(const SpectralField& f, int cutoff) {
  if (f.cutoff == cutoff && f.modes) return f;
  SpectralField out = SpectralField::zero(cutoff);
  if (f.modes) out += f;
  return out;
}

// --- grid-space forcing evaluators -------------------------------------------
// The forcing data grids are synthesized once per (time, side) node; each
// Picard iterate then only synthesizes v and analyzes the combination.

class HeatForcing {
 public:
  HeatForcing(const WickPower& phi, const WickPower& phi2, const SolveConfig& cfg)
      : phi_(&phi), phi2_(&phi2), sign_(cfg.sign), nonlinear_(cfg.nonlinear),
        M_(cfg.cutoff) {
    G_ = FftGrid::fast_size(3 * M_ + 2);
  }

  SpectralField eval(const SpectralField& v, double s, Side side) {
    if (!nonlinear_) {
      SpectralField out = embed_field(data_at(*phi2_, s, side), M_);
      out *= sign_;
      return out;
    }
    cache_node(s, side);
    FftGrid& grid = FftGrid::shared(G_);
    fft_detail::synthesize(embed_field(v, M_), grid);
    double* re = grid.real_buf();
    std::size_t n = static_cast<std::size_t>(G_) * G_;
    for (std::size_t i = 0; i < n; ++i)
      re[i] = sign_ * (re[i] * re[i] + 2.0 * re[i] * phi_vals_[i] + phi2_vals_[i]);
    SpectralField out = SpectralField::zero(M_);
    fft_detail::analyze(grid, out);
    return out;
  }

 private:
  void cache_node(double s, Side side) {
    if (have_cache_ && s == cache_s_ && side == cache_side_) return;
    FftGrid& grid = FftGrid::shared(G_);
    std::size_t n = static_cast<std::size_t>(G_) * G_;
    phi_vals_.resize(n);
    phi2_vals_.resize(n);
    fft_detail::synthesize(data_at(*phi_, s, side), grid);
    std::copy(grid.real_buf(), grid.real_buf() + n, phi_vals_.begin());
    fft_detail::synthesize(data_at(*phi2_, s, side), grid);
    std::copy(grid.real_buf(), grid.real_buf() + n, phi2_vals_.begin());
    have_cache_ = true;
    cache_s_ = s;
    cache_side_ = side;
  }

  const WickPower* phi_;
  const WickPower* phi2_;
  double sign_;
  bool nonlinear_;
  int M_;
  int G_ = 0;
  std::vector<double> phi_vals_, phi2_vals_;
  bool have_cache_ = false;
  double cache_s_ = 0.0;
  Side cache_side_ = Side::right;
};

class WaveForcing {
 public:
  WaveForcing(const std::vector<WickPower>& psi, const SolveConfig& cfg)
      : psi_(&psi), sign_(cfg.sign), nonlinear_(cfg.nonlinear), M_(cfg.cutoff),
        k_(cfg.order) {
    G_ = FftGrid::fast_size((k_ + 1) * M_ + 2);
    binom_.assign(static_cast<std::size_t>(k_) + 1, 1.0);
    for (int l = 1; l <= k_; ++l)
      binom_[static_cast<std::size_t>(l)] =
          binom_[static_cast<std::size_t>(l) - 1] *
          static_cast<double>(k_ - l + 1) / static_cast<double>(l);
  }

  SpectralField eval(const SpectralField& v, double s, Side side) {
    if (!nonlinear_) {
      SpectralField out =
          embed_field(data_at((*psi_)[static_cast<std::size_t>(k_)], s, side), M_);
      out *= sign_;
      return out;
    }
    cache_node(s, side);
    FftGrid& grid = FftGrid::shared(G_);
    fft_detail::synthesize(embed_field(v, M_), grid);
    double* re = grid.real_buf();
    std::size_t n = static_cast<std::size_t>(G_) * G_;
    for (std::size_t i = 0; i < n; ++i) {
      double vv = re[i];
      double p = 1.0;  // v^{k-l}, built up from l = k downwards
      double acc = 0.0;
      for (int l = k_; l >= 0; --l) {
        acc += binom_[static_cast<std::size_t>(l)] *
               psi_vals_[static_cast<std::size_t>(l)][i] * p;
        p *= vv;
      }
      re[i] = sign_ * acc;
    }
    SpectralField out = SpectralField::zero(M_);
    fft_detail::analyze(grid, out);
    return out;
  }

 private:
  void cache_node(double s, Side side) {
    if (have_cache_ && s == cache_s_ && side == cache_side_) return;
    FftGrid& grid = FftGrid::shared(G_);
    std::size_t n = static_cast<std::size_t>(G_) * G_;
    psi_vals_.resize(static_cast<std::size_t>(k_) + 1);
    for (int l = 0; l <= k_; ++l) {
      auto& buf = psi_vals_[static_cast<std::size_t>(l)];
      buf.resize(n);
      fft_detail::synthesize(data_at((*psi_)[static_cast<std::size_t>(l)], s, side),
                             grid);
      std::copy(grid.real_buf(), grid.real_buf() + n, buf.begin());
    }
    have_cache_ = true;
    cache_s_ = s;
    cache_side_ = side;
  }

  const std::vector<WickPower>* psi_;
  double sign_;
  bool nonlinear_;
  int M_;
  int k_;
  int G_ = 0;
  std::vector<double> binom_;
  std::vector<std::vector<double>> psi_vals_;
  bool have_cache_ = false;
  double cache_s_ = 0.0;
  Side cache_side_ = Side::right;
};

// --- config validation --------------------------------------------------------

void validate_common(const SolveConfig& cfg) {
  if (cfg.sign != 1.0 && cfg.sign != -1.0)
    throw std::invalid_argument("solver config: sign must be +1 or -1");
  if (!(cfg.dt > 0.0)) throw std::invalid_argument("solver config: dt must be positive");
  if (!(cfg.horizon > 0.0))
    throw std::invalid_argument("solver config: horizon must be positive");
  if (!(cfg.blowup_radius > 0.0))
    throw std::invalid_argument("solver config: blow-up radius must be positive");
  if (!(cfg.picard_tol > 0.0))
    throw std::invalid_argument("solver config: Picard tolerance must be positive");
  if (cfg.picard_max < 1)
    throw std::invalid_argument("solver config: at least one Picard iteration");
  if (cfg.max_halvings < 0)
    throw std::invalid_argument("solver config: max halvings must be >= 0");
  if (cfg.cutoff < 1)
    throw std::invalid_argument("solver config: solver cutoff must be >= 1");
  if (cfg.u0.modes && cfg.u0.cutoff > cfg.cutoff)
    throw std::invalid_argument(
        "solver config: initial data band exceeds the solver cutoff");
}

std::vector<double> output_times(const SolveConfig& cfg) {
  std::vector<double> ts;
  double t = 0.0;
  for (std::size_t i = 0; t < cfg.horizon * (1.0 - 1e-12); ++i) {
    ts.push_back(t);
    t = cfg.dt * static_cast<double>(i + 1);
  }
  ts.push_back(cfg.horizon);
  return ts;
}

[[noreturn]] void picard_failure(double t0, double t1) {
  std::ostringstream os;
  os << "solver: Picard iteration failed to converge on (" << t0 << ", " << t1
     << ") after the configured number of step halvings";
  throw std::runtime_error(os.str());
}

}  // namespace

// --- heat ---------------------------------------------------------------------

SolutionPath solve_heat_quadratic(const WickPower& phi, const WickPower& phi2,
                                  const SolveConfig& cfg) {
  if (cfg.order != 2)
    throw std::invalid_argument(
        "heat solver supports order 2 only: higher renormalized powers of the "
        "heat convolution fail to be time-integrable");
  validate_common(cfg);
  if (phi.kind != ConvolutionKind::heat || phi2.kind != ConvolutionKind::heat)
    throw std::invalid_argument("heat solver requires heat-kind forcing data");
  if (phi.order != 1 || phi2.order != 2)
    throw std::invalid_argument(
        "heat solver needs the base field (order 1) and its renormalized "
        "square (order 2)");
  if (phi.cutoff != phi2.cutoff)
    throw std::invalid_argument(
        "heat solver: forcing fields have mismatched base cutoffs");
  if (cfg.cutoff < 2 * phi.cutoff)
    throw std::invalid_argument(
        "solver config: cutoff must be at least order * base cutoff");

  const int M = cfg.cutoff;
  auto modes = ModeSet::shared(M);
  std::vector<double> mu(modes->size());
  for (std::size_t i = 0; i < modes->size(); ++i)
    mu[i] = static_cast<double>((*modes)[i].norm2());

  HeatForcing forcing(phi, phi2, cfg);
  std::vector<double> ts = output_times(cfg);

  SolutionPath path;
  path.wick_kind = phi.kind;
  path.wick_order = 2;
  path.wick_cutoff = phi.cutoff;
  path.cutoff = M;

  SpectralField v = embed_field(cfg.u0.modes ? cfg.u0 : SpectralField::zero(0), M);

  auto gate_norm = [&](const SpectralField& f) {
    return besov_norm(f, -cfg.delta, kInf, kInf);
  };
  auto record_state = [&](double t, const SpectralField& f, int iters) {
    path.times.push_back(t);
    path.v.push_back(f);
    path.monitored.push_back(gate_norm(f));
    path.recorded.push_back(besov_norm(f, 2.0 / cfg.gamma - cfg.delta, kInf, kInf));
    path.picard_iterations.push_back(iters);
  };

  record_state(0.0, v, 0);
  if (path.monitored.back() > cfg.blowup_radius) {
    path.blew_up = true;
    path.exit_time = 0.0;
    return path;
  }

  // One exponential-trapezoidal step with in-step Picard; recursive halving.
  std::function<void(SpectralField&, double, double, int, int&)> advance =
      [&](SpectralField& state, double t0, double t1, int depth, int& iters) {
        double d = t1 - t0;
        SpectralField f0 = forcing.eval(state, t0, Side::right);
        std::vector<double> ez(mu.size()), w0(mu.size()), w1(mu.size());
        for (std::size_t i = 0; i < mu.size(); ++i) {
          double z = -d * mu[i];
          double p1 = etd_phi1(z), p2 = etd_phi2(z);
          ez[i] = std::exp(z);
          w0[i] = d * (p1 - p2);
          w1[i] = d * p2;
        }
        SpectralField guess = SpectralField::zero(M);
        for (std::size_t i = 0; i < mu.size(); ++i)
          guess.a[i] = ez[i] * state.a[i] + (w0[i] + w1[i]) * f0.a[i];
        for (int it = 0; it < cfg.picard_max; ++it) {
          SpectralField f1 = forcing.eval(guess, t1, Side::left);
          SpectralField next = SpectralField::zero(M);
          double diff2 = 0.0;
          for (std::size_t i = 0; i < mu.size(); ++i) {
            next.a[i] = ez[i] * state.a[i] + w0[i] * f0.a[i] + w1[i] * f1.a[i];
            diff2 += std::norm(next.a[i] - guess.a[i]);
          }
          guess = std::move(next);
          ++iters;
          if (std::sqrt(diff2) <= cfg.picard_tol * std::max(1.0, l2_of(guess.a))) {
            state = std::move(guess);
            return;
          }
        }
        if (depth >= cfg.max_halvings) picard_failure(t0, t1);
        double mid = 0.5 * (t0 + t1);
        advance(state, t0, mid, depth + 1, iters);
        advance(state, mid, t1, depth + 1, iters);
      };

  for (std::size_t i = 0; i + 1 < ts.size(); ++i) {
    int iters = 0;
    advance(v, ts[i], ts[i + 1], 0, iters);
    record_state(ts[i + 1], v, iters);
    if (path.monitored.back() > cfg.blowup_radius) {
      path.blew_up = true;
      path.exit_time = ts[i + 1];
      return path;
    }
  }
  return path;
}

// --- wave ---------------------------------------------------------------------

namespace {

void validate_wave_data(const std::vector<WickPower>& psi, const SolveConfig& cfg) {
  if (cfg.order < 2)
    throw std::invalid_argument("wave solver: order must be >= 2");
  if (psi.size() != static_cast<std::size_t>(cfg.order) + 1)
    throw std::invalid_argument(
        "wave solver: need forcing data for every order 0..k");
  for (int l = 0; l <= cfg.order; ++l) {
    const WickPower& w = psi[static_cast<std::size_t>(l)];
    if (w.order != l)
      throw std::invalid_argument(
          "wave solver: forcing data out of order (expected orders 0..k in "
          "sequence)");
    if (w.kind != ConvolutionKind::wave)
      throw std::invalid_argument("wave solver requires wave-kind forcing data");
    if (w.cutoff != psi[0].cutoff)
      throw std::invalid_argument(
          "wave solver: forcing fields have mismatched base cutoffs");
  }
  if (cfg.cutoff < cfg.order * psi[0].cutoff)
    throw std::invalid_argument(
        "solver config: cutoff must be at least order * base cutoff");
  if (cfg.u1.modes && cfg.u1.cutoff > cfg.cutoff)
    throw std::invalid_argument(
        "solver config: initial velocity band exceeds the solver cutoff");
}

}  // namespace

SolutionPath solve_wave_polynomial(const std::vector<WickPower>& psi,
                                   const SolveConfig& cfg) {
  validate_common(cfg);
  validate_wave_data(psi, cfg);

  const int M = cfg.cutoff;
  auto modes = ModeSet::shared(M);
  std::vector<double> om(modes->size());
  for (std::size_t i = 0; i < modes->size(); ++i)
    om[i] = std::sqrt(static_cast<double>((*modes)[i].norm2()));

  WaveForcing forcing(psi, cfg);
  std::vector<double> ts = output_times(cfg);

  SolutionPath path;
  path.wick_kind = ConvolutionKind::wave;
  path.wick_order = cfg.order;
  path.wick_cutoff = psi[0].cutoff;
  path.cutoff = M;

  SpectralField v = embed_field(cfg.u0.modes ? cfg.u0 : SpectralField::zero(0), M);
  SpectralField w = embed_field(cfg.u1.modes ? cfg.u1 : SpectralField::zero(0), M);

  auto record_state = [&](double t, const SpectralField& pv,
                          const SpectralField& pw, int iters) {
    path.times.push_back(t);
    path.v.push_back(pv);
    path.vdot.push_back(pw);
    path.monitored.push_back(sobolev_norm(pv, 1.0 - cfg.epsilon, 2.0));
    path.recorded.push_back(sobolev_norm(pw, -cfg.epsilon, 2.0));
    path.picard_iterations.push_back(iters);
  };
  auto gate = [&]() {
    return std::max(path.monitored.back(), path.recorded.back());
  };

  record_state(0.0, v, w, 0);
  if (gate() > cfg.blowup_radius) {
    path.blew_up = true;
    path.exit_time = 0.0;
    return path;
  }

  std::function<void(SpectralField&, SpectralField&, double, double, int, int&)>
      advance = [&](SpectralField& sv, SpectralField& sw, double t0, double t1,
                    int depth, int& iters) {
        double d = t1 - t0;
        SpectralField f0 = forcing.eval(sv, t0, Side::right);
        std::size_t n = om.size();
        std::vector<double> m11(n), m12(n), m21(n), wp0(n), wp1(n), wv0(n), wv1(n);
        for (std::size_t i = 0; i < n; ++i) {
          double u = om[i] * d;
          if (om[i] == 0.0) {
            m11[i] = 1.0;
            m12[i] = d;
            m21[i] = 0.0;
          } else {
            m11[i] = std::cos(u);
            m12[i] = std::sin(u) / om[i];
            m21[i] = -om[i] * std::sin(u);
          }
          WaveWeights ww = wave_weights(om[i], d);
          wp0[i] = ww.s2 / d;
          wp1[i] = ww.s1 - ww.s2 / d;
          wv0[i] = ww.c2 / d;
          wv1[i] = ww.c1 - ww.c2 / d;
        }
        SpectralField rv = SpectralField::zero(M), rw = SpectralField::zero(M);
        for (std::size_t i = 0; i < n; ++i) {
          rv.a[i] = m11[i] * sv.a[i] + m12[i] * sw.a[i];
          rw.a[i] = m21[i] * sv.a[i] + m11[i] * sw.a[i];
        }
        SpectralField gv = SpectralField::zero(M);
        for (std::size_t i = 0; i < n; ++i)
          gv.a[i] = rv.a[i] + (wp0[i] + wp1[i]) * f0.a[i];
        SpectralField gw;
        for (int it = 0; it < cfg.picard_max; ++it) {
          SpectralField f1 = forcing.eval(gv, t1, Side::left);
          SpectralField nv = SpectralField::zero(M), nw = SpectralField::zero(M);
          double diff2 = 0.0;
          for (std::size_t i = 0; i < n; ++i) {
            nv.a[i] = rv.a[i] + wp0[i] * f0.a[i] + wp1[i] * f1.a[i];
            nw.a[i] = rw.a[i] + wv0[i] * f0.a[i] + wv1[i] * f1.a[i];
            diff2 += std::norm(nv.a[i] - gv.a[i]);
          }
          gv = std::move(nv);
          gw = std::move(nw);
          ++iters;
          if (std::sqrt(diff2) <= cfg.picard_tol * std::max(1.0, l2_of(gv.a))) {
            sv = std::move(gv);
            sw = std::move(gw);
            return;
          }
        }
        if (depth >= cfg.max_halvings) picard_failure(t0, t1);
        double mid = 0.5 * (t0 + t1);
        advance(sv, sw, t0, mid, depth + 1, iters);
        advance(sv, sw, mid, t1, depth + 1, iters);
      };

  for (std::size_t i = 0; i + 1 < ts.size(); ++i) {
    int iters = 0;
    advance(v, w, ts[i], ts[i + 1], 0, iters);
    record_state(ts[i + 1], v, w, iters);
    if (gate() > cfg.blowup_radius) {
      path.blew_up = true;
      path.exit_time = ts[i + 1];
      return path;
    }
  }
  return path;
}

// --- a-posteriori mild residuals ------------------------------------------------

namespace {

void require_completed(const SolutionPath& sol) {
  if (sol.blew_up)
    throw std::invalid_argument(
        "mild residual is defined for completed solutions only (this one "
        "stopped at the blow-up guard)");
  if (sol.times.size() < 2)
    throw std::invalid_argument("mild residual: solution has no time steps");
}

SpectralField interpolate(const SpectralField& a, const SpectralField& b,
                          double theta) {
  if (theta == 0.0) return a;
  if (theta == 1.0) return b;
  SpectralField out = a;
  for (std::size_t i = 0; i < out.a.size(); ++i)
    out.a[i] = (1.0 - theta) * a.a[i] + theta * b.a[i];
  return out;
}

}  // namespace

double mild_residual(const SolutionPath& sol, const WickPower& phi,
                     const WickPower& phi2, const SolveConfig& cfg) {
  require_completed(sol);
  const int M = sol.cutoff;
  auto modes = ModeSet::shared(M);
  std::vector<double> mu(modes->size());
  for (std::size_t i = 0; i < modes->size(); ++i)
    mu[i] = static_cast<double>((*modes)[i].norm2());
  HeatForcing forcing(phi, phi2, cfg);

  double horizon = sol.times.back();
  SpectralField acc = SpectralField::zero(M);
  for (std::size_t c = 0; c + 1 < sol.times.size(); ++c) {
    double t0 = sol.times[c], t1 = sol.times[c + 1];
    double d = (t1 - t0) / 4.0;
    for (int j = 0; j < 4; ++j) {
      double a = t0 + j * d, b = t0 + (j + 1) * d;
      double tha = (a - t0) / (t1 - t0), thb = (b - t0) / (t1 - t0);
      if (j == 3) thb = 1.0;
      SpectralField va = interpolate(sol.v[c], sol.v[c + 1], tha);
      SpectralField vb = interpolate(sol.v[c], sol.v[c + 1], thb);
      SpectralField fa = forcing.eval(va, a, j == 0 ? Side::right : Side::left);
      SpectralField fb = forcing.eval(vb, b, Side::left);
      for (std::size_t i = 0; i < mu.size(); ++i) {
        double z = -d * mu[i];
        double p1 = etd_phi1(z), p2 = etd_phi2(z);
        acc.a[i] = std::exp(z) * acc.a[i] + d * ((p1 - p2) * fa.a[i] + p2 * fb.a[i]);
      }
    }
  }
  SpectralField rhs = SpectralField::zero(M);
  SpectralField u0 = embed_field(cfg.u0.modes ? cfg.u0 : SpectralField::zero(0), M);
  for (std::size_t i = 0; i < mu.size(); ++i)
    rhs.a[i] = std::exp(-horizon * mu[i]) * u0.a[i] + acc.a[i];
  rhs -= sol.v.back();
  return besov_norm(rhs, -cfg.delta, kInf, kInf);
}

double mild_residual(const SolutionPath& sol, const std::vector<WickPower>& psi,
                     const SolveConfig& cfg) {
  require_completed(sol);
  const int M = sol.cutoff;
  auto modes = ModeSet::shared(M);
  std::vector<double> om(modes->size());
  for (std::size_t i = 0; i < modes->size(); ++i)
    om[i] = std::sqrt(static_cast<double>((*modes)[i].norm2()));
  WaveForcing forcing(psi, cfg);

  SpectralField accp = SpectralField::zero(M), accv = SpectralField::zero(M);
  for (std::size_t c = 0; c + 1 < sol.times.size(); ++c) {
    double t0 = sol.times[c], t1 = sol.times[c + 1];
    double d = (t1 - t0) / 4.0;
    for (int j = 0; j < 4; ++j) {
      double a = t0 + j * d, b = t0 + (j + 1) * d;
      double tha = (a - t0) / (t1 - t0), thb = (b - t0) / (t1 - t0);
      if (j == 3) thb = 1.0;
      SpectralField va = interpolate(sol.v[c], sol.v[c + 1], tha);
      SpectralField vb = interpolate(sol.v[c], sol.v[c + 1], thb);
      SpectralField fa = forcing.eval(va, a, j == 0 ? Side::right : Side::left);
      SpectralField fb = forcing.eval(vb, b, Side::left);
      for (std::size_t i = 0; i < om.size(); ++i) {
        double u = om[i] * d;
        double m11 = om[i] == 0.0 ? 1.0 : std::cos(u);
        double m12 = om[i] == 0.0 ? d : std::sin(u) / om[i];
        double m21 = om[i] == 0.0 ? 0.0 : -om[i] * std::sin(u);
        WaveWeights ww = wave_weights(om[i], d);
        std::complex<double> p0 = accp.a[i], v0 = accv.a[i];
        accp.a[i] = m11 * p0 + m12 * v0 + (ww.s2 / d) * fa.a[i] +
                    (ww.s1 - ww.s2 / d) * fb.a[i];
        accv.a[i] = m21 * p0 + m11 * v0 + (ww.c2 / d) * fa.a[i] +
                    (ww.c1 - ww.c2 / d) * fb.a[i];
      }
    }
  }
  double horizon = sol.times.back();
  SpectralField u0 = embed_field(cfg.u0.modes ? cfg.u0 : SpectralField::zero(0), M);
  SpectralField u1 = embed_field(cfg.u1.modes ? cfg.u1 : SpectralField::zero(0), M);
  SpectralField rp = SpectralField::zero(M), rv = SpectralField::zero(M);
  for (std::size_t i = 0; i < om.size(); ++i) {
    double u = om[i] * horizon;
    double c = om[i] == 0.0 ? 1.0 : std::cos(u);
    double sv = om[i] == 0.0 ? horizon : std::sin(u) / om[i];
    double ds = om[i] == 0.0 ? 0.0 : -om[i] * std::sin(u);
    rp.a[i] = c * u0.a[i] + sv * u1.a[i] + accp.a[i];
    rv.a[i] = ds * u0.a[i] + c * u1.a[i] + accv.a[i];
  }
  rp -= sol.v.back();
  rv -= sol.vdot.back();
  return std::max(sobolev_norm(rp, 1.0 - cfg.epsilon, 2.0),
                  sobolev_norm(rv, -cfg.epsilon, 2.0));
}

}  // namespace wickspde
