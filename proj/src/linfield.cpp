#include "wickspde/linfield.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <utility>

#include "wickspde/rng.hpp"

namespace wickspde {
namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;
constexpr double kInv2Pi = 1.0 / kTwoPi;

// Stream tags separating the in-cell residual draws of different kernels and
// the sub-streams of the stationary construction.
constexpr std::uint64_t kTagHeat = 0x68656174ULL;          // "heat"
constexpr std::uint64_t kTagWave = 0x77617665ULL;          // "wave"
constexpr std::uint64_t kTagHeatStat = 0x68737461ULL;      // "hsta"
constexpr std::uint64_t kTagDampedStat = 0x64777374ULL;    // "dwst"
constexpr std::uint64_t kTagPastPath = 0x70617374ULL;      // "past"
constexpr std::uint64_t kTagFuturePath = 0x66757475ULL;    // "futu"
constexpr std::uint64_t kTagStatNoise = 0x6e6f6973ULL;     // "nois"

std::uint64_t kind_tag(ConvolutionKind kind) {
  switch (kind) {
    case ConvolutionKind::heat: return kTagHeat;
    case ConvolutionKind::wave: return kTagWave;
    case ConvolutionKind::heat_stationary: return kTagHeatStat;
    case ConvolutionKind::damped_wave_stationary: return kTagDampedStat;
  }
  throw std::logic_error("unknown convolution kind");
}

// 1 - sin(v)/v, stable near 0.
double one_minus_sinc(double v) {
  double v2 = v * v;
  if (std::abs(v) < 1e-2) {
    return v2 / 6.0 * (1.0 - v2 / 20.0 * (1.0 - v2 / 42.0));
  }
  return 1.0 - std::sin(v) / v;
}

// exp(w) - 1 for complex w, stable near 0.
std::complex<double> cexpm1(std::complex<double> w) {
  if (std::abs(w) < 0.5) {
    std::complex<double> term = w, sum = w;
    for (int k = 2; k < 24; ++k) {
      term *= w / static_cast<double>(k);
      sum += term;
      if (std::abs(term) < 1e-18 * std::abs(sum)) break;
    }
    return sum;
  }
  return std::exp(w) - 1.0;
}

// 8-point Gauss-Legendre rule (half of the symmetric nodes on [-1,1]).
constexpr double kGlX[4] = {0.1834346424956498, 0.5255324099163290,
                            0.7966664774136267, 0.9602898564975363};
constexpr double kGlW[4] = {0.3626837833783620, 0.3137066458778873,
                            0.2223810344533745, 0.1012285362903763};

// Integrate a two-component kernel over (0, delta) with panels sized to the
// oscillation/decay rate, accumulating fn(v, weight) supplied per node.
template <class F>
void panel_quadrature(double delta, double rate, F&& accumulate) {
  int panels = 1 + static_cast<int>(delta * rate / 1.5);
  double h = delta / panels;
  double half = 0.5 * h;
  for (int p = 0; p < panels; ++p) {
    double mid = (p + 0.5) * h;
    for (int q = 0; q < 4; ++q) {
      double dx = half * kGlX[q];
      double w = half * kGlW[q];
      accumulate(mid + dx, w);
      accumulate(mid - dx, w);
    }
  }
}

// Position/velocity response kernels at lag v for the second-order kinds:
// wave: k_s = sin(v w)/w, k_c = cos(v w) (k_s = v, k_c = 1 at w = 0);
// damped: k_s = e^{-v/2} sin(v wt)/wt, k_c = k_s' = e^{-v/2}(cos - sin/(2wt)).
struct PairKernel {
  bool damped = false;
  double om = 0.0;  // |l| for wave, sqrt(3/4 + |l|^2) for damped
  void operator()(double v, double& ks, double& kc) const {
    if (damped) {
      double e = std::exp(-0.5 * v);
      double s = std::sin(v * om), c = std::cos(v * om);
      ks = e * s / om;
      kc = e * (c - s / (2.0 * om));
    } else if (om == 0.0) {
      ks = v;
      kc = 1.0;
    } else {
      ks = std::sin(v * om) / om;
      kc = std::cos(v * om);
    }
  }
  double panel_rate() const { return om + (damped ? 0.5 : 0.0); }
};

// Conditional law of the drift-cell contribution to (position, velocity)
// given the stored Brownian increment over the cell: mean multipliers of the
// increment plus the Cholesky factor of the residual covariance.  Exact up to
// quadrature of smooth kernels; the b-dependence enters only the residual.
struct PairCoupling {
  double ms = 0.0, mc = 0.0;        // mean multipliers of the increment
  double l11 = 0.0, l21 = 0.0, l22 = 0.0;  // residual Cholesky (total variance)
};

PairCoupling pair_coupling(const PairKernel& k, double delta, double beff) {
  PairCoupling out;
  double cs = 0.0, cc = 0.0;
  panel_quadrature(delta, k.panel_rate(), [&](double v, double w) {
    double ks, kc;
    k(v, ks, kc);
    cs += w * ks;
    cc += w * kc;
  });
  out.ms = cs / delta;
  out.mc = cc / delta;
  if (beff > 0.0) {
    // Covariance of the centered kernels: no cancellation, so the conditional
    // covariance is accurate even when it is orders below the raw moments.
    double sss = 0.0, scc = 0.0, ssc = 0.0;
    panel_quadrature(delta, k.panel_rate(), [&](double v, double w) {
      double ks, kc;
      k(v, ks, kc);
      double as = ks - out.ms, ac = kc - out.mc;
      sss += w * as * as;
      scc += w * ac * ac;
      ssc += w * as * ac;
    });
    double a = beff * sss, b = beff * ssc, c = beff * scc;
    out.l11 = std::sqrt(std::max(0.0, a));
    out.l21 = out.l11 > 0.0 ? b / out.l11 : 0.0;
    out.l22 = std::sqrt(std::max(0.0, c - out.l21 * out.l21));
  }
  return out;
}

// Heat-kind drift-cell coupling: decay over the cell, the mean multiplier
// g = (1 - e^{-x})/x of the stored increment, and the residual std deviation.
struct HeatCoupling {
  double decay = 1.0, gain = 1.0, sres = 0.0;
};

HeatCoupling heat_coupling(double mu, double delta, double vd) {
  HeatCoupling out;
  double x = delta * mu;
  if (x == 0.0) return out;  // kernel is 1: the increment enters exactly
  out.decay = std::exp(-x);
  out.gain = -std::expm1(-x) / x;
  double resfac;
  if (x < 1e-3) {
    resfac = x * x / 12.0 * (1.0 - x);
  } else {
    double f = -std::expm1(-2.0 * x) / (2.0 * x);
    resfac = std::max(0.0, f - out.gain * out.gain);
  }
  out.sres = std::sqrt(vd * resfac);
  return out;
}

std::size_t grid_index_of(const std::vector<double>& times, double t,
                          const char* what) {
  auto it = std::lower_bound(times.begin(), times.end(), t);
  if (it == times.end() || *it != t) {
    std::ostringstream os;
    os << what << ": time " << t << " is not a stored grid point";
    throw std::out_of_range(os.str());
  }
  return static_cast<std::size_t>(it - times.begin());
}

void validate_emission_grid(const std::vector<double>& timegrid,
                            const std::vector<double>& noise_times) {
  if (timegrid.empty())
    throw std::invalid_argument("grid error: empty output time grid");
  for (std::size_t i = 0; i + 1 < timegrid.size(); ++i)
    if (!(timegrid[i] < timegrid[i + 1]))
      throw std::invalid_argument(
          "grid error: output time grid must be strictly increasing");
  for (double t : timegrid) {
    auto it = std::lower_bound(noise_times.begin(), noise_times.end(), t);
    if (it == noise_times.end() || *it != t)
      throw std::invalid_argument(
          "grid error: output time grid must be a subsequence of the noise "
          "grid (the noise grid refines the output grid)");
  }
}

}  // namespace

std::string convolution_kind_name(ConvolutionKind kind) {
  switch (kind) {
    case ConvolutionKind::heat: return "heat";
    case ConvolutionKind::wave: return "wave";
    case ConvolutionKind::heat_stationary: return "heat-stationary";
    case ConvolutionKind::damped_wave_stationary: return "damped-wave-stationary";
  }
  throw std::logic_error("unknown convolution kind");
}

ConvolutionKind convolution_kind_from_name(const std::string& name) {
  if (name == "heat") return ConvolutionKind::heat;
  if (name == "wave") return ConvolutionKind::wave;
  if (name == "heat-stationary") return ConvolutionKind::heat_stationary;
  if (name == "damped-wave-stationary") return ConvolutionKind::damped_wave_stationary;
  throw std::invalid_argument("unknown convolution kind name: " + name);
}

std::size_t StochasticConvolution::index_of(double t) const {
  return grid_index_of(times, t, "stochastic convolution");
}

std::size_t RenormConstants::index_of(double t) const {
  return grid_index_of(times, t, "renorm constants");
}

double RenormConstants::at(double t, Side side) const {
  std::size_t i = index_of(t);
  return side == Side::right ? value[i] : value_left[i];
}

// ---------------------------------------------------------------------------
// Streaming per-mode stepper.
// ---------------------------------------------------------------------------

struct ConvolutionStepper::Impl {
  ConvolutionKind kind;
  const ModeNoise* noise;
  std::shared_ptr<const ModeSet> modes;
  bool second_order = false;
  double mass_shift = 0.0;  // added to |l|^2 for heat kinds (1 for stationary)

  std::vector<std::uint32_t> canon;       // canonical mode indices
  std::vector<std::uint32_t> canon_conj;  // paired conjugate index
  std::vector<int> group;                 // radius-group id per canonical mode
  std::vector<double> freq;               // per group: mu (heat) or omega
  std::vector<std::uint64_t> rkey;        // per canonical mode residual stream

  std::vector<std::complex<double>> P, V, Pl, Vl;
  std::size_t pos = 0;

  // scratch, per radius group, refilled each cell
  std::vector<HeatCoupling> hc;
  std::vector<PairCoupling> pc;
  std::vector<double> prop;  // 4 entries per group: m11 m12 m21 m22

  Impl(ConvolutionKind k, const ModeNoise& n) : kind(k), noise(&n), modes(n.modes) {
    if (!modes) throw std::invalid_argument("mode noise has no mode set");
    if (n.times.size() < 1)
      throw std::invalid_argument("grid error: mode noise has an empty grid");
    second_order = is_wave_kind(kind);
    if (kind == ConvolutionKind::heat_stationary) mass_shift = 1.0;

    const auto& hist = modes->radius2_histogram();
    std::uint64_t base = mix_key({n.seed, kind_tag(kind)});
    for (std::size_t i = 0; i < modes->size(); ++i) {
      const Mode& m = (*modes)[i];
      bool canonical = ModeSet::is_positive(m) || (m.l1 == 0 && m.l2 == 0);
      if (!canonical) continue;
      canon.push_back(static_cast<std::uint32_t>(i));
      canon_conj.push_back(
          static_cast<std::uint32_t>(modes->index_of_conjugate(i)));
      long long r2 = m.norm2();
      auto it = std::lower_bound(
          hist.begin(), hist.end(), r2,
          [](const std::pair<long long, int>& h, long long v) { return h.first < v; });
      group.push_back(static_cast<int>(it - hist.begin()));
      // Stream identity depends on the mode label only, so restrictions of
      // the same noise to a smaller ball reproduce the same residuals.
      rkey.push_back(mix_key({base, static_cast<std::uint64_t>(m.l1 + (1 << 20)),
                              static_cast<std::uint64_t>(m.l2 + (1 << 20))}));
    }
    freq.resize(hist.size());
    for (std::size_t g = 0; g < hist.size(); ++g) {
      double r2 = static_cast<double>(hist[g].first);
      if (second_order) {
        freq[g] = kind == ConvolutionKind::damped_wave_stationary
                      ? std::sqrt(0.75 + r2)
                      : std::sqrt(r2);
      } else {
        freq[g] = r2 + mass_shift;
      }
    }
    P.assign(canon.size(), 0.0);
    Pl.assign(canon.size(), 0.0);
    if (second_order) {
      V.assign(canon.size(), 0.0);
      Vl.assign(canon.size(), 0.0);
    }
    hc.resize(freq.size());
    pc.resize(freq.size());
    prop.resize(4 * freq.size());
  }

  void advance() {
    if (pos + 1 >= noise->times.size())
      throw std::logic_error("convolution stepper advanced past its grid");
    std::size_t cell = pos;
    std::size_t nm = modes->size();
    double delta = noise->times[cell + 1] - noise->times[cell];
    double vd = noise->cell_drift_mass[cell];
    double beff = vd / delta;
    bool damped = kind == ConvolutionKind::damped_wave_stationary;

    if (!second_order) {
      for (std::size_t g = 0; g < freq.size(); ++g)
        hc[g] = heat_coupling(freq[g], delta, vd);
      for (std::size_t k = 0; k < canon.size(); ++k) {
        const HeatCoupling& c = hc[static_cast<std::size_t>(group[k])];
        std::complex<double> d = noise->drift[cell * nm + canon[k]];
        std::complex<double> r = 0.0;
        if (c.sres > 0.0) {
          auto z = gaussian_pair_at(rkey[k], 2 * cell);
          if (canon[k] == canon_conj[k])  // zero mode: real
            r = c.sres * z.first;
          else
            r = c.sres * std::complex<double>(z.first, z.second) * M_SQRT1_2;
        }
        Pl[k] = P[k] * c.decay + c.gain * d + r;
        P[k] = Pl[k] + noise->jump[cell * nm + canon[k]];
      }
    } else {
      for (std::size_t g = 0; g < freq.size(); ++g) {
        double om = freq[g];
        PairKernel ker{damped, om};
        pc[g] = pair_coupling(ker, delta, beff);
        double* m = &prop[4 * g];
        if (damped) {
          double e = std::exp(-0.5 * delta);
          double cth = std::cos(delta * om), sth = std::sin(delta * om);
          m[0] = e * (cth + sth / (2.0 * om));
          m[1] = e * sth / om;
          m[2] = -e * (om * om + 0.25) * sth / om;  // om^2 + 1/4 = 1 + |l|^2
          m[3] = e * (cth - sth / (2.0 * om));
        } else if (om == 0.0) {
          m[0] = 1.0; m[1] = delta; m[2] = 0.0; m[3] = 1.0;
        } else {
          double cth = std::cos(delta * om), sth = std::sin(delta * om);
          m[0] = cth; m[1] = sth / om; m[2] = -om * sth; m[3] = cth;
        }
      }
      for (std::size_t k = 0; k < canon.size(); ++k) {
        std::size_t g = static_cast<std::size_t>(group[k]);
        const double* m = &prop[4 * g];
        const PairCoupling& c = pc[g];
        std::complex<double> p0 = P[k], v0 = V[k];
        std::complex<double> p1 = m[0] * p0 + m[1] * v0;
        std::complex<double> v1 = m[2] * p0 + m[3] * v0;
        std::complex<double> d = noise->drift[cell * nm + canon[k]];
        std::complex<double> zs = 0.0, zc = 0.0;
        if (vd > 0.0) {
          auto a = gaussian_pair_at(rkey[k], 2 * cell);
          auto b = gaussian_pair_at(rkey[k], 2 * cell + 1);
          if (canon[k] == canon_conj[k]) {
            zs = a.first;
            zc = b.first;
          } else {
            zs = std::complex<double>(a.first, a.second) * M_SQRT1_2;
            zc = std::complex<double>(b.first, b.second) * M_SQRT1_2;
          }
        }
        Pl[k] = p1 + c.ms * d + c.l11 * zs;
        Vl[k] = v1 + c.mc * d + c.l21 * zs + c.l22 * zc;
        // Jump at the right endpoint: position kernel vanishes at lag 0, the
        // velocity kernel is 1, for both plain and damped kinds.
        P[k] = Pl[k];
        V[k] = Vl[k] + noise->jump[cell * nm + canon[k]];
      }
    }
    pos = cell + 1;
  }

  void emit(const std::vector<std::complex<double>>& src, SpectralField& out) const {
    if (out.cutoff != noise->cutoff || !out.modes)
      out = SpectralField::zero(noise->cutoff);
    out.aliased = false;
    for (std::size_t k = 0; k < canon.size(); ++k) {
      std::complex<double> z = src[k] * kInv2Pi;
      out.a[canon[k]] = z;
      out.a[canon_conj[k]] = std::conj(z);
    }
  }
};

ConvolutionStepper::ConvolutionStepper(ConvolutionKind kind, const ModeNoise& noise)
    : impl_(new Impl(kind, noise)) {}
ConvolutionStepper::~ConvolutionStepper() = default;
ConvolutionStepper::ConvolutionStepper(ConvolutionStepper&&) noexcept = default;
ConvolutionStepper& ConvolutionStepper::operator=(ConvolutionStepper&&) noexcept =
    default;

ConvolutionKind ConvolutionStepper::kind() const { return impl_->kind; }
int ConvolutionStepper::cutoff() const { return impl_->noise->cutoff; }
std::size_t ConvolutionStepper::pos() const { return impl_->pos; }
double ConvolutionStepper::time() const { return impl_->noise->times[impl_->pos]; }
bool ConvolutionStepper::done() const {
  return impl_->pos + 1 >= impl_->noise->times.size();
}
void ConvolutionStepper::advance() { impl_->advance(); }

void ConvolutionStepper::emit_value(SpectralField& out, Side side) const {
  impl_->emit(side == Side::right ? impl_->P : impl_->Pl, out);
}

void ConvolutionStepper::emit_deriv(SpectralField& out, Side side) const {
  if (!impl_->second_order)
    throw std::logic_error("time derivative is only stored for wave kinds");
  impl_->emit(side == Side::right ? impl_->V : impl_->Vl, out);
}

namespace {

StochasticConvolution run_convolution(ConvolutionKind kind, const ModeNoise& noise,
                                      const std::vector<double>& timegrid) {
  validate_emission_grid(timegrid, noise.times);
  ConvolutionStepper st(kind, noise);
  StochasticConvolution out;
  out.kind = kind;
  out.cutoff = noise.cutoff;
  out.times = timegrid;
  out.value.reserve(timegrid.size());
  out.value_left.reserve(timegrid.size());
  bool second_order = is_wave_kind(kind);
  if (second_order) {
    out.deriv.reserve(timegrid.size());
    out.deriv_left.reserve(timegrid.size());
  }
  for (double t : timegrid) {
    while (st.time() < t) st.advance();
    SpectralField v, vl;
    st.emit_value(v, Side::right);
    st.emit_value(vl, Side::left);
    out.value.push_back(std::move(v));
    out.value_left.push_back(std::move(vl));
    if (second_order) {
      SpectralField w, wl;
      st.emit_deriv(w, Side::right);
      st.emit_deriv(wl, Side::left);
      out.deriv.push_back(std::move(w));
      out.deriv_left.push_back(std::move(wl));
    }
  }
  return out;
}

// Drift part of the per-mode variance integral, int_0^t kernel^2(v) b dv for
// unit b, as a stable closed form.
double drift_variance_unit(ConvolutionKind kind, double r2, double t) {
  switch (kind) {
    case ConvolutionKind::heat:
    case ConvolutionKind::heat_stationary: {
      double mu = r2 + (kind == ConvolutionKind::heat_stationary ? 1.0 : 0.0);
      if (mu == 0.0) return t;
      return -std::expm1(-2.0 * mu * t) / (2.0 * mu);
    }
    case ConvolutionKind::wave: {
      if (r2 == 0.0) return t * t * t / 3.0;
      double om = std::sqrt(r2);
      return 0.5 * t * one_minus_sinc(2.0 * t * om) / r2;
    }
    case ConvolutionKind::damped_wave_stationary: {
      double w2 = 0.75 + r2;
      std::complex<double> z2(-1.0, 2.0 * std::sqrt(w2));
      double i_cos = (cexpm1(z2 * t) / z2).real();
      return (-std::expm1(-t) - i_cos) / (2.0 * w2);
    }
  }
  throw std::logic_error("unknown convolution kind");
}

RenormConstants renorm_constants_impl(ConvolutionKind kind,
                                      const SubordinatorPath& path, int cutoff,
                                      const std::vector<double>& timegrid) {
  if (timegrid.empty())
    throw std::invalid_argument("grid error: empty time grid");
  for (std::size_t i = 0; i + 1 < timegrid.size(); ++i)
    if (!(timegrid[i] < timegrid[i + 1]))
      throw std::invalid_argument(
          "grid error: time grid must be strictly increasing");
  if (timegrid.front() < 0.0 || timegrid.back() > path.horizon)
    throw std::invalid_argument(
        "grid error: time grid must lie within the path horizon");

  auto modes = ModeSet::shared(cutoff);
  const auto& hist = modes->radius2_histogram();
  std::size_t nr = hist.size();
  bool second_order = is_wave_kind(kind);
  bool damped = kind == ConvolutionKind::damped_wave_stationary;
  double mass_shift = kind == ConvolutionKind::heat_stationary ? 1.0 : 0.0;

  // Jump accumulators per radius group, advanced by decay/rotation so each
  // jump enters with its exact kernel phase.
  std::vector<double> heat_acc(second_order ? 0 : nr, 0.0);
  std::vector<std::complex<double>> rot_acc(second_order ? nr : 0, 0.0);
  double mass0 = 0.0, mass1 = 0.0, mass2 = 0.0;  // jump moments (zero mode)
  double env = 0.0;                              // damped scalar e^{-(t-s)} sum

  RenormConstants out;
  out.kind = kind;
  out.cutoff = cutoff;
  out.times = timegrid;
  out.value.reserve(timegrid.size());
  out.value_left.reserve(timegrid.size());

  auto rotate_to = [&](double delta) {
    if (delta == 0.0) return;
    if (!second_order) {
      for (std::size_t g = 0; g < nr; ++g) {
        double mu = static_cast<double>(hist[g].first) + mass_shift;
        heat_acc[g] *= std::exp(-2.0 * delta * mu);
      }
    } else {
      for (std::size_t g = 0; g < nr; ++g) {
        double r2 = static_cast<double>(hist[g].first);
        double om = damped ? std::sqrt(0.75 + r2) : std::sqrt(r2);
        std::complex<double> ph = std::polar(1.0, 2.0 * delta * om);
        if (damped) ph *= std::exp(-delta);
        rot_acc[g] *= ph;
      }
      if (damped) env *= std::exp(-delta);
    }
  };

  auto add_jump = [&](double s, double dl) {
    if (!second_order) {
      for (std::size_t g = 0; g < nr; ++g) heat_acc[g] += dl;
    } else {
      for (std::size_t g = 0; g < nr; ++g) rot_acc[g] += dl;
      mass0 += dl;
      mass1 += dl * s;
      mass2 += dl * s * s;
      env += dl;
    }
  };

  auto value_at = [&](double t) {
    double total = 0.0;
    for (std::size_t g = 0; g < nr; ++g) {
      double r2 = static_cast<double>(hist[g].first);
      double count = static_cast<double>(hist[g].second);
      double drift = path.drift_eff * drift_variance_unit(kind, r2, t);
      double jump;
      if (!second_order) {
        jump = heat_acc[g];
      } else if (damped) {
        jump = (env - rot_acc[g].real()) / (2.0 * (0.75 + r2));
      } else if (r2 == 0.0) {
        jump = t * t * mass0 - 2.0 * t * mass1 + mass2;
      } else {
        jump = (mass0 - rot_acc[g].real()) / (2.0 * r2);
      }
      total += count * (drift + std::max(0.0, jump));
    }
    return total * kInv2Pi * kInv2Pi;
  };

  const auto& jt = path.jump_times;
  const auto& js = path.jump_sizes;
  std::size_t ji = 0, gi = 0;
  double cursor = 0.0;
  while (gi < timegrid.size()) {
    double next_jump = ji < jt.size() ? jt[ji] : std::numeric_limits<double>::infinity();
    double next_grid = timegrid[gi];
    double e = std::min(next_jump, next_grid);
    rotate_to(e - cursor);
    cursor = e;
    bool is_grid = next_grid == e;
    if (is_grid) out.value_left.push_back(value_at(e));
    while (ji < jt.size() && jt[ji] == e) {
      add_jump(e, js[ji]);
      ++ji;
    }
    if (is_grid) {
      out.value.push_back(value_at(e));
      ++gi;
    }
  }
  return out;
}

}  // namespace

StochasticConvolution heat_convolution(const ModeNoise& noise,
                                       const std::vector<double>& timegrid) {
  return run_convolution(ConvolutionKind::heat, noise, timegrid);
}

StochasticConvolution wave_convolution(const ModeNoise& noise,
                                       const std::vector<double>& timegrid) {
  return run_convolution(ConvolutionKind::wave, noise, timegrid);
}

RenormConstants renorm_constants(ConvolutionKind kind,
                                 const SubordinatorPath& path, int cutoff,
                                 const std::vector<double>& timegrid) {
  if (kind != ConvolutionKind::heat && kind != ConvolutionKind::wave)
    throw std::invalid_argument(
        "renorm constants: kind must be heat or wave (stationary constants "
        "come from the stationary convolution)");
  path.validate();
  return renorm_constants_impl(kind, path, cutoff, timegrid);
}

double heat_renorm_time_integral(int cutoff, double horizon) {
  if (horizon < 0.0)
    throw std::invalid_argument("horizon must be nonnegative");
  auto modes = ModeSet::shared(cutoff);
  double total = 0.0;
  for (const auto& [r2ll, count] : modes->radius2_histogram()) {
    double r2 = static_cast<double>(r2ll);
    double term;
    if (r2 == 0.0) {
      term = 0.5 * horizon * horizon;
    } else {
      term = horizon / (2.0 * r2) + std::expm1(-2.0 * horizon * r2) / (4.0 * r2 * r2);
    }
    total += count * term;
  }
  return total * kInv2Pi * kInv2Pi;
}

double heat_renorm_divergence_limit(double horizon) {
  return horizon * std::log(2.0) / (4.0 * M_PI);
}

double stationary_renorm_limit(int cutoff) {
  auto modes = ModeSet::shared(cutoff);
  double total = 0.0;
  for (const auto& [r2ll, count] : modes->radius2_histogram())
    total += count / (2.0 * (1.0 + static_cast<double>(r2ll)));
  return total * kInv2Pi * kInv2Pi;
}

StationaryConvolution stationary_convolution(ConvolutionKind kind,
                                             const SubordinatorSpec& spec,
                                             int cutoff,
                                             const std::vector<double>& timegrid,
                                             double t_past, std::uint64_t seed) {
  if (!is_stationary_kind(kind))
    throw std::invalid_argument(
        "stationary convolution: kind must be heat-stationary or "
        "damped-wave-stationary");
  if (!(t_past > 0.0))
    throw std::invalid_argument("stationary convolution: past horizon must be positive");
  spec.validate();
  if (timegrid.empty())
    throw std::invalid_argument("grid error: empty time grid");
  for (std::size_t i = 0; i + 1 < timegrid.size(); ++i)
    if (!(timegrid[i] < timegrid[i + 1]))
      throw std::invalid_argument(
          "grid error: time grid must be strictly increasing");
  if (timegrid.front() < 0.0)
    throw std::invalid_argument("grid error: stationary time grid starts before 0");

  LogMomentReport lm = check_log_moment(spec);
  if (!lm.finite)
    throw std::invalid_argument(
        "stationarity-unsupported: the jump measure has an infinite log "
        "moment, so no stationary law exists");

  double horizon = timegrid.back();
  SubordinatorPath past =
      sample_subordinator(spec, t_past, mix_key({seed, kTagPastPath}));
  SubordinatorPath future;
  if (horizon > 0.0) {
    future = sample_subordinator(spec, horizon, mix_key({seed, kTagFuturePath}));
  } else {
    future.spec = spec;
    future.horizon = 0.0;
    future.drift_eff = past.drift_eff;
  }

  // Combined path in shifted time tau = t + t_past: the past noise enters
  // time-reflected (an increment over (a,b] lands on (t_past-b, t_past-a]),
  // which preserves the law of a Levy subordinator.
  SubordinatorPath comb;
  comb.spec = spec;
  comb.horizon = t_past + horizon;
  comb.drift_eff = past.drift_eff;
  std::vector<std::pair<double, double>> jumps;
  jumps.reserve(past.jump_times.size() + future.jump_times.size());
  for (std::size_t i = 0; i < past.jump_times.size(); ++i) {
    double tau = t_past - past.jump_times[i];
    if (tau > 0.0) jumps.emplace_back(tau, past.jump_sizes[i]);
  }
  for (std::size_t i = 0; i < future.jump_times.size(); ++i)
    jumps.emplace_back(t_past + future.jump_times[i], future.jump_sizes[i]);
  std::sort(jumps.begin(), jumps.end());
  for (const auto& [tau, dl] : jumps) {
    if (!comb.jump_times.empty() && comb.jump_times.back() == tau)
      comb.jump_sizes.back() += dl;
    else {
      comb.jump_times.push_back(tau);
      comb.jump_sizes.push_back(dl);
    }
  }
  comb.validate();

  std::vector<double> shifted;
  shifted.reserve(timegrid.size());
  for (double t : timegrid) shifted.push_back(t_past + t);
  std::vector<double> grid;
  grid.reserve(shifted.size() + comb.jump_times.size() + 2);
  grid.push_back(0.0);
  grid.insert(grid.end(), comb.jump_times.begin(), comb.jump_times.end());
  grid.insert(grid.end(), shifted.begin(), shifted.end());
  grid.push_back(comb.horizon);
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

  ModeNoise noise =
      sample_mode_noise(comb, cutoff, grid, mix_key({seed, kTagStatNoise}));

  StationaryConvolution out;
  out.convolution = run_convolution(kind, noise, shifted);
  out.convolution.times = timegrid;
  out.constants = renorm_constants_impl(kind, comb, cutoff, shifted);
  out.constants.times = timegrid;
  out.t_past = t_past;
  double decay =
      kind == ConvolutionKind::heat_stationary ? std::exp(-2.0 * t_past)
                                               : std::exp(-t_past);
  out.truncation_bias = decay * spec.mean_mass_rate();
  return out;
}

}  // namespace wickspde
