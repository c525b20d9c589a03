#include "wickspde/pathint.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "wickspde/rng.hpp"

namespace wickspde {

namespace {

void validate_grid(const std::vector<double>& times) {
  if (times.size() < 2) throw std::invalid_argument("grid: need at least two times");
  for (std::size_t i = 1; i < times.size(); ++i)
    if (!(times[i] > times[i - 1]))
      throw std::invalid_argument("grid: times must be strictly increasing");
}

}  // namespace

void GridPath::validate() const {
  if (times.size() != values.size())
    throw std::invalid_argument("GridPath: times/values length mismatch");
  if (!continuous.empty() && continuous.size() != times.size())
    throw std::invalid_argument("GridPath: continuity flags length mismatch");
  validate_grid(times);
}

void ComplexGridPath::validate() const {
  if (times.size() != values.size())
    throw std::invalid_argument("GridPath: times/values length mismatch");
  if (!continuous.empty() && continuous.size() != times.size())
    throw std::invalid_argument("GridPath: continuity flags length mismatch");
  validate_grid(times);
}

ModeNoise sample_mode_noise(const SubordinatorPath& path, int cutoff,
                            const std::vector<double>& timegrid, std::uint64_t seed) {
  if (cutoff < 0) throw std::invalid_argument("sample_mode_noise: cutoff must be >= 0");
  validate_grid(timegrid);
  if (timegrid.front() < 0.0 || timegrid.back() > path.horizon)
    throw std::invalid_argument("sample_mode_noise: grid outside [0, horizon]");
  for (double tj : path.jump_times) {
    if (tj > timegrid.back()) break;
    if (tj < timegrid.front() ||
        !std::binary_search(timegrid.begin(), timegrid.end(), tj))
      throw std::invalid_argument(
          "sample_mode_noise: grid error: missing subordinator jump time");
  }

  ModeNoise noise;
  noise.cutoff = cutoff;
  noise.seed = seed;
  noise.modes = ModeSet::shared(cutoff);
  noise.path = path;
  noise.times = timegrid;

  std::size_t cells = noise.n_cells();
  std::size_t nm = noise.modes->size();
  noise.cell_drift_mass.assign(cells, 0.0);
  noise.cell_jump_mass.assign(cells, 0.0);
  noise.drift.assign(cells * nm, {0.0, 0.0});
  noise.jump.assign(cells * nm, {0.0, 0.0});

  for (std::size_t i = 0; i < cells; ++i) {
    noise.cell_drift_mass[i] = path.drift_eff * (timegrid[i + 1] - timegrid[i]);
    auto it = std::lower_bound(path.jump_times.begin(), path.jump_times.end(),
                               timegrid[i + 1]);
    if (it != path.jump_times.end() && *it == timegrid[i + 1])
      noise.cell_jump_mass[i] =
          path.jump_sizes[static_cast<std::size_t>(it - path.jump_times.begin())];
  }

  // Mode-major sampling: one keyed stream per canonical mode, cells in order, the
  // drift draw before the jump draw. Streams depend on (seed, l) only, so the same
  // seed couples all cutoffs mode-by-mode (nested sampling).
  const ModeSet& ms = *noise.modes;
  for (std::size_t m = 0; m < nm; ++m) {
    const Mode& l = ms[m];
    bool zero = (l.l1 == 0 && l.l2 == 0);
    if (!zero && !ModeSet::is_positive(l)) continue;
    Rng rng(mix_key({seed, 0x6d6f6465ULL, static_cast<std::uint64_t>(l.l1 + (1 << 20)),
                     static_cast<std::uint64_t>(l.l2 + (1 << 20))}));
    std::size_t mc = ms.index_of_conjugate(m);
    for (std::size_t i = 0; i < cells; ++i) {
      double vd = noise.cell_drift_mass[i];
      double vj = noise.cell_jump_mass[i];
      std::complex<double> d{0.0, 0.0}, j{0.0, 0.0};
      if (zero) {
        if (vd > 0.0) d = {std::sqrt(vd) * rng.gaussian(), 0.0};
        if (vj > 0.0) j = {std::sqrt(vj) * rng.gaussian(), 0.0};
      } else {
        if (vd > 0.0) {
          double s = std::sqrt(vd * 0.5);
          d = {s * rng.gaussian(), s * rng.gaussian()};
        }
        if (vj > 0.0) {
          double s = std::sqrt(vj * 0.5);
          j = {s * rng.gaussian(), s * rng.gaussian()};
        }
      }
      noise.drift[i * nm + m] = d;
      noise.jump[i * nm + m] = j;
      if (!zero) {
        noise.drift[i * nm + mc] = std::conj(d);
        noise.jump[i * nm + mc] = std::conj(j);
      }
    }
  }
  return noise;
}

ModeNoise ModeNoise::restricted(int smaller_cutoff) const {
  if (smaller_cutoff > cutoff)
    throw std::invalid_argument("ModeNoise::restricted: cutoff must not grow");
  if (smaller_cutoff == cutoff) return *this;
  ModeNoise out;
  out.cutoff = smaller_cutoff;
  out.seed = seed;
  out.modes = ModeSet::shared(smaller_cutoff);
  out.path = path;
  out.times = times;
  out.cell_drift_mass = cell_drift_mass;
  out.cell_jump_mass = cell_jump_mass;
  std::size_t cells = out.n_cells();
  std::size_t nm_out = out.modes->size(), nm_in = modes->size();
  out.drift.resize(cells * nm_out);
  out.jump.resize(cells * nm_out);
  for (std::size_t m = 0; m < nm_out; ++m) {
    const Mode& l = (*out.modes)[m];
    std::size_t src = modes->index_of(l.l1, l.l2);
    for (std::size_t i = 0; i < cells; ++i) {
      out.drift[i * nm_out + m] = drift[i * nm_in + src];
      out.jump[i * nm_out + m] = jump[i * nm_in + src];
    }
  }
  return out;
}

namespace {

// f value at time t: exact grid hit, or linear interpolation when allowed.
double f_at(const GridPath& f, double t, bool interp) {
  auto it = std::lower_bound(f.times.begin(), f.times.end(), t);
  if (it != f.times.end() && *it == t)
    return f.values[static_cast<std::size_t>(it - f.times.begin())];
  if (!interp)
    throw std::invalid_argument(
        "young_integral: f not defined at a needed grid point (enable linear interpolation)");
  if (it == f.times.begin() || it == f.times.end())
    throw std::invalid_argument("young_integral: t outside f's grid");
  std::size_t hi = static_cast<std::size_t>(it - f.times.begin());
  double t0 = f.times[hi - 1], t1 = f.times[hi];
  double w = (t - t0) / (t1 - t0);
  return (1.0 - w) * f.values[hi - 1] + w * f.values[hi];
}

template <class V>
V young_impl(const GridPath& f, const std::vector<double>& gt, const std::vector<V>& gv,
             double a, double b, YoungOptions opts) {
  f.validate();
  validate_grid(gt);
  if (!(a <= b)) throw std::invalid_argument("young_integral: need a <= b");
  if (a < gt.front() || b > gt.back())
    throw std::invalid_argument("young_integral: [a,b] outside g's grid");
  if (!f.continuous.empty())
    for (unsigned char c : f.continuous)
      if (!c) throw std::invalid_argument("young_integral: f must be continuous");
  // Reject shared discontinuities of f and g (Young's caveat); f is declared
  // continuous above, so only flagged g points could clash -- nothing to do.
  auto lo = std::lower_bound(gt.begin(), gt.end(), a);
  auto hi = std::upper_bound(gt.begin(), gt.end(), b);
  std::size_t i0 = static_cast<std::size_t>(lo - gt.begin());
  std::size_t i1 = static_cast<std::size_t>(hi - gt.begin());
  if (i0 >= i1 || gt[i0] != a || gt[i1 - 1] != b)
    throw std::invalid_argument("young_integral: endpoints must be grid points of g");
  V total{};
  for (std::size_t i = i0 + 1; i < i1; ++i)
    total += f_at(f, gt[i - 1], opts.allow_linear_interp_f) * (gv[i] - gv[i - 1]);
  return total;
}

}  // namespace

double young_integral(const GridPath& f, const GridPath& g, double a, double b,
                      YoungOptions opts) {
  g.validate();
  return young_impl<double>(f, g.times, g.values, a, b, opts);
}

std::complex<double> young_integral(const GridPath& f, const ComplexGridPath& g, double a,
                                    double b, YoungOptions opts) {
  g.validate();
  return young_impl<std::complex<double>>(f, g.times, g.values, a, b, opts);
}

double p_variation(const GridPath& g, double p) {
  g.validate();
  if (!(p >= 1.0)) throw std::invalid_argument("p_variation: need p >= 1");
  if (g.values.empty()) throw std::invalid_argument("p_variation: empty grid");

  // Lossless reduction: an optimal subsequence can be taken with every interior
  // point at a weak local extremum (the per-point objective is convex in the
  // point's value, and a point lying between its chosen neighbours can be dropped
  // because (x+y)^p >= x^p + y^p for x,y >= 0).
  const std::vector<double>& v = g.values;
  std::vector<double> x;
  x.reserve(v.size());
  x.push_back(v.front());
  for (std::size_t i = 1; i + 1 < v.size(); ++i)
    if ((v[i] - v[i - 1]) * (v[i + 1] - v[i]) <= 0.0) x.push_back(v[i]);
  if (v.size() > 1) x.push_back(v.back());

  std::size_t n = x.size();
  std::vector<double> best(n, 0.0);
  double answer = 0.0;
  if (p == 2.0) {
    for (std::size_t i = 1; i < n; ++i) {
      double bi = 0.0, xi = x[i];
      for (std::size_t j = 0; j < i; ++j) {
        double d = xi - x[j];
        double c = best[j] + d * d;
        if (c > bi) bi = c;
      }
      best[i] = bi;
      if (bi > answer) answer = bi;
    }
    return std::sqrt(answer);
  }
  for (std::size_t i = 1; i < n; ++i) {
    double bi = 0.0;
    for (std::size_t j = 0; j < i; ++j) {
      double c = best[j] + std::pow(std::abs(x[i] - x[j]), p);
      if (c > bi) bi = c;
    }
    best[i] = bi;
    if (bi > answer) answer = bi;
  }
  return std::pow(answer, 1.0 / p);
}

}  // namespace wickspde
