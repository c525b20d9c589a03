#include "wickspde/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "wickspde/fft.hpp"
#include "wickspde/util.hpp"

namespace wickspde {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

bool is_zero_mode(const Mode& m) { return m.l1 == 0 && m.l2 == 0; }
}  // namespace

SpectralField SpectralField::zero(int cutoff) {
  SpectralField f;
  f.cutoff = cutoff;
  f.modes = ModeSet::shared(cutoff);
  f.a.assign(f.modes->size(), {0.0, 0.0});
  return f;
}

SpectralField SpectralField::constant(double c) {
  SpectralField f = zero(0);
  f.a[0] = c;
  return f;
}

std::complex<double> SpectralField::coeff(int l1, int l2) const {
  if (!modes->contains(l1, l2)) return {0.0, 0.0};
  return a[modes->index_of(l1, l2)];
}

void SpectralField::set_coeff(int l1, int l2, std::complex<double> v) {
  a[modes->index_of(l1, l2)] = v;
  a[modes->index_of(-l1, -l2)] = std::conj(v);
}

double SpectralField::value_at(double x1, double x2) const {
  // Real field: sum over canonical representatives, doubling the real part.
  double s = 0.0;
  const ModeSet& ms = *modes;
  for (std::size_t i = 0; i < ms.size(); ++i) {
    const Mode& m = ms[i];
    if (is_zero_mode(m)) {
      s += a[i].real();
    } else if (ModeSet::is_positive(m)) {
      double phase = m.l1 * x1 + m.l2 * x2;
      s += 2.0 * (a[i].real() * std::cos(phase) - a[i].imag() * std::sin(phase));
    }
  }
  return s;
}

double SpectralField::hermitian_defect() const {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    d = std::max(d, std::abs(a[i] - std::conj(a[modes->index_of_conjugate(i)])));
  return d;
}

SpectralField& SpectralField::operator+=(const SpectralField& o) {
  if (o.cutoff > cutoff) throw std::invalid_argument("field +=: cutoff too small");
  for (std::size_t i = 0; i < o.a.size(); ++i) {
    const Mode& m = (*o.modes)[i];
    a[modes->index_of(m.l1, m.l2)] += o.a[i];
  }
  return *this;
}

SpectralField& SpectralField::operator-=(const SpectralField& o) {
  if (o.cutoff > cutoff) throw std::invalid_argument("field -=: cutoff too small");
  for (std::size_t i = 0; i < o.a.size(); ++i) {
    const Mode& m = (*o.modes)[i];
    a[modes->index_of(m.l1, m.l2)] -= o.a[i];
  }
  return *this;
}

SpectralField& SpectralField::operator*=(double s) {
  for (auto& c : a) c *= s;
  return *this;
}

SpectralField project_modes(const SpectralField& f, int M) {
  if (M < 0) throw std::invalid_argument("project_modes: cutoff must be >= 0");
  SpectralField out = SpectralField::zero(M);
  const ModeSet& src = *f.modes;
  const ModeSet& dst = *out.modes;
  for (std::size_t i = 0; i < src.size(); ++i) {
    const Mode& m = src[i];
    if (dst.contains(m.l1, m.l2)) out.a[dst.index_of(m.l1, m.l2)] = f.a[i];
  }
  out.aliased = f.aliased;
  return out;
}

double DyadicPartition::psi(double r) {
  auto s = [](double x) { return x > 0.0 ? std::exp(-1.0 / x) : 0.0; };
  double num = s(2.0 - 2.0 * r);
  double den = num + s(2.0 * r - 1.0);
  return den > 0.0 ? num / den : 0.0;
}

double DyadicPartition::chi(double r) { return psi(r / 2.0); }

double DyadicPartition::rho(double r) { return psi(r / 4.0) - psi(r / 2.0); }

double DyadicPartition::block_weight(int m, double r) {
  if (m < -1) throw std::invalid_argument("block_weight: m >= -1");
  return m == -1 ? chi(r) : rho(std::ldexp(r, -m));
}

int DyadicPartition::max_block(int cutoff) {
  int m = -1;
  while ((1 << (m + 1)) < cutoff) ++m;
  return m;
}

namespace fft_detail {

void synthesize(const SpectralField& f, FftGrid& grid) {
  int G = grid.size();
  if (G < 2 * f.cutoff + 2)
    throw std::invalid_argument("synthesize: grid too small for the field band");
  if (f.hermitian_defect() > 1e-9 * (1.0 + lp_norm(f, 2.0)))
    throw std::invalid_argument("synthesize: field violates conjugate symmetry");
  grid.zero_spec();
  std::complex<double>* spec = grid.spec_buf();
  int cols = G / 2 + 1;
  const ModeSet& ms = *f.modes;
  for (std::size_t i = 0; i < ms.size(); ++i) {
    const Mode& m = ms[i];
    if (m.l2 < 0) continue;  // implied by Hermitian half-layout
    int i1 = m.l1 >= 0 ? m.l1 : m.l1 + G;
    spec[static_cast<std::size_t>(i1) * cols + m.l2] = f.a[i];
  }
  grid.backward();
}

void analyze(FftGrid& grid, SpectralField& out) {
  int G = grid.size();
  if (G < 2 * out.cutoff + 2)
    throw std::invalid_argument("analyze: grid too small for the output band");
  grid.forward();
  const std::complex<double>* spec = grid.spec_buf();
  int cols = G / 2 + 1;
  double inv = 1.0 / (static_cast<double>(G) * G);
  const ModeSet& ms = *out.modes;
  for (std::size_t i = 0; i < ms.size(); ++i) {
    const Mode& m = ms[i];
    if (m.l2 < 0) continue;
    int i1 = m.l1 >= 0 ? m.l1 : m.l1 + G;
    std::complex<double> v = spec[static_cast<std::size_t>(i1) * cols + m.l2] * inv;
    if (is_zero_mode(m)) v = v.real();
    out.a[i] = v;
    out.a[ms.index_of_conjugate(i)] = std::conj(v);
  }
}

}  // namespace fft_detail

namespace {

// Volume-normalized L^p norm of the synthesized values.
double grid_lp(const double* vals, std::size_t n, double p) {
  if (p == kInf) {
    double m = 0.0;
    for (std::size_t i = 0; i < n; ++i) m = std::max(m, std::abs(vals[i]));
    return m;
  }
  double s = 0.0;
  if (p == 2.0) {
    for (std::size_t i = 0; i < n; ++i) s += vals[i] * vals[i];
  } else if (p == 1.0) {
    for (std::size_t i = 0; i < n; ++i) s += std::abs(vals[i]);
  } else {
    for (std::size_t i = 0; i < n; ++i) s += std::pow(std::abs(vals[i]), p);
  }
  return std::pow(s / static_cast<double>(n), 1.0 / p);
}

void check_lp(double p) {
  if (!(p >= 1.0) && p != kInf)
    throw std::invalid_argument("norm: p must lie in [1, inf]");
}

// L^p norm of a weighted copy of f. Weights are per-mode multipliers.
double weighted_lp(const SpectralField& f, const std::vector<double>& w, double p,
                   int band_limit) {
  if (p == 2.0) {  // Parseval, exact
    double s = 0.0;
    for (std::size_t i = 0; i < f.a.size(); ++i) s += std::norm(f.a[i] * w[i]);
    return std::sqrt(s);
  }
  // Synthesize on a grid oversampled 4x beyond the Nyquist rate of the band.
  SpectralField tmp = f;
  for (std::size_t i = 0; i < tmp.a.size(); ++i) tmp.a[i] *= w[i];
  // The weights may vanish outside band_limit even when f is wider; shrink the
  // stored ball so the grid only needs to resolve the live band.
  if (band_limit < tmp.cutoff) tmp = project_modes(tmp, band_limit);
  int G = FftGrid::fast_size(std::max(8 * band_limit, 32));
  FftGrid& grid = FftGrid::shared(G);
  fft_detail::synthesize(tmp, grid);
  return grid_lp(grid.real_buf(), static_cast<std::size_t>(G) * G, p);
}

}  // namespace

double lp_norm(const SpectralField& f, double p) {
  check_lp(p);
  std::vector<double> w(f.a.size(), 1.0);
  return weighted_lp(f, w, p, f.cutoff);
}

double sobolev_norm(const SpectralField& f, double alpha, double p) {
  check_lp(p);
  std::vector<double> w(f.a.size());
  const ModeSet& ms = *f.modes;
  for (std::size_t i = 0; i < ms.size(); ++i)
    w[i] = std::pow(1.0 + static_cast<double>(ms[i].norm2()), alpha / 2.0);
  return weighted_lp(f, w, p, f.cutoff);
}

double besov_norm(const SpectralField& f, double alpha, double p, double q,
                  const DyadicPartition&) {
  check_lp(p);
  check_lp(q);
  const ModeSet& ms = *f.modes;
  std::vector<double> radius(ms.size());
  for (std::size_t i = 0; i < ms.size(); ++i)
    radius[i] = std::sqrt(static_cast<double>(ms[i].norm2()));

  double acc = 0.0, sup = 0.0;
  std::vector<double> w(ms.size());
  for (int m = -1; m <= DyadicPartition::max_block(f.cutoff); ++m) {
    bool any = false;
    for (std::size_t i = 0; i < ms.size(); ++i) {
      w[i] = DyadicPartition::block_weight(m, radius[i]);
      any = any || (w[i] != 0.0 && std::norm(f.a[i]) > 0.0);
    }
    if (!any) continue;
    // Band limit of this block: modes live strictly inside radius 2^{m+2}.
    int band = std::min(f.cutoff, (1 << (m + 2)));
    double block = weighted_lp(f, w, p, band);
    double weighted = std::pow(2.0, alpha * m) * block;
    if (q == kInf)
      sup = std::max(sup, weighted);
    else
      acc += std::pow(weighted, q);
  }
  return q == kInf ? sup : std::pow(acc, 1.0 / q);
}

SpectralField field_product(const SpectralField& f, const SpectralField& g) {
  int out_cutoff = f.cutoff + g.cutoff;
  int G = FftGrid::fast_size(2 * out_cutoff + 2);
  FftGrid& grid = FftGrid::shared(G);
  std::size_t n = static_cast<std::size_t>(G) * G;
  fft_detail::synthesize(f, grid);
  std::vector<double> fx(grid.real_buf(), grid.real_buf() + n);
  fft_detail::synthesize(g, grid);
  double* buf = grid.real_buf();
  for (std::size_t i = 0; i < n; ++i) buf[i] *= fx[i];
  SpectralField out = SpectralField::zero(out_cutoff);
  fft_detail::analyze(grid, out);
  return out;
}

SpectralField pointwise_map(const SpectralField& f, const std::function<double(double)>& map,
                            int output_cutoff, int degree) {
  if (output_cutoff < 0) throw std::invalid_argument("pointwise_map: output_cutoff >= 0");
  if (degree < 1) throw std::invalid_argument("pointwise_map: degree >= 1");
  int band = degree * f.cutoff;
  // Kept coefficients are exact projections as long as no alias lands inside the
  // output ball: G > band + output_cutoff.
  int G = FftGrid::fast_size(std::max(band + output_cutoff + 2, 2 * output_cutoff + 2));
  FftGrid& grid = FftGrid::shared(G);
  fft_detail::synthesize(f, grid);
  double* buf = grid.real_buf();
  std::size_t n = static_cast<std::size_t>(G) * G;
  for (std::size_t i = 0; i < n; ++i) buf[i] = map(buf[i]);
  SpectralField out = SpectralField::zero(output_cutoff);
  fft_detail::analyze(grid, out);
  out.aliased = output_cutoff < band;
  return out;
}

void write_field(std::ostream& os, const SpectralField& f) {
  os << "wickspde-field v1 cutoff " << f.cutoff << "\n";
  const ModeSet& ms = *f.modes;
  for (std::size_t i = 0; i < ms.size(); ++i)
    os << ms[i].l1 << " " << ms[i].l2 << " " << fmt17(f.a[i].real()) << " "
       << fmt17(f.a[i].imag()) << "\n";
}

SpectralField read_field(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw std::runtime_error("field read: empty input");
  std::istringstream hs(line);
  std::string magic, ver, key;
  int cutoff = -1;
  hs >> magic >> ver >> key >> cutoff;
  if (magic != "wickspde-field" || key != "cutoff" || cutoff < 0)
    throw std::runtime_error("field read: bad header");
  SpectralField f = SpectralField::zero(cutoff);
  for (std::size_t i = 0; i < f.a.size(); ++i) {
    if (!std::getline(is, line)) throw std::runtime_error("field read: truncated input");
    std::istringstream ls(line);
    int l1, l2;
    double re, im;
    ls >> l1 >> l2 >> re >> im;
    if (ls.fail()) throw std::runtime_error("field read: bad mode line");
    f.a[f.modes->index_of(l1, l2)] = {re, im};
  }
  return f;
}

}  // namespace wickspde
