#pragma once
// Band-limited real fields on the 2-torus as Fourier amplitudes over the mode
// ball |l| <= N, with field(x) = sum_l a_l e^{il.x}. L^p norms are volume
// normalized: ||f||_p = ((2pi)^{-2} int |f|^p)^{1/p}, so ||e_l||_2 = 1 and
// Parseval reads ||f||_2^2 = sum |a_l|^2.

#include <complex>
#include <functional>
#include <iosfwd>
#include <memory>
#include <vector>

#include "wickspde/modes.hpp"

namespace wickspde {

class FftGrid;

struct SpectralField {
  int cutoff = 0;
  std::shared_ptr<const ModeSet> modes;
  std::vector<std::complex<double>> a;
  bool aliased = false;  // set by pointwise_map when the output cutoff truncates

  static SpectralField zero(int cutoff);
  static SpectralField constant(double c);

  std::complex<double> coeff(int l1, int l2) const;
  void set_coeff(int l1, int l2, std::complex<double> v);  // mirrors the conjugate
  double value_at(double x1, double x2) const;             // direct mode sum

  // Max |a_l - conj(a_{-l})| over the ball; 0 for fields built through the API.
  double hermitian_defect() const;

  SpectralField& operator+=(const SpectralField& o);
  SpectralField& operator-=(const SpectralField& o);
  SpectralField& operator*=(double s);
};

SpectralField project_modes(const SpectralField& f, int M);

// Littlewood-Paley bumps: psi smooth, = 1 on [0,1/2], = 0 on [1,inf);
// rho(x) = psi(|x|/4) - psi(|x|/2) supported in B(4)\B(1); the low block uses
// chi(x) = psi(|x|/2), the unique choice that telescopes with rho to a partition
// of unity. Block m >= 0 multiplier is rho(2^{-m}|l|); block -1 is chi(|l|).
class DyadicPartition {
 public:
  static double psi(double r);
  static double chi(double r);
  static double rho(double r);
  // Multiplier of block m at radius r (m = -1 is the chi block).
  static double block_weight(int m, double r);
  // Largest block index that can meet modes of radius <= cutoff.
  static int max_block(int cutoff);
};

double lp_norm(const SpectralField& f, double p);  // p >= 1 or inf; exact for p = 2
double besov_norm(const SpectralField& f, double alpha, double p, double q,
                  const DyadicPartition& partition = {});
double sobolev_norm(const SpectralField& f, double alpha, double p);

SpectralField field_product(const SpectralField& f, const SpectralField& g);

// Apply a scalar map pointwise on a dealiasing physical grid and truncate to
// output_cutoff. `degree` is the polynomial degree of the map; the grid is sized
// so the kept coefficients are exact projections of the true product. The result
// is flagged aliased when output_cutoff < degree * N (modes were discarded).
SpectralField pointwise_map(const SpectralField& f, const std::function<double(double)>& map,
                            int output_cutoff, int degree);

// Text serialization: header line with the cutoff, then one "l1 l2 Re Im" line
// per mode, 17 significant digits.
void write_field(std::ostream& os, const SpectralField& f);
SpectralField read_field(std::istream& is);

namespace fft_detail {
// Scatter amplitudes into a half-complex buffer / gather them back (normalized).
void synthesize(const SpectralField& f, FftGrid& grid);
void analyze(FftGrid& grid, SpectralField& out);
}  // namespace fft_detail

}  // namespace wickspde
