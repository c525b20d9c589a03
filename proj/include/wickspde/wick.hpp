#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <vector>

#include "wickspde/linfield.hpp"
#include "wickspde/spectral.hpp"
#include "wickspde/subordinator.hpp"

namespace wickspde {

// Probabilists' Hermite polynomial with variance parameter:
// H_0 = 1, H_1 = x, H_{k+1}(x; s2) = x H_k - k s2 H_{k-1}; s2 = 0 gives x^k.
double hermite(int k, double x, double s2);
// All of H_0..H_k at once (recurrence shared).
std::vector<double> hermite_all(int k, double x, double s2);

// Renormalized k-th power of a convolution field: at each grid time the
// pointwise image of the field under H_k(.; c(t)), held at output cutoff k*N
// (exact: a degree-k polynomial of an N-band field is k*N-band-limited).
struct WickPower {
  ConvolutionKind kind = ConvolutionKind::heat;
  int order = 1;
  int cutoff = 0;  // cutoff of the base field; stored fields live at order*cutoff
  std::vector<double> times;
  std::vector<SpectralField> value;
  std::vector<SpectralField> value_left;
  RenormConstants constants;

  std::size_t index_of(double t) const;
};

WickPower wick_power(const StochasticConvolution& conv,
                     const RenormConstants& constants, int order);

// Monte-Carlo check of the Wick covariance identity
//   E[X^{ok}(s,x) X^{om}(t,y)] = delta_{km} k! (E[X(s,x) X(t,y)])^k
// over fresh Brownian noise on one fixed subordinator path.
struct CovarianceDiagnostic {
  int order_k = 1;
  int order_m = 1;
  std::size_t ensemble = 0;
  double mc_value = 0.0;      // MC mean of the Wick product
  double mc_se = 0.0;
  double base_cov = 0.0;      // MC mean of X(s,x) X(t,y)
  double base_cov_se = 0.0;
  double predicted = 0.0;     // delta_{km} k! base_cov^k
  double predicted_se = 0.0;  // first-order propagation of base_cov_se
};

CovarianceDiagnostic covariance_diagnostic(
    ConvolutionKind kind, const SubordinatorPath& path, int cutoff, int order_k,
    int order_m, double s, std::array<double, 2> x, double t,
    std::array<double, 2> y, std::size_t ensemble, std::uint64_t seed,
    int workers = 1);

// Norm used by the Cauchy convergence study: Besov B^alpha_{p,q} in space,
// L^gamma or sup in time.
struct StudyNorm {
  double alpha = -0.5;
  double p = std::numeric_limits<double>::infinity();
  double q = std::numeric_limits<double>::infinity();
  bool sup_time = false;
  double gamma = 1.0;    // time exponent when sup_time is false
  double epsilon = 0.2;  // window parameter of the heat-kind constraint check
};

struct StudyConfig {
  ConvolutionKind kind = ConvolutionKind::heat;
  int order = 2;
  std::vector<int> cutoffs;  // each N is compared against 2N on nested noise
  StudyNorm norm;
  double horizon = 0.5;
  int time_cells = 32;
  std::size_t ensemble = 20;
  std::uint64_t seed = 1;
  int workers = 1;
  SubordinatorSpec spec;
};

struct ConvergenceReport {
  StudyConfig config;
  std::vector<int> cutoffs;
  std::vector<std::vector<double>> norms;  // [cutoff index][sample]
  std::vector<double> mean;
  std::vector<double> se;
  double slope = 0.0;  // least-squares slope of log(mean) vs log(N)
};

// Throws a constraint error naming the violated inequality when the norm
// parameters leave the admissible window of the convergence theory (heat:
// alpha < -epsilon*k and L^gamma time norm with gamma < 2/((1-epsilon)*k);
// wave: alpha < 0, sup-in-time allowed).
void check_study_constraints(const StudyConfig& config);

// Couples X_N and X_{2N} on the same realization (mode-nested noise), records
// the time-norm of the spatial Besov norm of X_{2N}^{ok} - X_N^{ok} per
// sample, and fits the log-log slope of the ensemble means.
ConvergenceReport cauchy_convergence_study(const StudyConfig& config);

}  // namespace wickspde
