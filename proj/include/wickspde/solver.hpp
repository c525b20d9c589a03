#pragma once

#include <vector>

#include "wickspde/wick.hpp"

namespace wickspde {

// Remainder-equation solvers: u = X + v where X is the stochastic convolution
// and v solves the mild equation driven by renormalized powers of X.
//   heat (quadratic): dv/dt = Lap(v) + sign*(v^2 + 2 v Phi + Phi^{o2})
//   wave (degree k):  d2v/dt2 = Lap(v) + sign*sum_l C(k,l) v^{k-l} Psi^{ol}
struct SolveConfig {
  double sign = -1.0;  // +1 or -1 in front of the renormalized power
  int order = 2;       // heat: must be 2; wave: >= 2
  int cutoff = 0;      // solver cutoff M >= order * (base cutoff of the data)
  double dt = 1e-3;
  double horizon = 0.5;
  double blowup_radius = 10.0;  // gate R on the monitored norm
  double picard_tol = 1e-9;
  int picard_max = 50;
  int max_halvings = 8;
  bool nonlinear = true;  // false drops every v-dependent forcing term
  // Monitored-norm parameters. Heat gates on B^{-delta}_{inf,inf} and records
  // B^{2/gamma-delta}_{inf,inf}; wave gates on max of the recorded pair
  // (H^{1-epsilon} for v, H^{-epsilon} for dv/dt).
  double gamma = 1.0;
  double delta = 0.5;
  double epsilon = 0.5;
  SpectralField u0;  // initial value (cutoff <= M)
  SpectralField u1;  // initial velocity, wave only
};

struct SolutionPath {
  ConvolutionKind wick_kind = ConvolutionKind::heat;
  int wick_order = 0;   // highest forcing order
  int wick_cutoff = 0;  // base cutoff N of the forcing data
  int cutoff = 0;       // solver cutoff M
  std::vector<double> times;
  std::vector<SpectralField> v;
  std::vector<SpectralField> vdot;        // wave only
  std::vector<double> monitored;          // heat: B^{-delta}; wave: H^{1-eps}(v)
  std::vector<double> recorded;           // heat: B^{2/gamma-delta}; wave: H^{-eps}(vdot)
  std::vector<int> picard_iterations;     // per accepted output step
  bool blew_up = false;
  double exit_time = 0.0;  // last accepted time when blew_up is set
};

// Exponential-trapezoidal stepping with an in-step Picard loop and step
// halving; halts early with the blow-up flag when the monitored norm exceeds
// the configured radius.  Forcing data must live on a grid refining the
// solver's output grid.
SolutionPath solve_heat_quadratic(const WickPower& phi, const WickPower& phi2,
                                  const SolveConfig& cfg);
// psi[l] must carry order l for l = 0..k (order 0 is the constant field 1).
SolutionPath solve_wave_polynomial(const std::vector<WickPower>& psi,
                                   const SolveConfig& cfg);

// A-posteriori check: re-evaluates the right side of the mild equation at the
// final time with 4x refined quadrature (solution linearly interpolated in
// time, data looked up as cadlag steps) and returns the monitored-norm
// discrepancy.
double mild_residual(const SolutionPath& sol, const WickPower& phi,
                     const WickPower& phi2, const SolveConfig& cfg);
double mild_residual(const SolutionPath& sol, const std::vector<WickPower>& psi,
                     const SolveConfig& cfg);

}  // namespace wickspde
