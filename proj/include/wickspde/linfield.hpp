#pragma once

#include <complex>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "wickspde/pathint.hpp"
#include "wickspde/spectral.hpp"
#include "wickspde/subordinator.hpp"

namespace wickspde {

// Kind of linear stochastic evolution the noise is convolved with.
//   heat:                  d u = Laplace(u) dt + dW_L,            u(0) = 0
//   wave:                  d(u, v) with v' = Laplace(u) + W-noise, zero data
//   heat_stationary:       massive heat (Laplace - 1), started in equilibrium
//   damped_wave_stationary: damped massive wave, started in equilibrium
enum class ConvolutionKind {
  heat,
  wave,
  heat_stationary,
  damped_wave_stationary,
};

std::string convolution_kind_name(ConvolutionKind kind);
ConvolutionKind convolution_kind_from_name(const std::string& name);

inline bool is_wave_kind(ConvolutionKind kind) {
  return kind == ConvolutionKind::wave ||
         kind == ConvolutionKind::damped_wave_stationary;
}
inline bool is_stationary_kind(ConvolutionKind kind) {
  return kind == ConvolutionKind::heat_stationary ||
         kind == ConvolutionKind::damped_wave_stationary;
}

// A mode-truncated stochastic convolution sampled on a time grid.  At every
// grid time both the right-continuous value and the left limit are stored
// (they differ exactly at subordinator jump times).  Wave kinds also carry
// the time derivative pair.
struct StochasticConvolution {
  ConvolutionKind kind = ConvolutionKind::heat;
  int cutoff = 0;
  std::vector<double> times;
  std::vector<SpectralField> value;       // u(t)
  std::vector<SpectralField> value_left;  // u(t-)
  std::vector<SpectralField> deriv;       // du/dt(t)   (wave kinds only)
  std::vector<SpectralField> deriv_left;  // du/dt(t-)  (wave kinds only)

  std::size_t index_of(double t) const;  // exact match, throws otherwise
};

// The renormalization constant t -> c_N(t) = E[ u_N(t,x)^2 ] (x-independent)
// for a FIXED realization of the subordinator path, sampled on a grid with
// left limits.
struct RenormConstants {
  ConvolutionKind kind = ConvolutionKind::heat;
  int cutoff = 0;
  std::vector<double> times;
  std::vector<double> value;
  std::vector<double> value_left;

  std::size_t index_of(double t) const;
  double at(double t, Side side = Side::right) const;
};

// Streaming per-mode evaluation of the convolution.  Exact in distribution:
// within every noise cell the drift-part contribution is drawn from its
// conditional law given the stored Brownian increment, and jump-part
// contributions enter with their exact kernel factors.  Deterministic given
// (noise.seed, kind).
class ConvolutionStepper {
 public:
  ConvolutionStepper(ConvolutionKind kind, const ModeNoise& noise);
  ~ConvolutionStepper();
  ConvolutionStepper(ConvolutionStepper&&) noexcept;
  ConvolutionStepper& operator=(ConvolutionStepper&&) noexcept;

  ConvolutionKind kind() const;
  int cutoff() const;
  std::size_t pos() const;          // index into noise grid of current time
  double time() const;
  bool done() const;
  void advance();                   // step to the next noise-grid time

  // Write the current state into fields (allocated to the noise cutoff).
  void emit_value(SpectralField& out, Side side) const;
  void emit_deriv(SpectralField& out, Side side) const;  // wave kinds only

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// Convolution sampled at `timegrid`, which must be a subsequence of
// noise.times (the noise grid refines the output grid).
StochasticConvolution heat_convolution(const ModeNoise& noise,
                                       const std::vector<double>& timegrid);
StochasticConvolution wave_convolution(const ModeNoise& noise,
                                       const std::vector<double>& timegrid);

// Renormalization constants for a fixed subordinator path on an arbitrary
// sorted grid inside [0, path.horizon].  Kind must be heat or wave.
RenormConstants renorm_constants(ConvolutionKind kind,
                                 const SubordinatorPath& path, int cutoff,
                                 const std::vector<double>& timegrid);

// Closed-form time integral int_0^T c_N^heat(t) dt for the deterministic
// subordinator L(t) = t, and the closed-form limit of I(2N) - I(N) as
// N -> infinity (logarithmic divergence increment).
double heat_renorm_time_integral(int cutoff, double horizon);
double heat_renorm_divergence_limit(double horizon);

// Limit of the stationary constants as t_past -> infinity (deterministic
// unit-rate mass; both stationary kinds share it).
double stationary_renorm_limit(int cutoff);

// Stationary convolution: the dynamics are started at time -t_past from zero
// data with an independent copy of the subordinator driving the past, so that
// on [0, horizon] the law is within an exponentially small truncation bias of
// the equilibrium law.  Requires a finite log-moment of the jump measure.
struct StationaryConvolution {
  StochasticConvolution convolution;
  RenormConstants constants;
  double t_past = 0.0;
  double truncation_bias = 0.0;  // bound on the neglected variance mass
};

StationaryConvolution stationary_convolution(ConvolutionKind kind,
                                             const SubordinatorSpec& spec,
                                             int cutoff,
                                             const std::vector<double>& timegrid,
                                             double t_past,
                                             std::uint64_t seed);

}  // namespace wickspde
