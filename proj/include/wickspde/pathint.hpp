#pragma once
// Subordinated Brownian mode increments, left-point Young sums against sampled
// paths, and exact grid p-variation.

#include <complex>
#include <cstdint>
#include <memory>
#include <vector>

#include "wickspde/modes.hpp"
#include "wickspde/subordinator.hpp"

namespace wickspde {

// A path sampled on a strictly increasing time grid. `continuous[i] == 0` marks a
// known discontinuity at times[i] (the stored value is the right limit).
struct GridPath {
  std::vector<double> times;
  std::vector<double> values;
  std::vector<unsigned char> continuous;  // empty means all-continuous
  void validate() const;
};

struct ComplexGridPath {
  std::vector<double> times;
  std::vector<std::complex<double>> values;
  std::vector<unsigned char> continuous;
  void validate() const;
};

// Increments of beta^l(L(t)) over grid cells for all |l| <= N. Cell i spans
// (times[i], times[i+1]]; each cell's increment is split into the part driven by
// the drift of L and the part driven by the jump at the cell's right endpoint
// (zero when there is none). Jumps of L are required to be grid points, so the
// split is exact. Hermitian symmetry holds by construction: only the canonical
// half of the mode set is drawn, the rest mirrored by conjugation.
struct ModeNoise {
  int cutoff = 0;
  std::uint64_t seed = 0;  // convolution kernels derive coupled residual streams from this
  std::shared_ptr<const ModeSet> modes;
  SubordinatorPath path;
  std::vector<double> times;
  std::vector<double> cell_drift_mass;  // b_eff * cell length
  std::vector<double> cell_jump_mass;   // jump size at the right endpoint, else 0
  // Layout: [cell * n_modes + mode_index].
  std::vector<std::complex<double>> drift;
  std::vector<std::complex<double>> jump;

  std::size_t n_cells() const { return times.empty() ? 0 : times.size() - 1; }
  std::complex<double> increment(std::size_t cell, std::size_t mode) const {
    return drift[cell * modes->size() + mode] + jump[cell * modes->size() + mode];
  }
  // Mode-nested restriction: same realization, smaller ball.
  ModeNoise restricted(int smaller_cutoff) const;
};

// Grid must be sorted, lie in [0, path.horizon], include 0 and the horizon of
// interest, and contain every jump time of the path (grid error otherwise).
ModeNoise sample_mode_noise(const SubordinatorPath& path, int cutoff,
                            const std::vector<double>& timegrid, std::uint64_t seed);

struct YoungOptions {
  bool allow_linear_interp_f = false;
};

// Left-point sum sum_i f(u_{i-1}) (g(u_i) - g(u_{i-1})) over g's stored grid
// restricted to [a,b]. f is looked up exactly at those points, or linearly
// interpolated when explicitly enabled. Exact for pure-jump g whose jumps are
// grid points.
double young_integral(const GridPath& f, const GridPath& g, double a, double b,
                      YoungOptions opts = {});
std::complex<double> young_integral(const GridPath& f, const ComplexGridPath& g, double a,
                                    double b, YoungOptions opts = {});

// Exact sup over subsequences of the stored grid of (sum |dg|^p)^(1/p), by dynamic
// programming after a lossless reduction of real paths to weak local extrema.
// Lower bound for the true path p-variation; exact when g is piecewise constant
// with jumps at grid points.
double p_variation(const GridPath& g, double p);

}  // namespace wickspde
