#pragma once
// Real <-> half-complex 2-D transforms on G x G grids (FFTW backend), with plan
// caching and a per-thread workspace pool. Synthesis uses the e^{+il.x} sign, so
// coefficients are exactly the field's amplitudes.

#include <complex>
#include <memory>
#include <vector>

namespace wickspde {

class FftGrid {
 public:
  explicit FftGrid(int size);
  ~FftGrid();
  FftGrid(const FftGrid&) = delete;
  FftGrid& operator=(const FftGrid&) = delete;

  int size() const { return size_; }
  double* real_buf() { return real_; }
  std::complex<double>* spec_buf() { return spec_; }
  std::size_t spec_len() const {
    return static_cast<std::size_t>(size_) * (size_ / 2 + 1);
  }

  void zero_spec();
  void forward();   // real_buf -> spec_buf, unnormalized (divide by G^2 for amplitudes)
  void backward();  // spec_buf -> real_buf (destroys spec_buf contents)

  // Smallest even 2^a 3^b 5^c size >= n.
  static int fast_size(int n);
  // Per-thread pooled instance for this size.
  static FftGrid& shared(int size);

 private:
  int size_;
  double* real_;
  std::complex<double>* spec_;
  void* plan_fwd_;
  void* plan_bwd_;
};

}  // namespace wickspde
