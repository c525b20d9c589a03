#include "wickspde/fft.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cstring>
#include <map>
#include <mutex>
#include <stdexcept>

namespace wickspde {

namespace {
// FFTW plan creation/destruction is not thread-safe; execution on distinct
// buffers is.
std::mutex& plan_mutex() {
  static std::mutex mu;
  return mu;
}
}  // namespace

FftGrid::FftGrid(int size) : size_(size) {
  if (size < 4 || size % 2 != 0) throw std::invalid_argument("FftGrid: size must be even, >= 4");
  std::size_t n_real = static_cast<std::size_t>(size) * size;
  real_ = fftw_alloc_real(n_real);
  spec_ = reinterpret_cast<std::complex<double>*>(fftw_alloc_complex(spec_len()));
  if (!real_ || !spec_) throw std::bad_alloc();
  std::lock_guard<std::mutex> lk(plan_mutex());
  plan_fwd_ = fftw_plan_dft_r2c_2d(size, size, real_, reinterpret_cast<fftw_complex*>(spec_),
                                   FFTW_ESTIMATE);
  plan_bwd_ = fftw_plan_dft_c2r_2d(size, size, reinterpret_cast<fftw_complex*>(spec_), real_,
                                   FFTW_ESTIMATE);
  if (!plan_fwd_ || !plan_bwd_) throw std::runtime_error("FftGrid: planning failed");
}

FftGrid::~FftGrid() {
  std::lock_guard<std::mutex> lk(plan_mutex());
  fftw_destroy_plan(static_cast<fftw_plan>(plan_fwd_));
  fftw_destroy_plan(static_cast<fftw_plan>(plan_bwd_));
  fftw_free(real_);
  fftw_free(spec_);
}

void FftGrid::zero_spec() { std::fill(spec_, spec_ + spec_len(), 0.0); }

void FftGrid::forward() { fftw_execute(static_cast<fftw_plan>(plan_fwd_)); }

void FftGrid::backward() { fftw_execute(static_cast<fftw_plan>(plan_bwd_)); }

int FftGrid::fast_size(int n) {
  n = std::max(n, 4);
  for (int g = n + (n % 2); ; g += 2) {
    int r = g;
    for (int f : {2, 3, 5})
      while (r % f == 0) r /= f;
    if (r == 1) return g;
  }
}

FftGrid& FftGrid::shared(int size) {
  thread_local std::map<int, std::unique_ptr<FftGrid>> pool;
  auto& slot = pool[size];
  if (!slot) slot = std::make_unique<FftGrid>(size);
  return *slot;
}

}  // namespace wickspde
