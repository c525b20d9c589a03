#pragma once
// Deterministic random streams. Every logical stream is keyed by mixing a master
// seed with small integer tags (purpose, mode index, realization index), so results
// do not depend on evaluation order, mode-set size, ensemble size, or worker count.

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <random>
#include <utility>

namespace wickspde {

// Bijective 64-bit mixer (splitmix64 finalizer). Also usable as a counter-based
// generator: splitmix(key + GOLDEN * counter) gives independent-looking words.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Fold a list of tags into a single stream key.
constexpr std::uint64_t mix_key(std::initializer_list<std::uint64_t> tags) {
  std::uint64_t k = 0x6a09e667f3bcc909ULL;
  for (std::uint64_t t : tags) k = splitmix64(k ^ splitmix64(t));
  return k;
}

// Map a 64-bit word to (0,1); never returns 0 or 1 exactly.
constexpr double u64_to_unit(std::uint64_t x) {
  return (static_cast<double>(x >> 11) + 0.5) * 0x1.0p-53;
}

// Sequential generator for one logical stream.
class Rng {
 public:
  explicit Rng(std::uint64_t key) : eng_(splitmix64(key)) {}

  std::mt19937_64& engine() { return eng_; }

  double uniform() { return u64_to_unit(eng_()); }

  // Box-Muller standard normal; the spare is cached so a stream consumes exactly
  // one pair of uniforms per two gaussians.
  double gaussian() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = uniform(), u2 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    double a = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(a);
    has_spare_ = true;
    return r * std::cos(a);
  }

  double exponential(double rate) { return -std::log(uniform()) / rate; }

  long long poisson(double mean) {
    std::poisson_distribution<long long> d(mean);
    return d(eng_);
  }

  double gamma(double shape, double rate) {
    std::gamma_distribution<double> d(shape, 1.0 / rate);
    return d(eng_);
  }

 private:
  std::mt19937_64 eng_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

// Counter-based standard normals: the value depends only on (key, counter), so
// draws can be consumed in any order. Used for kernel-coupling residuals inside
// convolutions where evaluation order is an implementation detail.
inline std::pair<double, double> gaussian_pair_at(std::uint64_t key, std::uint64_t counter) {
  std::uint64_t h = splitmix64(key + 0xda942042e4dd58b5ULL * counter);
  double u1 = u64_to_unit(h);
  double u2 = u64_to_unit(splitmix64(h ^ 0x589965cc75374cc3ULL));
  double r = std::sqrt(-2.0 * std::log(u1));
  double a = 6.283185307179586476925286766559 * u2;
  return {r * std::cos(a), r * std::sin(a)};
}

}  // namespace wickspde
