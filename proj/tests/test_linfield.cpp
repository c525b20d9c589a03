#include <cmath>
#include <complex>
#include <vector>

#include "doctest.h"
#include "oracles.hpp"
#include "wickspde/linfield.hpp"

using namespace wickspde;

namespace {

using cd = std::complex<double>;

constexpr double kTwoPi = 6.283185307179586476925286766559;

SubordinatorPath pure_jump_path(std::vector<double> times, std::vector<double> sizes,
                                double horizon) {
  SubordinatorPath p;
  p.spec.kind = LevyKind::compound_poisson;
  p.spec.rate = 1.0;
  p.horizon = horizon;
  p.drift_eff = 0.0;
  p.jump_times = std::move(times);
  p.jump_sizes = std::move(sizes);
  return p;
}

SubordinatorPath unit_drift_path(double horizon) {
  SubordinatorSpec lin;
  lin.kind = LevyKind::deterministic_linear;
  lin.drift = 1.0;
  return sample_subordinator(lin, horizon, 1);
}

std::vector<double> grid_with_jumps(const SubordinatorPath& path, int cells) {
  std::vector<double> g{0.0};
  for (int i = 1; i <= cells; ++i)
    g.push_back(path.horizon * static_cast<double>(i) / cells);
  g.insert(g.end(), path.jump_times.begin(), path.jump_times.end());
  std::sort(g.begin(), g.end());
  g.erase(std::unique(g.begin(), g.end()), g.end());
  return g;
}

}  // namespace

TEST_SUITE("linfield") {

TEST_CASE("zero noise convolves to the zero field") {
  SubordinatorSpec still;
  still.kind = LevyKind::deterministic_linear;
  still.drift = 0.0;
  auto path = sample_subordinator(still, 1.0, 1);
  std::vector<double> grid{0.0, 0.3, 0.7, 1.0};
  auto noise = sample_mode_noise(path, 3, grid, 7);
  for (auto kind : {ConvolutionKind::heat, ConvolutionKind::wave}) {
    auto conv = kind == ConvolutionKind::heat ? heat_convolution(noise, grid)
                                              : wave_convolution(noise, grid);
    for (std::size_t i = 0; i < conv.times.size(); ++i) {
      for (const auto& z : conv.value[i].a) CHECK(z == cd(0.0, 0.0));
      if (kind == ConvolutionKind::wave)
        for (const auto& z : conv.deriv[i].a) CHECK(z == cd(0.0, 0.0));
    }
  }
}

TEST_CASE("single-jump paths reproduce the closed-form kernels") {
  const double s0 = 0.4;
  auto path = pure_jump_path({s0}, {1.3}, 1.0);
  std::vector<double> grid{0.0, 0.2, s0, 0.7, 1.0};
  auto noise = sample_mode_noise(path, 3, grid, 9);
  std::size_t nm = noise.modes->size();
  auto heat = heat_convolution(noise, grid);
  auto wave = wave_convolution(noise, grid);

  for (std::size_t m = 0; m < nm; ++m) {
    auto l = (*noise.modes)[m];
    double l2 = static_cast<double>(l.norm2());
    double ab = std::sqrt(l2);
    cd xi = noise.jump[1 * nm + m];  // the cell (0.2, s0] ending at s0

    for (double t : {0.2}) {
      std::size_t i = heat.index_of(t);
      CHECK(std::abs(heat.value[i].a[m]) == 0.0);
      CHECK(std::abs(wave.value[i].a[m]) == 0.0);
    }
    for (double t : {s0, 0.7, 1.0}) {
      std::size_t i = heat.index_of(t);
      cd want_h = xi * std::exp((s0 - t) * l2) / kTwoPi;
      cd want_w = xi * (ab == 0.0 ? (t - s0) : std::sin((t - s0) * ab) / ab) / kTwoPi;
      cd want_d = xi * std::cos((t - s0) * ab) / kTwoPi;
      CHECK(std::abs(heat.value[i].a[m] - want_h) < 1e-12);
      CHECK(std::abs(wave.value[i].a[m] - want_w) < 1e-12);
      CHECK(std::abs(wave.deriv[i].a[m] - want_d) < 1e-12);
    }

    // Contrast at the jump: the heat field jumps by xi/(2 pi), the wave field
    // is continuous and only its derivative jumps.
    std::size_t j = heat.index_of(s0);
    CHECK(std::abs(heat.value[j].a[m] - heat.value_left[j].a[m] - xi / kTwoPi) <
          1e-14);
    CHECK(std::abs(wave.value[j].a[m] - wave.value_left[j].a[m]) == 0.0);
    CHECK(std::abs(wave.deriv[j].a[m] - wave.deriv_left[j].a[m] - xi / kTwoPi) <
          1e-14);
  }
}

TEST_CASE("mode variance under unit-rate time change matches the kernel integral") {
  auto path = unit_drift_path(0.3);
  std::vector<double> grid{0.0, 0.15, 0.3};
  const double t = 0.3, l2 = 2.0;
  const double want = (1.0 - std::exp(-2.0 * t * l2)) / (2.0 * l2) / (kTwoPi * kTwoPi);
  const int n = 100000;
  std::vector<double> sq(n);
  for (int i = 0; i < n; ++i) {
    auto noise = sample_mode_noise(path, 2, grid, 200000 + i);
    auto conv = heat_convolution(noise, grid);
    sq[i] = std::norm(conv.value[conv.index_of(t)].coeff(1, 1));
  }
  auto ms = oracles::mean_se(sq);
  CHECK(std::fabs(ms.mean - want) <= 4.0 * ms.se);
}

TEST_CASE("brownian mode integrals satisfy the conjugate-pair isometry") {
  SubordinatorSpec spec;
  spec.kind = LevyKind::compound_poisson;
  spec.rate = 3.0;
  spec.jump_law = JumpLaw::exponential;
  spec.jump_a = 0.4;
  spec.drift = 0.5;
  auto path = sample_subordinator(spec, 0.5, 42);
  auto grid = grid_with_jumps(path, 4);
  const double t = 0.5;
  const int n = 20000;
  std::vector<double> same(n), cross_re(n);
  for (int i = 0; i < n; ++i) {
    auto noise = sample_mode_noise(path, 1, grid, 500000 + i);
    auto conv = heat_convolution(noise, grid);
    cd a = kTwoPi * conv.value[conv.index_of(t)].coeff(1, 0);
    cd b = kTwoPi * conv.value[conv.index_of(t)].coeff(0, 1);
    same[i] = std::norm(a);  // a * conj(a) = a * (coeff at -l)
    cross_re[i] = (a * b).real();
  }
  double want = stieltjes_integral(
      [&](double s) { return std::exp(2.0 * (s - t)); }, path, 0.0, t);
  auto ms_same = oracles::mean_se(same);
  auto ms_cross = oracles::mean_se(cross_re);
  CHECK(std::fabs(ms_same.mean - want) <= 4.0 * ms_same.se);
  CHECK(std::fabs(ms_cross.mean) <= 4.0 * ms_cross.se);
}

TEST_CASE("renormalization constants start at zero and grow with the cutoff") {
  SubordinatorSpec spec;
  spec.kind = LevyKind::compound_poisson;
  spec.rate = 4.0;
  spec.jump_law = JumpLaw::uniform;
  spec.jump_a = 0.2;
  spec.jump_b = 0.9;
  spec.drift = 0.25;
  auto path = sample_subordinator(spec, 1.0, 77);
  auto grid = grid_with_jumps(path, 8);
  for (auto kind : {ConvolutionKind::heat, ConvolutionKind::wave}) {
    auto c3 = renorm_constants(kind, path, 3, grid);
    auto c6 = renorm_constants(kind, path, 6, grid);
    CHECK(c3.value.front() == 0.0);
    CHECK(c3.value_left.front() == 0.0);
    for (std::size_t i = 0; i < grid.size(); ++i) {
      CHECK(c3.value[i] >= 0.0);
      CHECK(c3.value[i] <= c6.value[i]);
      CHECK(c3.value_left[i] <= c3.value[i] + 1e-15);  // mass only accumulates
    }
  }
}

TEST_CASE("heat constants under unit-rate time change have elementary values") {
  auto path = unit_drift_path(0.5);
  std::vector<double> grid{0.0, 0.1, 0.3, 0.5};
  const int N = 6;
  auto c = renorm_constants(ConvolutionKind::heat, path, N, grid);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    double t = grid[i], want = 0.0;
    for (int l1 = -N; l1 <= N; ++l1)
      for (int l2 = -N; l2 <= N; ++l2) {
        int r2 = l1 * l1 + l2 * l2;
        if (r2 > N * N) continue;
        want += r2 == 0 ? t : (1.0 - std::exp(-2.0 * t * r2)) / (2.0 * r2);
      }
    want /= kTwoPi * kTwoPi;
    CHECK(c.value[i] == doctest::Approx(want).epsilon(1e-8));
  }
}

TEST_CASE("constants equal the monte-carlo second moment of the field") {
  auto path = pure_jump_path({0.15, 0.34}, {0.8, 1.4}, 0.5);
  path.drift_eff = 0.6;
  std::vector<double> grid{0.0, 0.15, 0.25, 0.34, 0.5};
  const double t = 0.5;
  const int n = 4000;
  for (auto kind : {ConvolutionKind::heat, ConvolutionKind::wave}) {
    auto c = renorm_constants(kind, path, 4, grid);
    std::vector<double> sq(n);
    for (int i = 0; i < n; ++i) {
      auto noise = sample_mode_noise(path, 4, grid, 900000 + i);
      auto conv = kind == ConvolutionKind::heat ? heat_convolution(noise, grid)
                                                : wave_convolution(noise, grid);
      double v = conv.value[conv.index_of(t)].value_at(0.0, 0.0);
      sq[i] = v * v;
    }
    auto ms = oracles::mean_se(sq);
    CHECK(std::fabs(ms.mean - c.at(t)) <= 4.0 * ms.se);
  }
}

TEST_CASE("wave increments over jump-free cells shrink linearly with the step") {
  SubordinatorSpec spec;
  spec.kind = LevyKind::compound_poisson;
  spec.rate = 3.0;
  spec.jump_law = JumpLaw::uniform;
  spec.jump_a = 0.5;
  spec.jump_b = 1.5;
  // This seed jumps early (t ~ 0.07), so coarse jump-free windows carry a
  // live rotating state rather than the pre-first-jump zero field.
  auto path = sample_subordinator(spec, 1.0, 316);
  REQUIRE(!path.jump_times.empty());
  REQUIRE(path.jump_times.front() < 0.125);
  auto grid = grid_with_jumps(path, 128);
  auto noise = sample_mode_noise(path, 3, grid, 11);
  auto conv = wave_convolution(noise, grid);

  auto max_increment = [&](int stride_cells) {
    double h = stride_cells / 128.0, mx = 0.0;
    for (int k = 0; k + stride_cells <= 128; k += stride_cells) {
      double t0 = k / 128.0, t1 = t0 + h;
      bool has_jump = false;
      for (double s : path.jump_times)
        if (s > t0 && s <= t1) has_jump = true;
      if (has_jump) continue;
      std::size_t i0 = conv.index_of(t0), i1 = conv.index_of(t1);
      for (std::size_t m = 0; m < conv.value[i0].a.size(); ++m)
        mx = std::max(mx, std::abs(conv.value[i1].a[m] - conv.value[i0].a[m]));
    }
    return mx;
  };
  double m16 = max_increment(16), m8 = max_increment(8), m4 = max_increment(4),
         m2 = max_increment(2);
  CHECK(m8 <= 0.7 * m16);
  CHECK(m4 <= 0.7 * m8);
  CHECK(m2 <= 0.7 * m4);
  CHECK(m2 <= 0.25 * m16);
}

TEST_CASE("time integral of the heat constants: closed form and divergence rate") {
  const double T = 0.5;
  for (int N : {16, 64}) {
    double want = 0.0;
    for (int l1 = -N; l1 <= N; ++l1)
      for (int l2 = -N; l2 <= N; ++l2) {
        int r2 = l1 * l1 + l2 * l2;
        if (r2 > N * N) continue;
        double lam = static_cast<double>(r2);
        want += r2 == 0 ? T * T / 2.0
                        : T / (2.0 * lam) -
                              (1.0 - std::exp(-2.0 * T * lam)) / (4.0 * lam * lam);
      }
    want /= kTwoPi * kTwoPi;
    CHECK(heat_renorm_time_integral(N, T) == doctest::Approx(want).epsilon(1e-10));
  }

  double limit = heat_renorm_divergence_limit(T);
  CHECK(limit == doctest::Approx(T * std::log(2.0) / (4.0 * 3.14159265358979324))
                     .epsilon(1e-12));
  for (int N : {64, 128}) {
    double inc = heat_renorm_time_integral(2 * N, T) - heat_renorm_time_integral(N, T);
    CHECK(std::fabs(inc - limit) <= 0.10 * limit);
  }
}

TEST_CASE("stationary constants are time-independent and converge in the past horizon") {
  SubordinatorSpec lin;
  lin.kind = LevyKind::deterministic_linear;
  lin.drift = 1.0;
  const int N = 4;
  std::vector<double> grid{0.0, 0.25, 0.5};

  double limit = stationary_renorm_limit(N);
  double direct = 0.0;
  for (int l1 = -N; l1 <= N; ++l1)
    for (int l2 = -N; l2 <= N; ++l2) {
      int r2 = l1 * l1 + l2 * l2;
      if (r2 > N * N) continue;
      direct += 1.0 / (2.0 * (1.0 + r2));
    }
  direct /= kTwoPi * kTwoPi;
  CHECK(limit == doctest::Approx(direct).epsilon(1e-12));

  auto s5 = stationary_convolution(ConvolutionKind::heat_stationary, lin, N, grid, 5.0, 3);
  auto s10 =
      stationary_convolution(ConvolutionKind::heat_stationary, lin, N, grid, 10.0, 3);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    CHECK(std::fabs(s5.constants.value[i] - s10.constants.value[i]) < 1e-6);
    CHECK(std::fabs(s10.constants.value[i] - limit) < 1e-6);
    CHECK(std::fabs(s10.constants.value[i] - s10.constants.value[0]) < 1e-10);
  }

  // The damped-wave kernel decays like e^{-s/2}, so the truncated-past tail
  // is ~ e^{-t_past}/(2 pi)^2; t_past = 24 pushes it below the tolerance.
  auto w24 = stationary_convolution(ConvolutionKind::damped_wave_stationary, lin, N,
                                    grid, 24.0, 3);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    CHECK(std::fabs(w24.constants.value[i] - limit) < 1e-5);
    CHECK(std::fabs(w24.constants.value[i] - w24.constants.value[0]) < 1e-9);
  }
}

TEST_CASE("stationary field second moments do not depend on the time point") {
  SubordinatorSpec gam;
  gam.kind = LevyKind::gamma;
  gam.gamma_shape = 1.0;
  gam.gamma_rate = 1.0;
  gam.truncation = 1e-2;
  std::vector<double> grid{0.0, 0.5, 1.5};
  const int n = 4000;
  std::vector<double> diff(n);
  for (int i = 0; i < n; ++i) {
    auto s = stationary_convolution(ConvolutionKind::heat_stationary, gam, 2, grid,
                                    5.0, 40000 + i);
    double a = std::norm(s.convolution.value[1].coeff(1, 0));
    double b = std::norm(s.convolution.value[2].coeff(1, 0));
    diff[i] = a - b;
  }
  auto ms = oracles::mean_se(diff);
  CHECK(std::fabs(ms.mean) <= 4.0 * ms.se);
}

TEST_CASE("degenerate and inadmissible stationary specs") {
  std::vector<double> grid{0.0, 0.5};
  SubordinatorSpec still;
  still.kind = LevyKind::deterministic_linear;
  still.drift = 0.0;
  auto s = stationary_convolution(ConvolutionKind::heat_stationary, still, 2, grid,
                                  4.0, 1);
  for (const auto& f : s.convolution.value)
    for (const auto& z : f.a) CHECK(z == cd(0.0, 0.0));
  for (double c : s.constants.value) CHECK(c == 0.0);
  CHECK(s.truncation_bias == 0.0);

  SubordinatorSpec bad;
  bad.kind = LevyKind::custom_log_divergent;
  try {
    stationary_convolution(ConvolutionKind::heat_stationary, bad, 2, grid, 4.0, 1);
    FAIL("expected a stationarity-unsupported error");
  } catch (const std::invalid_argument& e) {
    CHECK(std::string(e.what()).find("stationarity-unsupported") != std::string::npos);
  }
}

TEST_CASE("reported truncation bias is the decayed mean mass rate") {
  SubordinatorSpec spec;
  spec.kind = LevyKind::compound_poisson;
  spec.rate = 2.0;
  spec.jump_law = JumpLaw::exponential;
  spec.jump_a = 0.5;
  spec.drift = 0.3;
  std::vector<double> grid{0.0, 0.25};
  auto sh =
      stationary_convolution(ConvolutionKind::heat_stationary, spec, 2, grid, 5.0, 9);
  CHECK(sh.truncation_bias == doctest::Approx(std::exp(-10.0) * 1.3).epsilon(1e-12));
  auto sw = stationary_convolution(ConvolutionKind::damped_wave_stationary, spec, 2,
                                   grid, 5.0, 9);
  CHECK(sw.truncation_bias == doctest::Approx(std::exp(-5.0) * 1.3).epsilon(1e-12));
}

}  // TEST_SUITE
