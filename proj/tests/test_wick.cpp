#include <cmath>
#include <complex>
#include <vector>

#include "doctest.h"
#include "oracles.hpp"
#include "wickspde/wick.hpp"

using namespace wickspde;

namespace {

using cd = std::complex<double>;

SubordinatorPath poisson_path(double rate, double horizon, std::uint64_t seed) {
  SubordinatorSpec spec;
  spec.kind = LevyKind::poisson;
  spec.rate = rate;
  return sample_subordinator(spec, horizon, seed);
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

// A synthetic one-time convolution holding a fixed field, paired with a
// constant variance, for exercising wick_power without sampling.
struct SyntheticPair {
  StochasticConvolution conv;
  RenormConstants constants;
};

SyntheticPair synthetic(const SpectralField& f, double c) {
  SyntheticPair s;
  s.conv.kind = ConvolutionKind::heat;
  s.conv.cutoff = f.cutoff;
  s.conv.times = {0.0, 0.5};
  s.conv.value = {f, f};
  s.conv.value_left = {f, f};
  s.constants.kind = ConvolutionKind::heat;
  s.constants.cutoff = f.cutoff;
  s.constants.times = s.conv.times;
  s.constants.value = {c, c};
  s.constants.value_left = {c, c};
  return s;
}

StudyConfig small_study(ConvolutionKind kind, int order) {
  StudyConfig cfg;
  cfg.kind = kind;
  cfg.order = order;
  cfg.cutoffs = {2, 4, 8};
  cfg.norm.alpha = -0.5;
  cfg.norm.gamma = 1.0;
  cfg.norm.epsilon = 0.2;
  cfg.norm.sup_time = kind == ConvolutionKind::wave;
  cfg.horizon = 0.25;
  cfg.time_cells = 8;
  cfg.ensemble = 8;
  cfg.seed = 5;
  cfg.spec.kind = LevyKind::poisson;
  cfg.spec.rate = 2.0;
  return cfg;
}

}  // namespace

TEST_SUITE("wick") {

TEST_CASE("hermite closed forms and degenerate variance") {
  for (double x : {-1.7, 0.0, 0.4, 2.3}) {
    CHECK(hermite(2, x, 1.0) == doctest::Approx(x * x - 1.0).epsilon(1e-14));
    CHECK(hermite(3, x, 1.0) == doctest::Approx(x * x * x - 3.0 * x).epsilon(1e-14));
    for (double s2 : {0.3, 2.0})
      CHECK(hermite(2, x, s2) == doctest::Approx(x * x - s2).epsilon(1e-14));
    for (int k = 0; k <= 6; ++k)
      CHECK(hermite(k, x, 0.0) == doctest::Approx(std::pow(x, k)).epsilon(1e-14));
  }
  oracles::TestRng rng(21);
  for (int rep = 0; rep < 50; ++rep) {
    double x = rng.uniform(-2.5, 2.5), s2 = rng.uniform(0.0, 3.0);
    auto all = hermite_all(5, x, s2);
    for (int k = 0; k <= 5; ++k) {
      CHECK(all[static_cast<std::size_t>(k)] ==
            doctest::Approx(hermite(k, x, s2)).epsilon(1e-13));
      CHECK(hermite(k, x, s2) ==
            doctest::Approx(oracles::hermite_ref(k, x, s2)).epsilon(1e-12));
    }
  }
  CHECK_THROWS_AS((void)hermite(-1, 0.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS((void)hermite(2, 0.0, -0.5), std::invalid_argument);
}

TEST_CASE("truncated generating function matches within the Lagrange tail") {
  // e^{tx - s2 t^2/2} = sum_k t^k/k! H_k(x; s2); the degree-6 truncation error
  // is bounded by max_{|s|<=|t|} |H_7(x - s2 s; s2) e^{sx - s2 s^2/2}| |t|^7/7!.
  oracles::TestRng rng(22);
  for (int rep = 0; rep < 40; ++rep) {
    double x = rng.uniform(-2.0, 2.0), s2 = rng.uniform(0.0, 2.0),
           t = rng.uniform(-0.5, 0.5);
    auto h = hermite_all(6, x, s2);
    double sum = 0.0, fact = 1.0;
    for (int k = 0; k <= 6; ++k) {
      if (k > 0) fact *= k;
      sum += std::pow(t, k) / fact * h[static_cast<std::size_t>(k)];
    }
    double target = std::exp(t * x - 0.5 * s2 * t * t);
    double tail = 0.0;
    for (int j = 0; j <= 200; ++j) {
      double s = -std::fabs(t) + 2.0 * std::fabs(t) * j / 200.0;
      tail = std::max(tail, std::fabs(hermite(7, x - s2 * s, s2)) *
                                std::exp(s * x - 0.5 * s2 * s * s));
    }
    double bound = 1.5 * tail * std::pow(std::fabs(t), 7) / 5040.0;
    CHECK(std::fabs(sum - target) <= bound + 1e-15);
  }
}

TEST_CASE("hermite binomial expansion") {
  oracles::TestRng rng(23);
  for (int rep = 0; rep < 100; ++rep) {
    double a = rng.uniform(-2.0, 2.0), b = rng.uniform(-2.0, 2.0),
           c = rng.uniform(0.0, 2.0);
    int k = rng.uniform_int(0, 5);
    double lhs = hermite(k, a + b, c);
    double rhs = 0.0;
    for (int l = 0; l <= k; ++l)
      rhs += oracles::binomial(k, l) * std::pow(a, k - l) * hermite(l, b, c);
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-10));
  }
}

TEST_CASE("first wick power is the field itself") {
  SpectralField f = SpectralField::zero(2);
  f.set_coeff(1, 0, cd(0.4, -0.2));
  f.set_coeff(1, 1, cd(-0.3, 0.1));
  auto s = synthetic(f, 0.9);
  auto w = wick_power(s.conv, s.constants, 1);
  CHECK(w.order == 1);
  for (std::size_t i = 0; i < w.times.size(); ++i)
    for (std::size_t m = 0; m < f.a.size(); ++m)
      CHECK(std::abs(w.value[i].a[m] - s.conv.value[i].a[m]) < 1e-14);
}

TEST_CASE("second wick power subtracts the constant from the square") {
  SpectralField f = SpectralField::zero(2);
  f.set_coeff(0, 0, cd(0.25, 0.0));
  f.set_coeff(2, 1, cd(0.5, 0.7));
  const double c = 1.3;
  auto s = synthetic(f, c);
  auto w = wick_power(s.conv, s.constants, 2);
  SpectralField want = field_product(f, f);
  want -= SpectralField::constant(c);
  for (int l1 = -4; l1 <= 4; ++l1)
    for (int l2 = -4; l2 <= 4; ++l2)
      CHECK(std::abs(w.value[0].coeff(l1, l2) - want.coeff(l1, l2)) < 1e-13);
}

TEST_CASE("third wick power of a cosine matches the symbolic expansion") {
  double a = 0.6, c = 0.8;
  SpectralField f = SpectralField::zero(1);
  f.set_coeff(1, 0, cd(a, 0.0));
  auto s = synthetic(f, c);
  auto w = wick_power(s.conv, s.constants, 3);
  CHECK(w.value[0].cutoff == 3);
  CHECK(std::abs(w.value[0].coeff(3, 0) - cd(a * a * a, 0.0)) < 1e-12);
  CHECK(std::abs(w.value[0].coeff(1, 0) - cd(3.0 * a * a * a - 3.0 * c * a, 0.0)) <
        1e-12);
  CHECK(std::abs(w.value[0].coeff(2, 0)) < 1e-12);
  CHECK(std::abs(w.value[0].coeff(0, 0)) < 1e-12);
  CHECK(std::abs(w.value[0].coeff(1, 1)) < 1e-12);
}

TEST_CASE("wick power refuses mismatched metadata") {
  SpectralField f = SpectralField::zero(2);
  f.set_coeff(1, 0, cd(0.4, 0.0));
  auto s = synthetic(f, 0.5);
  RenormConstants other = s.constants;
  other.cutoff = 3;
  CHECK_THROWS_AS((void)wick_power(s.conv, other, 2), std::invalid_argument);
  other = s.constants;
  other.kind = ConvolutionKind::wave;
  CHECK_THROWS_AS((void)wick_power(s.conv, other, 2), std::invalid_argument);
  other = s.constants;
  other.times = {0.0, 0.75};
  CHECK_THROWS_AS((void)wick_power(s.conv, other, 2), std::invalid_argument);
}

TEST_CASE("spatial mean of a wick power is its zero-mode coefficient") {
  auto path = poisson_path(2.0, 0.5, 61);
  auto grid = grid_with_jumps(path, 4);
  auto noise = sample_mode_noise(path, 2, grid, 17);
  auto conv = heat_convolution(noise, grid);
  auto cons = renorm_constants(ConvolutionKind::heat, path, 2, grid);
  auto w = wick_power(conv, cons, 3);
  const int band = 6, M = 2 * band + 1;
  for (std::size_t i : {std::size_t(0), w.times.size() - 1}) {
    double mean = 0.0;
    for (int ix = 0; ix < M; ++ix)
      for (int iy = 0; iy < M; ++iy)
        mean += w.value[i].value_at(2.0 * 3.14159265358979324 * ix / M,
                                    2.0 * 3.14159265358979324 * iy / M);
    mean /= M * M;
    CHECK(std::fabs(mean - w.value[i].coeff(0, 0).real()) < 1e-12);
  }
}

TEST_CASE("wick powers are centered") {
  auto path = poisson_path(2.0, 0.5, 62);
  auto grid = grid_with_jumps(path, 2);
  auto cons = renorm_constants(ConvolutionKind::heat, path, 2, grid);
  const int n = 3000;
  std::vector<double> v3(n);
  for (int i = 0; i < n; ++i) {
    auto noise = sample_mode_noise(path, 2, grid, 700000 + i);
    auto conv = heat_convolution(noise, grid);
    auto w = wick_power(conv, cons, 3);
    v3[i] = w.value.back().value_at(0.7, -0.3);
  }
  auto ms = oracles::mean_se(v3);
  CHECK(std::fabs(ms.mean) <= 4.0 * ms.se);
}

TEST_CASE("covariance diagnostic: orthogonality, identity, and order two") {
  auto path = poisson_path(1.0, 0.5, 63);

  auto cross = covariance_diagnostic(ConvolutionKind::heat, path, 4, 1, 2, 0.25,
                                     {0.3, 1.1}, 0.5, {0.0, 0.0}, 20000, 91, 2);
  CHECK(cross.predicted == 0.0);
  CHECK(std::fabs(cross.mc_value) <= 4.0 * cross.mc_se);

  auto ident = covariance_diagnostic(ConvolutionKind::heat, path, 4, 1, 1, 0.25,
                                     {0.3, 1.1}, 0.5, {0.0, 0.0}, 1000, 92);
  CHECK(ident.mc_value == doctest::Approx(ident.base_cov).epsilon(1e-12));
  CHECK(ident.predicted == doctest::Approx(ident.base_cov).epsilon(1e-12));

  auto pair2 = covariance_diagnostic(ConvolutionKind::heat, path, 4, 2, 2, 0.5,
                                     {0.0, 0.0}, 0.5, {0.0, 0.0}, 100000, 93, 4);
  CHECK(pair2.predicted == doctest::Approx(2.0 * pair2.base_cov * pair2.base_cov)
                               .epsilon(1e-12));
  CHECK(std::fabs(pair2.mc_value - pair2.predicted) <=
        4.0 * std::sqrt(pair2.mc_se * pair2.mc_se +
                        pair2.predicted_se * pair2.predicted_se));

  CHECK_THROWS_AS((void)covariance_diagnostic(ConvolutionKind::heat, path, 4, 1, 1,
                                              0.25, {0.0, 0.0}, 0.5, {0.0, 0.0},
                                              99, 94),
                  std::invalid_argument);
}

TEST_CASE("study constraint gate names the violated inequality") {
  StudyConfig cfg = small_study(ConvolutionKind::heat, 3);
  cfg.norm.alpha = -0.9;  // satisfies alpha < -epsilon*k = -0.6
  cfg.norm.gamma = 1.0;   // violates gamma < 2/((1-epsilon)k) = 5/6
  try {
    check_study_constraints(cfg);
    FAIL("expected a constraint error");
  } catch (const std::invalid_argument& e) {
    CHECK(std::string(e.what()).find("gamma < 2/((1-epsilon)*k)") !=
          std::string::npos);
  }

  cfg = small_study(ConvolutionKind::heat, 3);
  cfg.norm.alpha = -0.5;  // violates alpha < -epsilon*k = -0.6
  cfg.norm.gamma = 0.5;
  try {
    check_study_constraints(cfg);
    FAIL("expected a constraint error");
  } catch (const std::invalid_argument& e) {
    CHECK(std::string(e.what()).find("alpha < -epsilon*k") != std::string::npos);
  }

  cfg = small_study(ConvolutionKind::heat, 2);
  cfg.norm.sup_time = true;
  CHECK_THROWS_AS(check_study_constraints(cfg), std::invalid_argument);

  cfg = small_study(ConvolutionKind::wave, 3);
  cfg.norm.alpha = 0.1;
  CHECK_THROWS_AS(check_study_constraints(cfg), std::invalid_argument);

  cfg = small_study(ConvolutionKind::wave, 3);
  cfg.norm.alpha = -0.1;
  CHECK_NOTHROW(check_study_constraints(cfg));
  cfg = small_study(ConvolutionKind::heat, 2);
  CHECK_NOTHROW(check_study_constraints(cfg));
}

TEST_CASE("order-one study reports the positive, shrinking projection tails") {
  StudyConfig cfg = small_study(ConvolutionKind::heat, 1);
  auto report = cauchy_convergence_study(cfg);
  REQUIRE(report.mean.size() == 3);
  for (std::size_t i = 0; i < report.norms.size(); ++i)
    for (double v : report.norms[i]) {
      CHECK(std::isfinite(v));
      CHECK(v > 0.0);
    }
  CHECK(report.mean[1] < report.mean[0]);
  CHECK(report.mean[2] < report.mean[1]);
  CHECK(report.slope < 0.0);
}

TEST_CASE("order-two heat study has negative fitted slope") {
  StudyConfig cfg = small_study(ConvolutionKind::heat, 2);
  auto report = cauchy_convergence_study(cfg);
  for (std::size_t i = 0; i < report.mean.size(); ++i) CHECK(report.mean[i] > 0.0);
  CHECK(report.slope < 0.0);
}

}  // TEST_SUITE
