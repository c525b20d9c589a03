#pragma once
// Nondecreasing cadlag subordinator paths: sampling (finite-activity directly,
// infinite-activity via small-jump truncation with drift compensation),
// cadlag evaluation, Stieltjes integration, and the log-moment gate used by the
// stationary constructions.

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

namespace wickspde {

enum class LevyKind {
  deterministic_linear,
  poisson,
  compound_poisson,
  gamma,
  tempered_stable,
  // rho(dx) = dx / (x log^2 x) on (e, inf): total mass 1 but divergent log-moment.
  // Exists to exercise check_log_moment; sampling is unsupported.
  custom_log_divergent,
};

std::string kind_name(LevyKind kind);
LevyKind kind_from_name(const std::string& name);

enum class JumpLaw { fixed, exponential, uniform };

struct SubordinatorSpec {
  LevyKind kind = LevyKind::deterministic_linear;
  double drift = 0.0;  // b >= 0

  // poisson (unit jumps) and compound-poisson
  double rate = 0.0;
  JumpLaw jump_law = JumpLaw::fixed;
  double jump_a = 1.0;  // fixed: size; exponential: mean; uniform: lower bound
  double jump_b = 1.0;  // uniform: upper bound

  // gamma: Levy density a x^{-1} e^{-lambda x}
  double gamma_shape = 1.0;
  double gamma_rate = 1.0;

  // tempered-stable: Levy density c x^{-1-alpha} e^{-theta x}
  double stable_c = 1.0;
  double stable_alpha = 0.5;
  double stable_theta = 1.0;

  double truncation = 0.0;  // eps > 0 required for infinite-activity kinds

  bool infinite_activity() const {
    return kind == LevyKind::gamma || kind == LevyKind::tempered_stable;
  }
  void validate() const;  // throws std::invalid_argument naming the parameter

  // Levy density rho(x) for kinds that have one (gamma, tempered-stable, custom,
  // and compound-poisson with a continuous jump law).
  double levy_density(double x) const;
  bool has_levy_density() const;

  // Jump intensity of sizes > eps and the compensating drift  int_0^eps x rho(dx).
  double truncated_rate() const;
  double compensator_drift() const;
  // E L(1) = b + int_0^inf x rho(dx); +inf when the mean is infinite.
  double mean_mass_rate() const;
};

struct SubordinatorPath {
  SubordinatorSpec spec;
  double horizon = 0.0;
  double drift_eff = 0.0;  // b_eff = b + compensated small-jump mass
  std::vector<double> jump_times;  // strictly increasing, in (0, horizon]
  std::vector<double> jump_sizes;  // all > 0

  double value(double t) const;       // L(t), right-continuous
  double left_value(double t) const;  // L(t-)
  double mass() const { return value(horizon); }
  void validate() const;
};

enum class Side { left, right };

SubordinatorPath sample_subordinator(const SubordinatorSpec& spec, double horizon,
                                     std::uint64_t seed);

double evaluate_cadlag(const SubordinatorPath& path, double t, Side side);

// b_eff * int_a^b f ds (adaptive quadrature, rel. tol 1e-10) + sum_{a < t_j <= b} f(t_j) dL_j.
double stieltjes_integral(const std::function<double(double)>& f,
                          const SubordinatorPath& path, double a, double b);

struct LogMomentReport {
  bool finite = false;
  double value = 0.0;  // the integral when finite, the divergence witness otherwise
  int windows = 0;     // dyadic tail windows inspected
};

// int (0 v log x) rho(dx), with divergence detection by tail-window growth.
LogMomentReport check_log_moment(const SubordinatorSpec& spec);

// Line-oriented text round-trip (17 significant digits).
void write_path(std::ostream& os, const SubordinatorPath& path);
SubordinatorPath read_path(std::istream& is);

}  // namespace wickspde
