#include "wickspde/subordinator.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/expint.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "wickspde/rng.hpp"
#include "wickspde/util.hpp"

namespace wickspde {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double quad(const std::function<double(double)>& f, double a, double b) {
  using boost::math::quadrature::gauss_kronrod;
  return gauss_kronrod<double, 15>::integrate(f, a, b, 15, 1e-10);
}

}  // namespace

std::string kind_name(LevyKind kind) {
  switch (kind) {
    case LevyKind::deterministic_linear: return "deterministic-linear";
    case LevyKind::poisson: return "poisson";
    case LevyKind::compound_poisson: return "compound-poisson";
    case LevyKind::gamma: return "gamma";
    case LevyKind::tempered_stable: return "tempered-stable";
    case LevyKind::custom_log_divergent: return "custom-log-divergent";
  }
  throw std::logic_error("kind_name: bad enum");
}

LevyKind kind_from_name(const std::string& name) {
  if (name == "deterministic-linear") return LevyKind::deterministic_linear;
  if (name == "poisson") return LevyKind::poisson;
  if (name == "compound-poisson") return LevyKind::compound_poisson;
  if (name == "gamma") return LevyKind::gamma;
  if (name == "tempered-stable") return LevyKind::tempered_stable;
  if (name == "custom-log-divergent") return LevyKind::custom_log_divergent;
  throw std::invalid_argument("unknown subordinator kind: " + name);
}

void SubordinatorSpec::validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw std::invalid_argument(std::string("subordinator spec: ") + what);
  };
  require(drift >= 0.0, "drift must be >= 0");
  switch (kind) {
    case LevyKind::deterministic_linear:
      break;
    case LevyKind::poisson:
      require(rate > 0.0, "poisson rate must be > 0");
      break;
    case LevyKind::compound_poisson:
      require(rate > 0.0, "compound-poisson rate must be > 0");
      if (jump_law == JumpLaw::fixed) require(jump_a > 0.0, "fixed jump size must be > 0");
      if (jump_law == JumpLaw::exponential)
        require(jump_a > 0.0, "exponential jump mean must be > 0");
      if (jump_law == JumpLaw::uniform)
        require(jump_a > 0.0 && jump_b > jump_a, "uniform jump bounds need 0 < lo < hi");
      break;
    case LevyKind::gamma:
      require(gamma_shape > 0.0, "gamma shape must be > 0");
      require(gamma_rate > 0.0, "gamma rate must be > 0");
      break;
    case LevyKind::tempered_stable:
      require(stable_c > 0.0, "tempered-stable c must be > 0");
      require(stable_alpha > 0.0 && stable_alpha < 1.0, "stability index must lie in (0,1)");
      require(stable_theta > 0.0, "tempering theta must be > 0");
      break;
    case LevyKind::custom_log_divergent:
      break;
  }
  if (infinite_activity() && !(truncation > 0.0))
    throw std::invalid_argument(
        "subordinator spec: truncation required: infinite-activity kind needs eps > 0");
}

bool SubordinatorSpec::has_levy_density() const {
  switch (kind) {
    case LevyKind::gamma:
    case LevyKind::tempered_stable:
    case LevyKind::custom_log_divergent:
      return true;
    case LevyKind::compound_poisson:
      return jump_law != JumpLaw::fixed;
    default:
      return false;
  }
}

double SubordinatorSpec::levy_density(double x) const {
  if (x <= 0.0) return 0.0;
  switch (kind) {
    case LevyKind::gamma:
      return gamma_shape / x * std::exp(-gamma_rate * x);
    case LevyKind::tempered_stable:
      return stable_c * std::pow(x, -1.0 - stable_alpha) * std::exp(-stable_theta * x);
    case LevyKind::custom_log_divergent: {
      if (x <= std::exp(1.0)) return 0.0;
      double lx = std::log(x);
      return 1.0 / (x * lx * lx);
    }
    case LevyKind::compound_poisson:
      switch (jump_law) {
        case JumpLaw::exponential:
          return rate / jump_a * std::exp(-x / jump_a);
        case JumpLaw::uniform:
          return (x >= jump_a && x <= jump_b) ? rate / (jump_b - jump_a) : 0.0;
        case JumpLaw::fixed:
          break;
      }
      throw std::runtime_error("unsupported-spec: fixed jump law has no Levy density");
    default:
      throw std::runtime_error("unsupported-spec: kind has no Levy density");
  }
}

double SubordinatorSpec::truncated_rate() const {
  switch (kind) {
    case LevyKind::deterministic_linear:
      return 0.0;
    case LevyKind::poisson:
    case LevyKind::compound_poisson:
      return rate;
    case LevyKind::gamma:
      // a * E1(lambda * eps)
      return gamma_shape * boost::math::expint(1, gamma_rate * truncation);
    case LevyKind::tempered_stable: {
      // c theta^alpha Gamma(-alpha, theta eps), via Gamma(-a,z) = (z^-a e^-z - Gamma(1-a,z))/a
      double a = stable_alpha, z = stable_theta * truncation;
      double upper = (std::pow(z, -a) * std::exp(-z) - boost::math::tgamma(1.0 - a, z)) / a;
      return stable_c * std::pow(stable_theta, a) * upper;
    }
    case LevyKind::custom_log_divergent:
      throw std::runtime_error("unsupported-spec: custom-log-divergent cannot be sampled");
  }
  throw std::logic_error("truncated_rate: bad enum");
}

double SubordinatorSpec::compensator_drift() const {
  if (!infinite_activity()) return 0.0;
  switch (kind) {
    case LevyKind::gamma:
      return gamma_shape * (1.0 - std::exp(-gamma_rate * truncation)) / gamma_rate;
    case LevyKind::tempered_stable:
      return stable_c * std::pow(stable_theta, stable_alpha - 1.0) *
             boost::math::tgamma_lower(1.0 - stable_alpha, stable_theta * truncation);
    default:
      return 0.0;
  }
}

double SubordinatorSpec::mean_mass_rate() const {
  switch (kind) {
    case LevyKind::deterministic_linear:
      return drift;
    case LevyKind::poisson:
      return drift + rate;
    case LevyKind::compound_poisson:
      switch (jump_law) {
        case JumpLaw::fixed: return drift + rate * jump_a;
        case JumpLaw::exponential: return drift + rate * jump_a;
        case JumpLaw::uniform: return drift + rate * 0.5 * (jump_a + jump_b);
      }
      throw std::logic_error("mean_mass_rate: bad jump law");
    case LevyKind::gamma:
      return drift + gamma_shape / gamma_rate;
    case LevyKind::tempered_stable:
      return drift + stable_c * std::pow(stable_theta, stable_alpha - 1.0) *
                         boost::math::tgamma(1.0 - stable_alpha);
    case LevyKind::custom_log_divergent:
      return kInf;
  }
  throw std::logic_error("mean_mass_rate: bad enum");
}

void SubordinatorPath::validate() const {
  if (!(horizon > 0.0)) throw std::invalid_argument("subordinator path: horizon must be > 0");
  if (drift_eff < 0.0) throw std::invalid_argument("subordinator path: drift_eff must be >= 0");
  if (jump_times.size() != jump_sizes.size())
    throw std::invalid_argument("subordinator path: times/sizes length mismatch");
  for (std::size_t i = 0; i < jump_times.size(); ++i) {
    if (!(jump_times[i] > 0.0) || jump_times[i] > horizon)
      throw std::invalid_argument("subordinator path: jump time outside (0, horizon]");
    if (i > 0 && !(jump_times[i] > jump_times[i - 1]))
      throw std::invalid_argument("subordinator path: jump times must be strictly increasing");
    if (!(jump_sizes[i] > 0.0))
      throw std::invalid_argument("subordinator path: jump sizes must be > 0");
  }
}

double SubordinatorPath::value(double t) const {
  double s = drift_eff * t;
  for (std::size_t i = 0; i < jump_times.size() && jump_times[i] <= t; ++i) s += jump_sizes[i];
  return s;
}

double SubordinatorPath::left_value(double t) const {
  double s = drift_eff * t;
  for (std::size_t i = 0; i < jump_times.size() && jump_times[i] < t; ++i) s += jump_sizes[i];
  return s;
}

namespace {

// Size of one jump conditioned on exceeding eps, for the truncated gamma density
// x^{-1} e^{-lambda x} on (eps, inf). Two-branch rejection: log-uniform proposal
// below c = max(1/lambda, eps), shifted-exponential proposal above.
double sample_gamma_jump(Rng& rng, double lambda, double eps) {
  double c = std::max(1.0 / lambda, eps);
  double mass_a = std::log(c / eps);                       // dominating x^{-1} on (eps, c)
  double mass_b = std::exp(-lambda * c) / (lambda * c);    // dominating c^{-1} e^{-lambda x}
  for (int tries = 0; tries < 1000000; ++tries) {
    if (rng.uniform() * (mass_a + mass_b) < mass_a) {
      double x = eps * std::pow(c / eps, rng.uniform());
      if (rng.uniform() <= std::exp(-lambda * x)) return x;
    } else {
      double x = c + rng.exponential(lambda);
      if (rng.uniform() <= c / x) return x;
    }
  }
  throw std::runtime_error("gamma jump sampler failed to accept");
}

// Truncated tempered-stable density x^{-1-alpha} e^{-theta x} on (eps, inf):
// Pareto proposal eps u^{-1/alpha}, exponential-tilt acceptance.
double sample_tempered_stable_jump(Rng& rng, double alpha, double theta, double eps) {
  for (int tries = 0; tries < 1000000; ++tries) {
    double x = eps * std::pow(rng.uniform(), -1.0 / alpha);
    if (rng.uniform() <= std::exp(-theta * (x - eps))) return x;
  }
  throw std::runtime_error("tempered-stable jump sampler failed to accept");
}

double sample_jump_size(Rng& rng, const SubordinatorSpec& spec) {
  switch (spec.kind) {
    case LevyKind::poisson:
      return 1.0;
    case LevyKind::compound_poisson:
      switch (spec.jump_law) {
        case JumpLaw::fixed: return spec.jump_a;
        case JumpLaw::exponential: return -spec.jump_a * std::log(rng.uniform());
        case JumpLaw::uniform: return spec.jump_a + (spec.jump_b - spec.jump_a) * rng.uniform();
      }
      throw std::logic_error("sample_jump_size: bad jump law");
    case LevyKind::gamma:
      return sample_gamma_jump(rng, spec.gamma_rate, spec.truncation);
    case LevyKind::tempered_stable:
      return sample_tempered_stable_jump(rng, spec.stable_alpha, spec.stable_theta,
                                         spec.truncation);
    default:
      throw std::logic_error("sample_jump_size: kind has no jumps");
  }
}

}  // namespace

SubordinatorPath sample_subordinator(const SubordinatorSpec& spec, double horizon,
                                     std::uint64_t seed) {
  spec.validate();
  if (!(horizon > 0.0)) throw std::invalid_argument("sample_subordinator: horizon must be > 0");
  if (spec.kind == LevyKind::custom_log_divergent)
    throw std::runtime_error("unsupported-spec: custom-log-divergent cannot be sampled");

  SubordinatorPath path;
  path.spec = spec;
  path.horizon = horizon;
  path.drift_eff = spec.drift + spec.compensator_drift();

  double lam = spec.kind == LevyKind::deterministic_linear ? 0.0 : spec.truncated_rate();
  if (lam > 0.0) {
    Rng rng(mix_key({seed, 0x7375626fULL}));  // stream tag "subo"
    long long n = rng.poisson(lam * horizon);
    std::vector<double> times(static_cast<std::size_t>(n));
    for (auto& t : times) t = horizon * rng.uniform();
    std::sort(times.begin(), times.end());
    path.jump_times.reserve(times.size());
    path.jump_sizes.reserve(times.size());
    for (double t : times) {
      double s = sample_jump_size(rng, spec);
      if (!path.jump_times.empty() && t == path.jump_times.back()) {
        path.jump_sizes.back() += s;  // merge coincident times; keeps strict increase
      } else {
        path.jump_times.push_back(t);
        path.jump_sizes.push_back(s);
      }
    }
  }
  path.validate();
  return path;
}

double evaluate_cadlag(const SubordinatorPath& path, double t, Side side) {
  if (t < 0.0 || t > path.horizon)
    throw std::out_of_range("evaluate_cadlag: t outside [0, horizon]");
  return side == Side::right ? path.value(t) : path.left_value(t);
}

double stieltjes_integral(const std::function<double(double)>& f,
                          const SubordinatorPath& path, double a, double b) {
  if (a < 0.0 || b > path.horizon || a > b)
    throw std::out_of_range("stieltjes_integral: need 0 <= a <= b <= horizon");
  auto checked = [&f](double s) {
    double v = f(s);
    if (!std::isfinite(v))
      throw std::runtime_error("stieltjes_integral: non-finite integrand value");
    return v;
  };
  double total = 0.0;
  if (path.drift_eff > 0.0 && b > a) total = path.drift_eff * quad(checked, a, b);
  for (std::size_t i = 0; i < path.jump_times.size(); ++i) {
    double t = path.jump_times[i];
    if (t > a && t <= b) total += checked(t) * path.jump_sizes[i];
  }
  return total;
}

LogMomentReport check_log_moment(const SubordinatorSpec& spec) {
  spec.validate();
  LogMomentReport rep;
  switch (spec.kind) {
    case LevyKind::deterministic_linear:
      rep.finite = true;
      return rep;
    case LevyKind::poisson:
      rep.finite = true;  // unit jumps: log 1 = 0
      return rep;
    case LevyKind::compound_poisson:
      if (spec.jump_law == JumpLaw::fixed) {
        rep.finite = true;
        rep.value = spec.rate * std::max(0.0, std::log(spec.jump_a));
        return rep;
      }
      break;  // continuous law: integrate the density below
    default:
      break;
  }

  // Dyadic tail windows of int_1^inf log(x) rho(x) dx. A window sequence that
  // keeps contributing past the cap (no geometric decay) is declared divergent.
  auto integrand = [&spec](double x) -> double { return std::log(x) * spec.levy_density(x); };
  double total = 0.0;
  double lo = 1.0;
  for (int j = 0; j < 64; ++j) {
    double hi = lo * 2.0;
    double w = quad(integrand, lo, hi);
    total += w;
    rep.windows = j + 1;
    if (j >= 8 && std::abs(w) <= 1e-13 * std::max(1.0, std::abs(total))) {
      rep.finite = true;
      rep.value = total;
      return rep;
    }
    lo = hi;
  }
  rep.finite = false;
  rep.value = total;  // divergence witness: still-growing partial sum
  return rep;
}

void write_path(std::ostream& os, const SubordinatorPath& path) {
  os << "wickspde-subordinator-path v1\n";
  os << "kind " << kind_name(path.spec.kind) << "\n";
  os << "horizon " << fmt17(path.horizon) << "\n";
  os << "drift_eff " << fmt17(path.drift_eff) << "\n";
  os << "jumps " << path.jump_times.size() << "\n";
  for (std::size_t i = 0; i < path.jump_times.size(); ++i)
    os << fmt17(path.jump_times[i]) << " " << fmt17(path.jump_sizes[i]) << "\n";
}

SubordinatorPath read_path(std::istream& is) {
  std::string line;
  auto next = [&]() -> std::string {
    if (!std::getline(is, line)) throw std::runtime_error("path read: truncated input");
    return line;
  };
  if (next() != "wickspde-subordinator-path v1")
    throw std::runtime_error("path read: bad header");
  SubordinatorPath path;
  std::string word, kind;
  {
    std::istringstream ls(next());
    ls >> word >> kind;
    if (word != "kind") throw std::runtime_error("path read: expected kind");
    path.spec.kind = kind_from_name(kind);
  }
  auto read_kv = [&](const char* key) {
    std::istringstream ls(next());
    double v;
    ls >> word >> v;
    if (word != key || ls.fail()) throw std::runtime_error("path read: expected " + std::string(key));
    return v;
  };
  path.horizon = read_kv("horizon");
  path.drift_eff = read_kv("drift_eff");
  std::size_t n;
  {
    std::istringstream ls(next());
    ls >> word >> n;
    if (word != "jumps" || ls.fail()) throw std::runtime_error("path read: expected jumps");
  }
  path.jump_times.resize(n);
  path.jump_sizes.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::istringstream ls(next());
    ls >> path.jump_times[i] >> path.jump_sizes[i];
    if (ls.fail()) throw std::runtime_error("path read: bad jump line");
  }
  return path;
}

}  // namespace wickspde
