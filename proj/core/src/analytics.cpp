#include "sweepsim/analytics.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace sweepsim::analytics {

namespace {

void require_ordered(double c1, double c2) {
  if (!(c1 > 0.0 && c1 < c2 && c2 < 1.0)) {
    throw std::invalid_argument("selection ratios must satisfy 0 < c1 < c2 < 1");
  }
}

void require_rho(double rho) {
  if (!(rho >= 0.0)) throw std::invalid_argument("rho must be >= 0");
}

double recombination_exponent(double c1, double c2) {
  const double d = c2 - c1;
  return 2.0 * (1.0 - c2) * (1.0 - c1) / (d * d);
}

}  // namespace

double limiting_fixation_probability(double c1, double c2, double rho) {
  require_ordered(c1, c2);
  require_rho(rho);
  const double base = (1.0 - c2) / (1.0 - c1);
  // base^e = exp(e log base); expm1 keeps precision for small rho.
  return -c2 * std::expm1(rho * recombination_exponent(c1, c2) * std::log(base));
}

double additive_fixation_probability(double c1, double c2, double rho) {
  require_ordered(c1, c2);
  require_rho(rho);
  const double d = c2 - c1;
  return -c2 * std::expm1(2.0 * rho * c1 * c2 / (d * d) * std::log(c1 / c2));
}

SupercriticalLimit limiting_fixation_probability_supercritical(double psi, double c1, double c2) {
  const Regime r = classify_regime(psi, c1, c2);
  if (r == Regime::SubCritical || r == Regime::Boundary) {
    throw std::invalid_argument("limit is zero only for psi > c1/c2 (regime is " +
                                std::string(to_string(r)) + ")");
  }
  return {0.0, r};
}

double limiting_fixation_time(double psi, double c1, double c2) {
  require_ordered(c1, c2);
  const Regime r = classify_regime(psi, c1, c2);
  if (r != Regime::SubCritical) {
    throw std::invalid_argument("fixation time needs the sub-critical regime (regime is " +
                                std::string(to_string(r)) + ")");
  }
  // Accumulated exactly as the scenario times so the two agree bit for bit.
  return scenario_times(psi, c1, c2, 0.0).tau4;
}

double additive_fixation_time(double psi, double c1, double c2) {
  require_ordered(c1, c2);
  return (2.0 * c2 - (1.0 + psi) * c1) / (c1 * (c2 - c1));
}

double finite_population_fixation_probability(double c1, double c2, double rho, double alpha,
                                              double population_size) {
  if (!(population_size > 0.0)) throw std::invalid_argument("population size must be positive");
  if (!(alpha > 0.0)) throw std::invalid_argument("alpha must be positive");
  return 2.0 * alpha / population_size * limiting_fixation_probability(c1, c2, rho);
}

double recombinant_survival_rate(const ModelParams& p, double x1, double x2) {
  if (x1 < 0.0 || x2 < 0.0) throw std::invalid_argument("frequencies must be >= 0");
  if (x1 + x2 <= 0.0) throw std::invalid_argument("x1 + x2 must be positive");
  const double a = p.alpha - p.alpha1;
  const double b = p.alpha - p.alpha2;
  return 2.0 * a * b / (a * x2 + b * x1);
}

double integral_I(double c1, double c2) {
  require_ordered(c1, c2);
  return recombination_exponent(c1, c2) * std::log((1.0 - c1) / (1.0 - c2));
}

ProbabilityBounds fixation_probability_bounds(double c1, double c2, double rho) {
  require_ordered(c1, c2);
  require_rho(rho);
  const double d = c2 - c1;
  return {-c2 * std::expm1(-2.0 * rho * (1.0 - c2) / d),
          -c2 * std::expm1(-2.0 * rho * (1.0 - c1) / d)};
}

ScenarioTimes scenario_times(double psi, double c1, double c2, double rho) {
  require_ordered(c1, c2);
  require_rho(rho);
  if (psi < 0.0) throw std::invalid_argument("psi must be >= 0");
  ScenarioTimes t;
  t.regime = classify_regime(psi, c1, c2);
  if (t.regime == Regime::Boundary) {
    throw std::invalid_argument("scenario times are undefined at psi = c1/c2");
  }
  t.psi = psi;
  t.c1 = c1;
  t.c2 = c2;
  t.tau1 = psi / c1;
  t.tau2 = t.tau1 + (1.0 - c2 * psi / c1) / (c2 - c1);
  t.tau3 = t.tau2 + 1.0 / (1.0 - c2);
  t.tau4 = t.tau3 + 1.0 / (1.0 - c2);
  t.sigma1 = 1.0 / c2;
  t.sigma2 = t.sigma1 + (1.0 - psi + c1 / c2) / (c2 - c1);
  t.p = limiting_fixation_probability(c1, c2, rho) / c2;
  return t;
}

// ---------------------------------------------------------------------------

Exponent Exponent::finite(double v) {
  if (!std::isfinite(v)) throw std::invalid_argument("finite exponent expected");
  Exponent e;
  e.neg_inf_ = false;
  e.v_ = v;
  return e;
}

Exponent Exponent::of_count(std::int64_t count, double alpha) {
  if (count < 0) throw std::invalid_argument("negative count");
  if (!(alpha > 1.0)) throw std::invalid_argument("exponent base must exceed 1");
  if (count == 0) return neg_inf();
  return finite(std::log(static_cast<double>(count)) / std::log(alpha));
}

double Exponent::value() const {
  if (neg_inf_) throw std::logic_error("arithmetic on a NEG_INF exponent");
  return v_;
}

std::string Exponent::to_string() const {
  if (neg_inf_) return std::string(kNegInfLiteral);
  std::ostringstream os;
  os.precision(17);
  os << v_;
  return os.str();
}

std::partial_ordering Exponent::operator<=>(const Exponent& o) const {
  if (neg_inf_ && o.neg_inf_) return std::partial_ordering::equivalent;
  if (neg_inf_) return std::partial_ordering::less;
  if (o.neg_inf_) return std::partial_ordering::greater;
  return v_ <=> o.v_;
}

bool Exponent::operator==(const Exponent& o) const {
  return neg_inf_ == o.neg_inf_ && (neg_inf_ || v_ == o.v_);
}

std::string_view to_string(Branch b) {
  switch (b) {
    case Branch::NoEstablish: return "no_establish";
    case Branch::NoRecombinant: return "no_recombinant";
    case Branch::Fixation3: return "fixation3";
    case Branch::SuperA: return "super_lost";
    case Branch::SuperB: return "super_sweep";
  }
  return "unknown";
}

bool is_subcritical_branch(Branch b) {
  return b == Branch::NoEstablish || b == Branch::NoRecombinant || b == Branch::Fixation3;
}

double branch_probability(Branch b, const ScenarioTimes& t) {
  switch (b) {
    case Branch::NoEstablish:
    case Branch::SuperA: return 1.0 - t.c2;
    case Branch::NoRecombinant: return t.c2 * (1.0 - t.p);
    case Branch::Fixation3: return t.c2 * t.p;
    case Branch::SuperB: return t.c2;
  }
  return 0.0;
}

namespace {

using E = Exponent;

Exponent lost_type2(double tau) { return tau == 0.0 ? E::finite(0.0) : E::neg_inf(); }

Exponent sweeping_type2(const ScenarioTimes& t, double tau) {
  if (tau <= t.tau1) return E::finite(t.c2 * tau);
  if (tau <= t.tau2) return E::finite(t.c2 / t.c1 * t.psi + (t.c2 - t.c1) * (tau - t.tau1));
  return E::finite(1.0);
}

}  // namespace

ExponentPoint exponent_path(Branch branch, const ScenarioTimes& t, double tau,
                            double exclusion_radius) {
  if (!(tau >= 0.0)) throw std::invalid_argument("tau must be >= 0");
  const bool sub = is_subcritical_branch(branch);
  if (sub != (t.regime == Regime::SubCritical)) {
    throw std::invalid_argument("branch " + std::string(to_string(branch)) +
                                " does not belong to regime " + std::string(to_string(t.regime)));
  }
  ExponentPoint pt;
  pt.branch = branch;
  pt.tau = tau;
  pt.probability = branch_probability(branch, t);
  if (sub && branch != Branch::NoEstablish && std::abs(tau - t.tau2) <= exclusion_radius) {
    pt.excluded = true;
    return pt;
  }

  ExponentValues v;
  switch (branch) {
    case Branch::NoEstablish:
      v.q2 = lost_type2(tau);
      break;
    case Branch::NoRecombinant:
      v.q2 = sweeping_type2(t, tau);
      break;
    case Branch::Fixation3:
      if (tau <= t.tau2) {
        v.q2 = sweeping_type2(t, tau);
      } else if (tau <= t.tau3) {
        v.q2 = E::finite(1.0);
        v.q3 = E::finite((1.0 - t.c2) * (tau - t.tau2));
      } else if (tau <= t.tau4) {
        v.q2 = E::finite(1.0 - (1.0 - t.c2) * (tau - t.tau3));
        v.q3 = E::finite(1.0);
      } else {
        v.q3 = E::finite(1.0);
      }
      break;
    case Branch::SuperA:
      v.q1 = tau <= t.tau1 ? E::finite(1.0 - t.psi + t.c1 * tau) : E::finite(1.0);
      v.q2 = lost_type2(tau);
      break;
    case Branch::SuperB:
      if (tau <= t.sigma1) {
        v.q1 = E::finite(1.0 - t.psi + t.c1 * tau);
        v.q2 = E::finite(t.c2 * tau);
      } else if (tau <= t.sigma2) {
        v.q1 = E::finite(1.0 - t.psi + t.c1 * t.sigma1 - (t.c2 - t.c1) * (tau - t.sigma1));
        v.q2 = E::finite(1.0);
      } else {
        v.q1 = E::neg_inf();
        v.q2 = E::finite(1.0);
      }
      break;
  }
  pt.values = v;
  return pt;
}

std::vector<double> breakpoints(Branch branch, const ScenarioTimes& t) {
  switch (branch) {
    case Branch::NoEstablish: return {};
    case Branch::NoRecombinant: return {t.tau1, t.tau2};
    case Branch::Fixation3: return {t.tau1, t.tau2, t.tau3, t.tau4};
    case Branch::SuperA: return {t.tau1};
    case Branch::SuperB: return {t.sigma1, t.sigma2};
  }
  return {};
}

// ---------------------------------------------------------------------------

double log_poisson_pmf(double mean, std::int64_t k) {
  if (k < 0) return -std::numeric_limits<double>::infinity();
  if (mean == 0.0) return k == 0 ? 0.0 : -std::numeric_limits<double>::infinity();
  const double kd = static_cast<double>(k);
  return kd * std::log(mean) - mean - std::lgamma(kd + 1.0);
}

double pi_equilibrium_pmf(double alpha, double rho, std::int64_t k) {
  const double lambda = 2.0 * (alpha + rho);
  if (!(lambda > 0.0)) throw std::invalid_argument("alpha + rho must be positive");
  if (k <= 0) return 0.0;
  // log(1 - e^-lambda) without cancellation for small lambda.
  const double log_norm = std::log(-std::expm1(-lambda));
  return std::exp(log_poisson_pmf(lambda, k) - log_norm);
}

double pi_equilibrium_mean(double alpha, double rho) {
  const double lambda = 2.0 * (alpha + rho);
  return lambda / -std::expm1(-lambda);
}

double tv_distance_pi_shifted_poisson(double alpha, double rho, std::int64_t n) {
  const double lam_pi = 2.0 * (alpha + rho);
  const double lam_psi = 2.0 * alpha;
  const double spread = std::max(lam_pi, lam_psi);
  const auto hi = static_cast<std::int64_t>(std::max<std::int64_t>(n, 0) + spread +
                                            40.0 * std::sqrt(spread) + 60.0);
  const std::int64_t lo = std::min<std::int64_t>(n, 1);
  double sum = 0.0;
  for (std::int64_t k = lo; k <= hi; ++k) {
    const double a = pi_equilibrium_pmf(alpha, rho, k);
    const double b = k >= n ? std::exp(log_poisson_pmf(lam_psi, k - n)) : 0.0;
    sum += std::abs(a - b);
  }
  return std::clamp(0.5 * sum, 0.0, 1.0);
}

}  // namespace sweepsim::analytics
