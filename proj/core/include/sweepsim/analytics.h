#pragma once

#include <compare>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "sweepsim/params.h"

namespace sweepsim::analytics {

// ---------------------------------------------------------------------------
// Fixation probability and time in the large-alpha limit.
// ---------------------------------------------------------------------------

/// c2 * (1 - ((1-c2)/(1-c1))^(2 rho (1-c2)(1-c1)/(c2-c1)^2)): the limit of
/// P(X3(inf) = 1) / (2 alpha delta) when psi < c1/c2.
double limiting_fixation_probability(double c1, double c2, double rho);

/// Additive-selection form c2 (1 - (c1/c2)^(2 rho c1 c2/(c2-c1)^2)); only
/// meaningful when c1 + c2 = 1.
double additive_fixation_probability(double c1, double c2, double rho);

struct SupercriticalLimit {
  double value = 0.0;
  Regime regime = Regime::SuperCritical;
};

/// The limit is zero whenever psi > c1/c2. Throws for psi < c1/c2 or the
/// boundary.
SupercriticalLimit limiting_fixation_probability_supercritical(double psi, double c1, double c2);

/// Rescaled fixation time (1-psi)/(c2-c1) + 2/(1-c2), in units of log(alpha)/alpha.
double limiting_fixation_time(double psi, double c1, double c2);

/// Additive-selection form (2 c2 - (1+psi) c1) / (c1 (c2 - c1)).
double additive_fixation_time(double psi, double c1, double c2);

/// Rescales the limit to a population of size N with delta = 1/N:
/// 2 alpha delta times the limiting fixation probability.
double finite_population_fixation_probability(double c1, double c2, double rho, double alpha,
                                              double population_size);

// ---------------------------------------------------------------------------
// Heuristic quantities.
// ---------------------------------------------------------------------------

/// S_t = 2 (alpha-alpha1)(alpha-alpha2) / ((alpha-alpha1) x2 + (alpha-alpha2) x1).
double recombinant_survival_rate(const ModelParams& p, double x1, double x2);

/// I = 2 (1-c1)(1-c2)/(c2-c1)^2 * log((1-c1)/(1-c2)).
double integral_I(double c1, double c2);

struct ProbabilityBounds {
  double lower = 0.0;
  double upper = 0.0;
};

/// c2 (1 - exp(-2 rho (1-c2)/(c2-c1))) <= limit <= c2 (1 - exp(-2 rho (1-c1)/(c2-c1))).
ProbabilityBounds fixation_probability_bounds(double c1, double c2, double rho);

// ---------------------------------------------------------------------------
// Scenario times and exponent paths.
// ---------------------------------------------------------------------------

struct ScenarioTimes {
  double tau1 = 0.0;
  double tau2 = 0.0;
  double tau3 = 0.0;
  double tau4 = 0.0;
  double sigma1 = 0.0;
  double sigma2 = 0.0;
  /// Survival probability of the recombinant once type 2 takes over.
  double p = 0.0;
  double psi = 0.0;
  double c1 = 0.0;
  double c2 = 0.0;
  Regime regime = Regime::SubCritical;
};

/// All scenario times. The taus are meaningful in the sub-critical regime and
/// the sigmas in the super-critical one; both are always filled in.
ScenarioTimes scenario_times(double psi, double c1, double c2, double rho);

/// Exponent log(count)/log(alpha). Negative infinity is a distinct state and
/// carries no arithmetic: value() throws on it.
class Exponent {
 public:
  static Exponent neg_inf() { return Exponent(); }
  static Exponent finite(double v);
  /// Maps a particle count to its exponent in base alpha (0 -> NEG_INF).
  static Exponent of_count(std::int64_t count, double alpha);

  bool is_neg_inf() const { return neg_inf_; }
  double value() const;
  std::string to_string() const;

  std::partial_ordering operator<=>(const Exponent& o) const;
  bool operator==(const Exponent& o) const;

 private:
  Exponent() = default;
  bool neg_inf_ = true;
  double v_ = 0.0;
};

inline constexpr std::string_view kNegInfLiteral = "NEG_INF";

enum class Branch {
  NoEstablish,    // type 2 is lost early (probability 1 - c2)
  NoRecombinant,  // type 2 sweeps, no recombinant survives (c2 (1 - p))
  Fixation3,      // a recombinant survives and fixes (c2 p)
  SuperA,         // super-critical, type 2 lost (1 - c2)
  SuperB,         // super-critical, type 2 sweeps (c2)
};

std::string_view to_string(Branch b);
bool is_subcritical_branch(Branch b);
double branch_probability(Branch b, const ScenarioTimes& t);

struct ExponentValues {
  /// Type-1 exponent; only claimed by the super-critical branches.
  std::optional<Exponent> q1;
  Exponent q2 = Exponent::neg_inf();
  Exponent q3 = Exponent::neg_inf();
};

struct ExponentPoint {
  Branch branch = Branch::Fixation3;
  double tau = 0.0;
  double probability = 0.0;
  /// Set when tau falls in the excluded neighbourhood of tau2; no values then.
  bool excluded = false;
  std::optional<ExponentValues> values;
};

inline constexpr double kDefaultExclusionRadius = 1e-9;

/// Evaluates the limiting exponent path of the given branch at rescaled time tau.
ExponentPoint exponent_path(Branch branch, const ScenarioTimes& times, double tau,
                            double exclusion_radius = kDefaultExclusionRadius);

/// Breakpoints of a branch, ascending: {tau1..tau4} or {sigma1, sigma2}.
std::vector<double> breakpoints(Branch branch, const ScenarioTimes& times);

// ---------------------------------------------------------------------------
// Equilibrium of the line-counting process.
// ---------------------------------------------------------------------------

/// P(Pi = k) for Pi ~ Poisson(2(alpha+rho)) conditioned positive; 0 for k <= 0.
double pi_equilibrium_pmf(double alpha, double rho, std::int64_t k);

/// E[Pi] = 2(alpha+rho) / (1 - exp(-2(alpha+rho))).
double pi_equilibrium_mean(double alpha, double rho);

/// Total variation distance between Pi and Poisson(2 alpha) shifted by n,
/// summed directly with a tail cutoff.
double tv_distance_pi_shifted_poisson(double alpha, double rho, std::int64_t n);

/// log of the Poisson(mean) pmf at k (k >= 0).
double log_poisson_pmf(double mean, std::int64_t k);

}  // namespace sweepsim::analytics
