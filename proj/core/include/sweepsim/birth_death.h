#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <optional>

#include "sweepsim/quadrature.h"
#include "sweepsim/rng.h"

namespace sweepsim::bd {

using RateFn = std::function<double(double)>;

/// Per-individual birth rate lambda_t, per-individual death rate mu_t and
/// immigration rate gamma_t of a linear birth-death process, on [t_lo, t_hi].
/// The callables must be side-effect free. The optional maxima are upper
/// bounds over the domain; the thinning sampler needs them.
struct RateSchedule {
  RateFn lambda;
  RateFn mu;
  RateFn gamma;
  double t_lo = 0.0;
  double t_hi = std::numeric_limits<double>::infinity();
  std::optional<double> lambda_max;
  std::optional<double> mu_max;
  std::optional<double> gamma_max;
};

RateSchedule constant_schedule(double lambda, double mu, double gamma);

/// y_r = 1 / (1 + ((1-y0)/y0) e^{-(c2-c1) r}); centred (y_0 = 1/2) by default.
struct LogisticDrive {
  double c1 = 0.4;
  double c2 = 0.8;
  double y0 = 0.5;

  double y(double r) const;
  /// c1 (1 - y_r) + c2 y_r.
  double mu(double r) const;
};

/// Window half-width T such that the immigration integrand of the logistic
/// schedule is below `threshold` outside [-T, T].
double logistic_window(double c1, double c2, double rho, double threshold = 1e-12);

/// Schedule with lambda = 1, mu = drive.mu, gamma = gamma_scale * rho * y (1 - y)
/// on [-T, T]. gamma_scale = 1 gives immigration rho y (1 - y); gamma_scale = 2
/// is the (rho/2) V1 V2 rate of the rescaled process.
RateSchedule logistic_schedule(const LogisticDrive& drive, double rho, double gamma_scale,
                               double half_width);

struct KendallOptions {
  double inner_tol = 1e-13;
  double outer_tol = 1e-11;
  /// Number of cache intervals on [t_lo, t]; 0 picks a size from the span.
  int grid_intervals = 0;
};

/// Generating function E[z^{L_t}] of the process started with `ell`
/// individuals at sched.t_lo. Throws QuadratureError on non-convergence.
double kendall_generating_function(const RateSchedule& sched, std::int64_t ell, double t,
                                   double z, const KendallOptions& opt = {});

/// P(L_t = 0) starting empty at sched.t_lo, from the immigration integral
/// normalized with 1 + int mu e^{...} (the z = 0 form).
double extinction_probability(const RateSchedule& sched, double t,
                              const KendallOptions& opt = {});

/// 1 - ((1-c1)/(1-c2))^(-rho (1-c1)(1-c2)/(c2-c1)^2): survival of the
/// logistic-driven branching process with immigration rho y (1-y).
double immigration_survival(double c1, double c2, double rho);

/// Survival probability from the quadrature route: 1 - extinction_probability
/// of the logistic schedule on its truncation window.
double immigration_survival_quadrature(double c1, double c2, double rho, double gamma_scale = 1.0);

/// Same process started empty when the drive is at y = y_start instead of
/// in the far past.
double logistic_survival_from(double c1, double c2, double rho, double gamma_scale,
                              double y_start);

/// f(t) = c / ((1+c) e^{t alpha c} - 1), g_m(t) = 1 - (1 - f(t))^m:
/// probability that m sub-critical lines are not all gone by time t.
double subcritical_extinction_survival(double c, double alpha, std::int64_t m, double t);

struct BranchingBounds {
  /// |P(L(t)=0) - mu/lambda| is at most this.
  double extinction = 0.0;
  /// Bound on P(1 <= L(t) <= K) without the unspecified constant; empty
  /// when K > e^{(lambda-mu)t}/6.
  std::optional<double> small_count;
  /// Bound on P(sup L >= K) without the constant.
  double supremum = 0.0;
};

/// Right-hand sides of the binary branching bounds with the constant set to
/// `constant` (defaults to 1, the shape only).
BranchingBounds binary_branching_extinction_bounds(double lambda, double mu, double t,
                                                   double K, double constant = 1.0);

struct ImmigrationRun {
  bool survived = false;
  /// Final population, or the early-stop size.
  std::int64_t final_count = 0;
  bool early_stop = false;
  std::int64_t events = 0;
};

struct ImmigrationOptions {
  /// Stop as survived once the count makes extinction less likely than this.
  double survival_tolerance = 1e-12;
  std::int64_t event_budget = 500'000'000;
};

/// Exact simulation by thinning of the time-inhomogeneous process with
/// birth rate lambda_t k + gamma_t and death rate mu_t k, started empty at
/// sched.t_lo and run to sched.t_hi. Requires the three rate maxima; early
/// stopping uses mu_max / lambda_min as the per-line extinction bound,
/// where lambda_min is `lambda_floor`.
ImmigrationRun simulate_immigration_branching(const RateSchedule& sched, double lambda_floor,
                                              RngStream& rng, const ImmigrationOptions& opt = {});

}  // namespace sweepsim::bd
