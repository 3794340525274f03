#include "sweepsim/birth_death.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace sweepsim::bd {

RateSchedule constant_schedule(double lambda, double mu, double gamma) {
  if (lambda < 0.0 || mu < 0.0 || gamma < 0.0) {
    throw std::invalid_argument("rates must be non-negative");
  }
  RateSchedule s;
  s.lambda = [lambda](double) { return lambda; };
  s.mu = [mu](double) { return mu; };
  s.gamma = [gamma](double) { return gamma; };
  s.lambda_max = lambda;
  s.mu_max = mu;
  s.gamma_max = gamma;
  return s;
}

double LogisticDrive::y(double r) const {
  // Centred drive: reflect so that y(-r) = 1 - y(r) holds bit for bit.
  if (y0 == 0.5 && r < 0.0) return 1.0 - y(-r);
  const double odds = (1.0 - y0) / y0;
  return 1.0 / (1.0 + odds * std::exp(-(c2 - c1) * r));
}

double LogisticDrive::mu(double r) const {
  const double yr = y(r);
  return c1 * (1.0 - yr) + c2 * yr;
}

double logistic_window(double c1, double c2, double rho, double threshold) {
  if (!(0.0 < c1 && c1 < c2 && c2 < 1.0)) throw std::invalid_argument("need 0 < c1 < c2 < 1");
  // The immigration tails decay at rate c2 - c1; the finite-horizon
  // correction of the extinction integral decays at rate 1 - c2.
  const double rate = std::min(c2 - c1, 1.0 - c2);
  return std::log(std::max(rho, 1.0) / threshold) / rate;
}

RateSchedule logistic_schedule(const LogisticDrive& drive, double rho, double gamma_scale,
                               double half_width) {
  if (rho < 0.0 || gamma_scale < 0.0) throw std::invalid_argument("rho and scale must be >= 0");
  RateSchedule s;
  s.lambda = [](double) { return 1.0; };
  s.mu = [drive](double r) { return drive.mu(r); };
  s.gamma = [drive, g = rho * gamma_scale](double r) {
    const double y = drive.y(r);
    return g * y * (1.0 - y);
  };
  s.t_lo = -half_width;
  s.t_hi = half_width;
  s.lambda_max = 1.0;
  s.mu_max = std::max(drive.c1, drive.c2);
  s.gamma_max = 0.25 * rho * gamma_scale;
  return s;
}

namespace {

struct ConvergenceTracker {
  bool ok = true;
  double worst = 0.0;

  double take(const QuadratureResult& r) {
    if (!r.converged) ok = false;
    worst = std::max(worst, r.error_estimate);
    return r.value;
  }
  void check(const char* what) const {
    if (!ok) {
      throw QuadratureError(std::string(what) + ": quadrature did not converge", worst);
    }
  }
};

// Cache of the exponentials exp(int_s^r (mu - lambda)) on a grid over
// [a, t]. Differences of the integrated drift are only ever formed
// locally, so the long-horizon factors never suffer cancellation.
class DriftCache {
 public:
  DriftCache(const RateSchedule& s, double a, double t, int intervals, double inner_tol)
      : s_(s), a_(a), t_(t), inner_tol_(inner_tol) {
    int n = intervals;
    if (n <= 0) {
      double scale = 0.0;
      for (int i = 0; i <= 32; ++i) {
        const double r = a + (t - a) * i / 32.0;
        scale = std::max(scale, s.lambda(r) + s.mu(r));
      }
      n = static_cast<int>(std::ceil(2.0 * (t - a) * (1.0 + scale)));
      n = std::clamp(n, 16, 20000);
    }
    n_ = n;
    h_ = (t - a) / n;
    nodes_.resize(static_cast<std::size_t>(n + 1));
    for (int k = 0; k <= n; ++k) nodes_[static_cast<std::size_t>(k)] = a + h_ * k;
    nodes_.back() = t;
    tail_.assign(static_cast<std::size_t>(n + 1), 0.0);
    step_.assign(static_cast<std::size_t>(n), 0.0);
    for (int k = n - 1; k >= 0; --k) {
      step_[static_cast<std::size_t>(k)] = local(node(k), node(k + 1));
      tail_[static_cast<std::size_t>(k)] = tail_[static_cast<std::size_t>(k + 1)] +
                                           step_[static_cast<std::size_t>(k)];
    }
  }

  int size() const { return n_; }
  double node(int k) const { return nodes_[static_cast<std::size_t>(k)]; }

  /// int_s^r (mu - lambda) for s, r in the same or adjacent cells.
  double local(double s, double r) const {
    return gauss_legendre([this](double u) { return s_.mu(u) - s_.lambda(u); }, s, r);
  }

  int cell(double s) const {
    int k = static_cast<int>(std::floor((s - a_) / h_));
    return std::clamp(k, 0, n_ - 1);
  }

  /// int_s^t (mu - lambda).
  double to_end(double s) const {
    const int k = cell(s);
    return tail_[static_cast<std::size_t>(k + 1)] + local(s, node(k + 1));
  }

  /// Node values W(x_k) = int_{x_k}^t f_r exp(int_{x_k}^r (mu - lambda)) dr.
  std::vector<double> weighted_tail(const RateFn& f, ConvergenceTracker& tr) const {
    std::vector<double> w(static_cast<std::size_t>(n_ + 1), 0.0);
    for (int k = n_ - 1; k >= 0; --k) {
      w[static_cast<std::size_t>(k)] =
          piece(f, node(k), k, tr) +
          std::exp(step_[static_cast<std::size_t>(k)]) * w[static_cast<std::size_t>(k + 1)];
    }
    return w;
  }

  /// W(s) from the node values.
  double weighted_tail_at(const RateFn& f, const std::vector<double>& w, double s,
                          ConvergenceTracker& tr) const {
    const int k = cell(s);
    return piece(f, s, k, tr) +
           std::exp(local(s, node(k + 1))) * w[static_cast<std::size_t>(k + 1)];
  }

 private:
  double piece(const RateFn& f, double s, int k, ConvergenceTracker& tr) const {
    const double end = node(k + 1);
    if (end <= s) return 0.0;
    QuadratureOptions o;
    o.abs_tol = inner_tol_ / n_;
    o.min_depth = 1;
    return tr.take(adaptive_simpson(
        [&](double r) { return f(r) * std::exp(local(s, r)); }, s, end, o));
  }

  const RateSchedule& s_;
  double a_;
  double t_;
  double inner_tol_;
  int n_ = 0;
  double h_ = 0.0;
  std::vector<double> nodes_;
  std::vector<double> tail_;
  std::vector<double> step_;
};

void check_time(const RateSchedule& s, double t) {
  if (!s.lambda || !s.mu || !s.gamma) throw std::invalid_argument("schedule has unset rates");
  if (!(t >= s.t_lo && t <= s.t_hi)) {
    throw std::invalid_argument("time outside the schedule domain");
  }
}

// int_a^t g(s) ds split over the cache cells.
template <class G>
double outer_integral(const DriftCache& cache, G&& g, double tol, ConvergenceTracker& tr) {
  QuadratureOptions o;
  o.abs_tol = tol / cache.size();
  o.min_depth = 1;
  double sum = 0.0;
  for (int k = 0; k < cache.size(); ++k) {
    sum += tr.take(adaptive_simpson(g, cache.node(k), cache.node(k + 1), o));
  }
  return sum;
}

}  // namespace

double kendall_generating_function(const RateSchedule& sched, std::int64_t ell, double t,
                                   double z, const KendallOptions& opt) {
  check_time(sched, t);
  if (ell < 0) throw std::invalid_argument("initial count must be >= 0");
  if (!(z >= 0.0 && z < 1.0)) throw std::invalid_argument("z must lie in [0, 1)");
  const double a = sched.t_lo;
  if (t == a) return std::pow(z, static_cast<double>(ell));

  DriftCache cache(sched, a, t, opt.grid_intervals, opt.inner_tol);
  ConvergenceTracker tr;
  const auto w = cache.weighted_tail(sched.lambda, tr);
  const double inv = 1.0 / (1.0 - z);

  double result = 1.0;
  if (ell > 0) {
    const double d0 = std::exp(cache.to_end(a)) * inv + w[0];
    result = std::pow(1.0 - 1.0 / d0, static_cast<double>(ell));
  }
  auto integrand = [&](double s) {
    const double g = sched.gamma(s);
    if (g == 0.0) return 0.0;
    const double d = std::exp(cache.to_end(s)) * inv + cache.weighted_tail_at(sched.lambda, w, s, tr);
    return g / d;
  };
  const double imm = outer_integral(cache, integrand, opt.outer_tol, tr);
  tr.check("generating function");
  return result * std::exp(-imm);
}

double extinction_probability(const RateSchedule& sched, double t, const KendallOptions& opt) {
  check_time(sched, t);
  const double a = sched.t_lo;
  if (t == a) return 1.0;
  DriftCache cache(sched, a, t, opt.grid_intervals, opt.inner_tol);
  ConvergenceTracker tr;
  const auto w = cache.weighted_tail(sched.mu, tr);
  auto integrand = [&](double s) {
    const double g = sched.gamma(s);
    if (g == 0.0) return 0.0;
    return g / (1.0 + cache.weighted_tail_at(sched.mu, w, s, tr));
  };
  const double imm = outer_integral(cache, integrand, opt.outer_tol, tr);
  tr.check("extinction probability");
  return std::exp(-imm);
}

double immigration_survival(double c1, double c2, double rho) {
  if (!(0.0 < c1 && c1 < c2 && c2 < 1.0)) throw std::invalid_argument("need 0 < c1 < c2 < 1");
  if (!(rho >= 0.0)) throw std::invalid_argument("rho must be >= 0");
  const double d = c2 - c1;
  const double expo = -rho * (1.0 - c1) * (1.0 - c2) / (d * d);
  return -std::expm1(expo * std::log((1.0 - c1) / (1.0 - c2)));
}

double immigration_survival_quadrature(double c1, double c2, double rho, double gamma_scale) {
  const double T = logistic_window(c1, c2, rho * gamma_scale);
  const auto sched = logistic_schedule(LogisticDrive{c1, c2, 0.5}, rho, gamma_scale, T);
  return 1.0 - extinction_probability(sched, T);
}

double logistic_survival_from(double c1, double c2, double rho, double gamma_scale,
                              double y_start) {
  if (!(y_start > 0.0 && y_start < 1.0)) throw std::invalid_argument("y_start must be in (0,1)");
  const double T = logistic_window(c1, c2, rho * gamma_scale);
  auto sched = logistic_schedule(LogisticDrive{c1, c2, 0.5}, rho, gamma_scale, T);
  sched.t_lo = std::log(y_start / (1.0 - y_start)) / (c2 - c1);
  if (!(sched.t_lo < T)) return 0.0;
  return 1.0 - extinction_probability(sched, T);
}

double subcritical_extinction_survival(double c, double alpha, std::int64_t m, double t) {
  if (!(c > 0.0)) throw std::invalid_argument("c must be positive");
  if (m < 0) throw std::invalid_argument("m must be >= 0");
  if (m == 0) return 0.0;
  const double f = c / ((1.0 + c) * std::exp(t * alpha * c) - 1.0);
  // 1 - (1-f)^m without cancellation for small f.
  return -std::expm1(static_cast<double>(m) * std::log1p(-std::min(f, 1.0)));
}

BranchingBounds binary_branching_extinction_bounds(double lambda, double mu, double t,
                                                   double K, double constant) {
  if (!(lambda > mu && mu > 0.0)) throw std::invalid_argument("need lambda > mu > 0");
  BranchingBounds b;
  const double growth = std::exp((lambda - mu) * t);
  b.extinction = mu / (lambda * growth);
  if (K <= growth / 6.0) b.small_count = constant * K / growth;
  b.supremum = constant * growth / K;
  return b;
}

ImmigrationRun simulate_immigration_branching(const RateSchedule& sched, double lambda_floor,
                                              RngStream& rng, const ImmigrationOptions& opt) {
  if (!sched.lambda_max || !sched.mu_max || !sched.gamma_max) {
    throw std::invalid_argument("thinning needs rate upper bounds");
  }
  if (!std::isfinite(sched.t_hi)) throw std::invalid_argument("finite horizon required");
  const double lmax = *sched.lambda_max;
  const double mmax = *sched.mu_max;
  const double gmax = *sched.gamma_max;

  std::int64_t stop_count = 0;
  if (lambda_floor > mmax && mmax > 0.0) {
    stop_count = static_cast<std::int64_t>(
        std::ceil(std::log(opt.survival_tolerance) / std::log(mmax / lambda_floor)));
  }

  ImmigrationRun run;
  std::int64_t n = 0;
  double t = sched.t_lo;
  while (true) {
    const double bound = (lmax + mmax) * static_cast<double>(n) + gmax;
    if (bound <= 0.0) break;
    t += rng.exponential(bound);
    if (t >= sched.t_hi) break;
    const double nd = static_cast<double>(n);
    const double birth = sched.lambda(t) * nd + sched.gamma(t);
    const double death = sched.mu(t) * nd;
    const double u = rng.uniform() * bound;
    if (u < birth) {
      ++n;
    } else if (u < birth + death) {
      --n;
    } else {
      continue;
    }
    if (++run.events > opt.event_budget) {
      throw std::runtime_error("event budget exceeded");
    }
    if (stop_count > 0 && n >= stop_count) {
      run.early_stop = true;
      break;
    }
  }
  run.final_count = n;
  run.survived = n > 0;
  return run;
}

}  // namespace sweepsim::bd
