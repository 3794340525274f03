#include "oracles.h"

#include <gsl/gsl_cdf.h>
#include <gsl/gsl_errno.h>
#include <gsl/gsl_integration.h>
#include <gsl/gsl_randist.h>
#include <gsl/gsl_sort.h>
#include <gsl/gsl_statistics_double.h>

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <stdexcept>

namespace oracle {

namespace {

struct Workspace {
  explicit Workspace(std::size_t n = 2000) : w(gsl_integration_workspace_alloc(n)) {}
  ~Workspace() { gsl_integration_workspace_free(w); }
  Workspace(const Workspace&) = delete;
  Workspace& operator=(const Workspace&) = delete;
  gsl_integration_workspace* w;
};

double trampoline(double x, void* params) {
  return (*static_cast<std::function<double(double)>*>(params))(x);
}

void check(int status) {
  if (status != GSL_SUCCESS) throw std::runtime_error(gsl_strerror(status));
}

double qag(std::function<double(double)> f, double a, double b, double epsabs, double epsrel) {
  Workspace ws;
  gsl_function F{&trampoline, &f};
  double r = 0.0, err = 0.0;
  check(gsl_integration_qag(&F, a, b, epsabs, epsrel, 2000, GSL_INTEG_GAUSS61, ws.w, &r, &err));
  return r;
}

double qagiu(std::function<double(double)> f, double a, double epsabs, double epsrel) {
  Workspace ws;
  gsl_function F{&trampoline, &f};
  double r = 0.0, err = 0.0;
  check(gsl_integration_qagiu(&F, a, epsabs, epsrel, 2000, ws.w, &r, &err));
  return r;
}

double softplus(double x) { return x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

}  // namespace

double linear_bd_pgf(double lambda, double mu, std::int64_t ell, double t, double z) {
  double g;
  if (std::abs(lambda - mu) < 1e-14) {
    g = (lambda * t * (1.0 - z) + z) / (lambda * t * (1.0 - z) + 1.0);
  } else {
    const double e = std::exp(-(lambda - mu) * t);
    g = (mu * (1.0 - z) - (mu - lambda * z) * e) / (lambda * (1.0 - z) - (mu - lambda * z) * e);
  }
  return std::pow(g, static_cast<double>(ell));
}

double linear_bd_extinction(double lambda, double mu, double t) {
  return linear_bd_pgf(lambda, mu, 1, t, 0.0);
}

double logistic_survival(double c1, double c2, double rho, double scale) {
  gsl_set_error_handler_off();
  const double d = c2 - c1;
  auto y = [d](double s) { return 1.0 / (1.0 + std::exp(-d * s)); };
  // int_s^u (mu_v - 1) dv with mu_v = c1 + d y_v
  auto log_growth = [=](double s, double u) {
    return (c1 - 1.0) * (u - s) + softplus(d * u) - softplus(d * s);
  };
  auto line_survival = [&](double s) {
    const double inner = qagiu(
        [&](double u) {
          return (c1 + d * y(u)) * std::exp(log_growth(s, u));
        },
        s, 1e-13, 1e-11);
    return 1.0 / (1.0 + inner);
  };
  const double T = 60.0 / d;
  const double mass = qag(
      [&](double s) {
        const double ys = y(s);
        return ys * (1.0 - ys) * line_survival(s);
      },
      -T, T, 1e-12, 1e-11);
  return -std::expm1(-scale * rho * mass);
}

double integral_I(double c1, double c2) {
  const double inner = qag([=](double x) { return 1.0 / ((1.0 - c1) * x + (1.0 - c2) * (1.0 - x)); },
                           0.0, 1.0, 1e-14, 1e-13);
  return 2.0 * (1.0 - c1) * (1.0 - c2) / (c2 - c1) * inner;
}

double one_locus_fixation(double s, double x) {
  auto scale = [s](double y) { return std::exp(-2.0 * s * y); };
  return qag(scale, 0.0, x, 1e-14, 1e-13) / qag(scale, 0.0, 1.0, 1e-14, 1e-13);
}

double positive_poisson_pmf(double mean, std::int64_t k) {
  if (k <= 0) return 0.0;
  return gsl_ran_poisson_pdf(static_cast<unsigned>(k), mean) / (1.0 - std::exp(-mean));
}

double normal_quantile(double p) { return gsl_cdf_ugaussian_Pinv(p); }

double chi_square_upper_quantile(int dof, double level) {
  return gsl_cdf_chisq_Qinv(level, static_cast<double>(dof));
}

double spearman(const std::vector<double>& x, const std::vector<double>& y) {
  std::vector<double> work(2 * x.size());
  return gsl_stats_spearman(x.data(), 1, y.data(), 1, x.size(), work.data());
}

double quantile(std::vector<double> xs, double q) {
  gsl_sort(xs.data(), 1, xs.size());
  return gsl_stats_quantile_from_sorted_data(xs.data(), 1, xs.size(), q);
}

std::array<double, 12> l_rates(const std::array<std::int64_t, 4>& l, double alpha, double c1,
                               double c2, double rho) {
  const double c[4] = {0.0, c1, c2, 1.0};
  const double n[4] = {double(l[0]), double(l[1]), double(l[2]), double(l[3])};
  std::array<double, 12> r{};
  for (int i = 0; i < 4; ++i) {
    r[i] = alpha * n[i];
    double d = n[i] * (n[i] - 1.0) / 2.0;
    for (int j = 0; j < 4; ++j) {
      if (j != i) d += 0.5 * n[i] * n[j] * (1.0 - c[i] + c[j]);
    }
    r[4 + i] = d;
  }
  r[8] = r[9] = 0.5 * n[1] * n[2] * rho / alpha;
  r[10] = r[11] = 0.5 * n[0] * n[3] * rho / alpha;
  return r;
}

std::array<double, 12> ltilde_rates(const std::array<std::int64_t, 4>& l, double alpha,
                                    double alpha1, double alpha2, double rho) {
  const double a[4] = {0.0, alpha1, alpha2, alpha};
  const double n[4] = {double(l[0]), double(l[1]), double(l[2]), double(l[3])};
  const double s = alpha + rho;
  std::array<double, 12> r{};
  for (int i = 0; i < 4; ++i) {
    r[i] = s * n[i];
    double d = n[i] * (n[i] - 1.0) / 2.0;
    for (int j = 0; j < 4; ++j) {
      if (j != i) d += 0.5 * n[i] * n[j] * (alpha - a[i] + a[j]) / s;
    }
    const double partners = (i == 0 || i == 3) ? n[1] + n[2] : n[0] + n[3];
    r[4 + i] = d + 0.5 * n[i] * partners * rho / s;
  }
  r[8] = r[9] = 0.5 * n[1] * n[2] * rho / s;
  r[10] = r[11] = 0.5 * n[0] * n[3] * rho / s;
  return r;
}

int selective_table(int label, int incoming, int continuing) {
  static const bool incoming_wins[4][4] = {
      // label 0 unused; rows are labels, columns incoming types
      {true, true, true, true},
      {false, true, true, true},
      {false, false, true, true},
      {false, false, false, true},
  };
  return incoming_wins[label][incoming] ? incoming : continuing;
}

int recombination_table(int a_line, int b_line) {
  const bool big_a = a_line == 1 || a_line == 3;
  const bool big_b = b_line == 2 || b_line == 3;
  if (!big_a && big_b) return 2;
  if (!big_a && !big_b) return 0;
  if (big_a && big_b) return 3;
  return 1;
}

}  // namespace oracle
