#pragma once

#include <cfloat>
#include <cmath>
#include <algorithm>
#include <functional>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <vector>

namespace sweepsim {

struct QuadratureOptions {
  double abs_tol = 1e-12;
  int max_depth = 40;
  /// Levels that are always subdivided, so narrow features of long intervals
  /// cannot slip between the first five sample points.
  int min_depth = 5;
};

struct QuadratureResult {
  double value = 0.0;
  double error_estimate = 0.0;
  bool converged = true;
  long evaluations = 0;
};

class QuadratureError : public std::runtime_error {
 public:
  QuadratureError(const std::string& what, double achieved)
      : std::runtime_error(what), achieved_tolerance(achieved) {}
  double achieved_tolerance;
};

namespace detail {

template <class F>
struct SimpsonState {
  F& f;
  const QuadratureOptions& opt;
  double floor_tol;
  QuadratureResult result;

  double recurse(double a, double fa, double m, double fm, double b, double fb, double whole,
                 double tol, int depth) {
    const double lm = 0.5 * (a + m);
    const double rm = 0.5 * (m + b);
    const double flm = f(lm);
    const double frm = f(rm);
    result.evaluations += 2;
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double delta = left + right - whole;
    const bool forced = depth < opt.min_depth;
    if (!forced) {
      const double limit = std::max(tol, floor_tol);
      if (std::abs(delta) <= 15.0 * limit || depth >= opt.max_depth || !(b - a > 1e-300)) {
        if (std::abs(delta) > 15.0 * limit) result.converged = false;
        result.error_estimate += std::abs(delta) / 15.0;
        return left + right + delta / 15.0;
      }
    }
    return recurse(a, fa, lm, flm, m, fm, left, 0.5 * tol, depth + 1) +
           recurse(m, fm, rm, frm, b, fb, right, 0.5 * tol, depth + 1);
  }
};

}  // namespace detail

/// Adaptive Simpson quadrature with an absolute tolerance and a cap on the
/// number of interval halvings. A relative floor of a few ulps of the
/// running estimate keeps the recursion from chasing rounding noise.
template <class F>
QuadratureResult adaptive_simpson(F&& f, double a, double b, const QuadratureOptions& opt = {}) {
  if (a == b) return {};
  double sign = 1.0;
  if (b < a) {
    std::swap(a, b);
    sign = -1.0;
  }
  const double fa = f(a);
  const double fb = f(b);
  const double m = 0.5 * (a + b);
  const double fm = f(m);
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  detail::SimpsonState<std::remove_reference_t<F>> st{f, opt, 0.0, {}};
  st.result.evaluations = 3;
  st.floor_tol = 32.0 * DBL_EPSILON * std::max(std::abs(whole), 1e-300);
  const double v = st.recurse(a, fa, m, fm, b, fb, whole, opt.abs_tol, 0);
  st.result.value = sign * v;
  return st.result;
}

/// Nodes and weights of the n-point Gauss-Legendre rule on [-1, 1].
struct GaussLegendreRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};
const GaussLegendreRule& gauss_legendre_rule(int n);

/// Fixed-order Gauss-Legendre quadrature, exact for polynomials of degree < 2n.
template <class F>
double gauss_legendre(F&& f, double a, double b, int n = 16) {
  const auto& rule = gauss_legendre_rule(n);
  const double half = 0.5 * (b - a);
  const double mid = 0.5 * (a + b);
  double sum = 0.0;
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
    sum += rule.weights[i] * f(mid + half * rule.nodes[i]);
  }
  return half * sum;
}

/// Non-template entry point for callers holding a type-erased integrand.
QuadratureResult integrate(const std::function<double(double)>& f, double a, double b,
                           const QuadratureOptions& opt = {});

}  // namespace sweepsim
