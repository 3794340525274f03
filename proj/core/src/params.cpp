#include "sweepsim/params.h"

#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace sweepsim {

std::string_view to_string(Regime r) {
  switch (r) {
    case Regime::SubCritical: return "SubCritical";
    case Regime::SuperCritical: return "SuperCritical";
    case Regime::NonEstablishing: return "NonEstablishing";
    case Regime::Boundary: return "Boundary";
  }
  return "?";
}

double ModelParams::selection(int type) const {
  switch (type) {
    case 0: return 0.0;
    case 1: return alpha1;
    case 2: return alpha2;
    case 3: return alpha;
  }
  throw std::out_of_range("type index must be in 0..3");
}

double ModelParams::limit_ratio(int type) const {
  switch (type) {
    case 0: return 0.0;
    case 1: return c1;
    case 2: return c2;
    case 3: return 1.0;
  }
  throw std::out_of_range("type index must be in 0..3");
}

ModelParams make_params(double alpha, double c1, double c2, double rho, double psi,
                        double c_init) {
  ModelParams p;
  p.alpha = alpha;
  p.alpha1 = c1 * alpha;
  p.alpha2 = c2 * alpha;
  p.rho = rho;
  p.psi = psi;
  p.c_init = c_init;
  p.c1 = c1;
  p.c2 = c2;
  return p;
}

Regime classify_regime(double psi, double c1, double c2) {
  if (!(c1 > 0.0 && c2 > c1)) throw std::invalid_argument("require 0 < c1 < c2");
  const double critical = c1 / c2;
  if (std::abs(psi - critical) <= 1e-12 * std::max(1.0, critical)) return Regime::Boundary;
  if (psi < critical) return Regime::SubCritical;
  if (psi <= 1.0) return Regime::SuperCritical;
  return Regime::NonEstablishing;
}

ParamsValidation validate_params(const ModelParams& p, bool require_regime,
                                 double ratio_tolerance) {
  auto fail = [](const std::string& what) { throw std::invalid_argument(what); };
  if (!(p.alpha > 0.0)) fail("alpha must be > 0");
  if (!(p.alpha1 > 0.0 && p.alpha1 < p.alpha2 && p.alpha2 < p.alpha))
    fail("require 0 < alpha1 < alpha2 < alpha");
  if (!(p.c1 > 0.0 && p.c1 < p.c2 && p.c2 < 1.0)) fail("require 0 < c1 < c2 < 1");
  if (!(p.rho >= 0.0)) fail("rho must be >= 0");
  if (!(p.psi > 0.0)) fail("psi must be > 0");
  if (!(p.c_init > 0.0)) fail("c_init must be > 0");

  ParamsValidation out{classify_regime(p.psi, p.c1, p.c2), {}};
  if (require_regime && out.regime == Regime::Boundary)
    fail("boundary regime psi = c1/c2 has no limit formula");

  const double r1 = p.alpha1 / p.alpha;
  const double r2 = p.alpha2 / p.alpha;
  if (std::abs(r1 - p.c1) > ratio_tolerance) {
    std::ostringstream os;
    os << "alpha1/alpha = " << r1 << " differs from c1 = " << p.c1;
    out.warnings.push_back(os.str());
  }
  if (std::abs(r2 - p.c2) > ratio_tolerance) {
    std::ostringstream os;
    os << "alpha2/alpha = " << r2 << " differs from c2 = " << p.c2;
    out.warnings.push_back(os.str());
  }
  return out;
}

void SimplexState::normalize() {
  double sum = 0.0;
  for (double& v : x) {
    if (!(v > 0.0)) v = 0.0;
    sum += v;
  }
  if (!(sum > 0.0)) throw std::domain_error("simplex state collapsed to zero");
  for (double& v : x) v /= sum;
}

bool SimplexState::on_simplex(double tol) const {
  double sum = 0.0;
  for (double v : x) {
    if (v < 0.0) return false;
    sum += v;
  }
  return std::abs(sum - 1.0) <= tol;
}

SimplexState make_simplex(double x0, double x1, double x2, double x3) {
  SimplexState s{{x0, x1, x2, x3}};
  if (!s.on_simplex(1e-9)) throw std::invalid_argument("state is not on the simplex");
  return s;
}

SimplexState derive_initial_frequencies(const ModelParams& p, double delta) {
  if (delta < 0.0 || p.c_init < 0.0) throw std::invalid_argument("delta and c must be >= 0");
  const double x1 = p.c_init * std::pow(p.alpha, -p.psi);
  if (delta + x1 >= 1.0 && !(delta == 0.0 && x1 == 0.0))
    throw std::invalid_argument("infeasible initial frequencies: delta + c alpha^-psi >= 1");
  SimplexState s{{1.0 - delta - x1, x1, delta, 0.0}};
  return s;
}

}  // namespace sweepsim
