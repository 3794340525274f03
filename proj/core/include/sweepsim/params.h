#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace sweepsim {

// Type indices: 0 = ab, 1 = Ab, 2 = aB, 3 = AB.
inline constexpr int kNumTypes = 4;

enum class Regime {
  SubCritical,      // psi < c1/c2
  SuperCritical,    // c1/c2 < psi <= 1
  NonEstablishing,  // psi > 1
  Boundary,         // psi == c1/c2
};

std::string_view to_string(Regime r);

/// All scalar model constants. c1 and c2 are the limiting ratios alpha1/alpha
/// and alpha2/alpha; they are stored independently so that limit formulas and
/// finite-alpha simulations can be decoupled.
struct ModelParams {
  double alpha = 100.0;
  double alpha1 = 40.0;
  double alpha2 = 80.0;
  double rho = 1.0;
  double psi = 0.2;
  double c_init = 1.0;
  double c1 = 0.4;
  double c2 = 0.8;

  /// Selection coefficient of type i (alpha_0 = 0, alpha_3 = alpha).
  double selection(int type) const;
  /// Limiting ratio c_i (c_0 = 0, c_3 = 1).
  double limit_ratio(int type) const;

  bool operator==(const ModelParams&) const = default;
};

/// Convenience constructor with alpha_i = c_i * alpha.
ModelParams make_params(double alpha, double c1, double c2, double rho, double psi,
                        double c_init = 1.0);

struct ParamsValidation {
  Regime regime;
  std::vector<std::string> warnings;
};

inline constexpr double kDefaultRatioTolerance = 1e-9;

Regime classify_regime(double psi, double c1, double c2);

/// Checks orderings and positivity and classifies the regime. Throws
/// std::invalid_argument on ordering violations, and on the Boundary regime
/// when `require_regime` is set. An inconsistency between alpha_i/alpha and
/// c_i beyond `ratio_tolerance` produces a warning, not an error.
ParamsValidation validate_params(const ModelParams& p, bool require_regime = true,
                                 double ratio_tolerance = kDefaultRatioTolerance);

/// Frequency vector (X0, X1, X2, X3) on the 3-simplex.
struct SimplexState {
  std::array<double, kNumTypes> x{1.0, 0.0, 0.0, 0.0};

  double operator[](int i) const { return x[static_cast<std::size_t>(i)]; }
  double& operator[](int i) { return x[static_cast<std::size_t>(i)]; }

  /// Clamps negatives to zero and rescales so the entries sum to one.
  void normalize();
  bool on_simplex(double tol = 1e-12) const;

  bool operator==(const SimplexState&) const = default;
};

SimplexState make_simplex(double x0, double x1, double x2, double x3);

/// (1 - delta - c alpha^-psi, c alpha^-psi, delta, 0).
SimplexState derive_initial_frequencies(const ModelParams& p, double delta);

/// Particle counts (L0, L1, L2, L3) of the jump processes.
struct JumpState {
  std::array<std::int64_t, kNumTypes> l{0, 0, 0, 0};

  std::int64_t operator[](int i) const { return l[static_cast<std::size_t>(i)]; }
  std::int64_t& operator[](int i) { return l[static_cast<std::size_t>(i)]; }
  std::int64_t total() const { return l[0] + l[1] + l[2] + l[3]; }

  bool operator==(const JumpState&) const = default;
};

}  // namespace sweepsim
