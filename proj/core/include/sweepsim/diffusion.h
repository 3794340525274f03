#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "sweepsim/params.h"
#include "sweepsim/rng.h"

namespace sweepsim::diffusion {

struct SdeConfig {
  /// Time step; 0 selects 1e-4 / (1 + alpha).
  double dt = 0.0;
  double t_max = 1.0;
  /// A type is fixed once its frequency exceeds 1 - eta and every other is below eta.
  double eta = 1e-6;
  int max_halvings = 20;
  /// Ascending times at which the state is reported.
  std::vector<double> sample_times;
  bool stop_at_fixation = true;
};

/// Throws std::invalid_argument unless dt >= 0, t_max > 0 and 0 < eta < 1e-2.
void validate(const SdeConfig& cfg);
double effective_dt(const SdeConfig& cfg, const ModelParams& p);

/// Selection and recombination drift of each coordinate.
std::array<double, kNumTypes> drift(const SimplexState& x, const ModelParams& p);

struct StepResult {
  SimplexState x;
  double dt_used = 0.0;
  int halvings = 0;
};

/// One Euler-Maruyama step. The step is halved while max |drift| * dt > 0.5;
/// six Gaussians (one per pair k < l) drive the noise, added to k and
/// subtracted from l. Negative entries are clamped and the state rescaled.
StepResult sde_step(const SimplexState& x, const ModelParams& p, double dt, RngStream& rng,
                    int max_halvings = 20);

/// Index of the fixed type under the eta rule, if any.
std::optional<int> fixed_type(const SimplexState& x, double eta);

struct SdeRun {
  std::optional<int> fixed;
  /// Fixation time S, or the final time when nothing fixed.
  double time = 0.0;
  SimplexState final_state;
  /// State at each requested sample time (the fixed vertex after fixation).
  std::vector<SimplexState> samples;
  std::int64_t steps = 0;
};

SdeRun simulate_sde(const SimplexState& x0, const ModelParams& p, const SdeConfig& cfg,
                    RngStream& rng);

/// (1 - e^{-2 s x}) / (1 - e^{-2 s}): one-locus fixation probability with
/// selection coefficient s from frequency x.
double one_locus_fixation_probability(double s, double x);

}  // namespace sweepsim::diffusion
