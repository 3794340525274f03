#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <string_view>
#include <vector>

#include "sweepsim/params.h"
#include "sweepsim/rng.h"

namespace sweepsim::jumpsim {

enum class Variant { L, Ltilde };

using Stoichiometry = std::array<int, kNumTypes>;

struct Reaction {
  Stoichiometry delta{};
  std::string_view name;
};

inline constexpr std::size_t kNumReactions = 12;
using RateVector = std::array<double, kNumReactions>;

/// The twelve reactions shared by both processes: births +e_i, deaths -e_i,
/// and the recombination moves +e_0-e_1-e_2, +e_3-e_1-e_2, +e_1-e_0-e_3,
/// +e_2-e_0-e_3 (in that order). Only the rates differ between variants.
class TransitionTable {
 public:
  explicit TransitionTable(Variant v);

  Variant variant() const { return variant_; }
  static const std::array<Reaction, kNumReactions>& reactions();

  /// All reaction rates at state s; returns their sum.
  double rates(const JumpState& s, const ModelParams& p, RateVector& out) const;

 private:
  Variant variant_;
};

enum class AbsorptionStatus { Fixation3, Failure, Ongoing };

std::string_view to_string(AbsorptionStatus s);

/// Fixation3 iff l0 = l1 = l2 = 0 < l3; Failure iff l3 = 0 and l1 * l2 = 0;
/// Ongoing otherwise. Throws std::domain_error on the all-zero state.
AbsorptionStatus classify_absorption(const JumpState& s);

JumpState initial_state_L(const ModelParams& p, RngStream& rng);

/// Independent Poisson(2 (alpha + rho) x_i) counts, resampled until the total
/// is positive (at most 10^6 attempts).
JumpState initial_state_Ltilde(const SimplexState& x, const ModelParams& p, RngStream& rng);

enum class RecordMode {
  None,    // final state and stopping times only
  Events,  // every transition
  Grid,    // the state at the requested sample times
};

struct Threshold {
  int type = 0;
  std::int64_t level = 0;
};

struct RunOptions {
  double t_max = 0.0;
  RecordMode record = RecordMode::None;
  /// Ascending sample times for RecordMode::Grid.
  std::vector<double> sample_times;
  /// First-passage times T_k^i = inf{t : L_i(t) >= k}.
  std::vector<Threshold> thresholds;
  /// Stop as soon as every registered threshold has been reached.
  bool stop_after_thresholds = false;
  /// Stop as soon as any registered threshold has been reached.
  bool stop_at_first_threshold = false;
  /// When false the run continues to t_max after absorption (grid recording
  /// of exponent paths needs the later states).
  bool stop_at_absorption = true;
  std::int64_t event_budget = 5'000'000'000;
  /// Share of particles needed for a provisional verdict at t_max.
  double tie_break_share = 0.99;
};

struct EventRecord {
  double time = 0.0;
  JumpState state;
};

struct Trajectory {
  /// Every transition (Events mode) or one entry per sample time (Grid mode).
  std::vector<EventRecord> records;
  std::vector<std::optional<double>> stopping_times;
  JumpState initial_state;
  JumpState final_state;
  double final_time = 0.0;
  std::int64_t events = 0;
};

struct LRun {
  Trajectory trajectory;
  AbsorptionStatus status = AbsorptionStatus::Ongoing;
  /// Time of absorption, or the stopping time of the run.
  double time = 0.0;
  /// Set when the status comes from the tie-break rule at t_max.
  bool provisional = false;
  bool budget_exceeded = false;
};

/// Default horizon 3 tau4 log(alpha)/alpha.
double default_t_max(const ModelParams& p);

/// Gillespie direct-method run of L from its random initial state.
LRun simulate_L(const ModelParams& p, RngStream& rng, const RunOptions& opt);

/// Gillespie run of either process from a given state. L stops at
/// Fixation3/Failure; L-tilde stops once a single type remains.
LRun simulate_from(Variant v, const JumpState& start, const ModelParams& p, RngStream& rng,
                   const RunOptions& opt);

struct LtildeRun {
  LRun run;
  /// Surviving type once absorbed.
  std::optional<int> fixed_type;
};

LtildeRun simulate_Ltilde(const SimplexState& x, const ModelParams& p, RngStream& rng,
                          const RunOptions& opt);

// ---------------------------------------------------------------------------

struct VOptions {
  double step = 1e-3;
  /// 0 picks the logistic crossing time plus the tail window.
  double t_max = 0.0;
  bool record_path = false;
  /// Early survival once extinction is less likely than this.
  double survival_tolerance = 1e-12;
  std::int64_t event_budget = 500'000'000;
};

struct VPathPoint {
  double time = 0.0;
  double v1 = 0.0;
  std::int64_t v3 = 0;
};

struct VRun {
  bool survived = false;
  bool early_stop = false;
  std::int64_t final_v3 = 0;
  double final_time = 0.0;
  std::vector<VPathPoint> path;
};

/// Deterministic part of the rescaled process: V1 solves
/// dV1 = -(c2-c1)/2 V1 (2 - V1) from 2(1 - eps) by fourth-order Runge-Kutta
/// on a fixed step, and V2 = 2 - V1. Shared by all replicates.
class VDrive {
 public:
  VDrive(const ModelParams& p, double epsilon, const VOptions& opt = {});

  double v1(double t) const;
  double t_max() const { return t_max_; }
  double step() const { return step_; }
  const ModelParams& params() const { return p_; }
  double epsilon() const { return epsilon_; }

 private:
  double drift(double v) const;

  ModelParams p_;
  double epsilon_;
  double step_;
  double t_max_;
  std::vector<double> grid_;
};

/// V3 is a branching process with splitting rate 1, per-individual death
/// rate (c1/2) V1 + (c2/2) V2 and immigration (rho/2) V1 V2, sampled exactly
/// by thinning against the bounds c2 and rho/2 with V1 interpolated between
/// the Runge-Kutta nodes.
VRun simulate_V(const VDrive& drive, RngStream& rng, const VOptions& opt = {});
VRun simulate_V(const ModelParams& p, double epsilon, RngStream& rng, const VOptions& opt = {});

// ---------------------------------------------------------------------------

using CountRateFn = std::function<double(std::int64_t)>;

struct StopSpec {
  double t_max = 1.0;
  /// Stop when the count reaches this level (T_n); 0 disables.
  std::int64_t upper = 0;
  bool stop_on_extinction = true;
  std::vector<double> sample_times;
  std::int64_t event_budget = 5'000'000'000;
};

enum class BdStop { Extinct, HitUpper, TimeLimit, Budget };

std::string_view to_string(BdStop s);

struct BdRun {
  BdStop reason = BdStop::TimeLimit;
  std::int64_t final_count = 0;
  double time = 0.0;
  /// Integral of the count over [0, time].
  double occupation = 0.0;
  std::int64_t events = 0;
  std::vector<std::int64_t> samples;
};

/// Exact simulation of a birth-death chain with state-dependent rates.
BdRun simulate_birth_death(const CountRateFn& birth, const CountRateFn& death,
                           std::int64_t initial, RngStream& rng, const StopSpec& stop);

}  // namespace sweepsim::jumpsim
