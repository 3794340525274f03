#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sweepsim/analytics.h"
#include "sweepsim/jump_process.h"
#include "sweepsim/params.h"
#include "sweepsim/stats.h"

namespace sweepsim::experiments {

enum class ExperimentKind { FixationProbability, FixationTime, ExponentPath };

std::string_view to_string(ExperimentKind k);
ExperimentKind experiment_kind_from_string(std::string_view s);

struct TolerancePolicy {
  /// Final-alpha estimate within this relative distance of the limit.
  double relative_band = 0.25;
  /// Median rescaled fixation time within this relative distance of tau4.
  double time_band = 0.20;
  /// Super-critical regime: final estimate below this.
  double absolute_band = 0.02;
  /// Trend slack in combined standard errors.
  double trend_se = 2.0;
  /// Reports with more than this share of undecided runs are invalid.
  double max_ongoing_share = 0.05;
  /// Exponent paths: allowed distance from the limit path.
  double exponent_band = 0.15;
  /// Exponent paths: half-width of the window dropped around breakpoints.
  double breakpoint_window = 0.1;
};

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::FixationProbability;
  std::vector<double> alphas{200.0, 1000.0, 5000.0, 10000.0};
  double rho = 1.0;
  double psi = 0.2;
  double c1 = 0.4;
  double c2 = 0.8;
  double c_init = 1.0;
  std::int64_t replicates = 10000;
  /// Optional per-alpha replicate counts (same length as alphas).
  std::vector<std::int64_t> replicates_per_alpha;
  std::uint64_t seed = 1;
  std::uint64_t first_stream = 0;
  /// Multiplies the default L horizon 3 tau4 log(alpha)/alpha.
  double t_max_factor = 1.0;
  /// Rescaled grid for exponent paths.
  std::vector<double> tau_grid;
  TolerancePolicy tolerance;
  /// Worker threads; 0 means worker_count().
  unsigned threads = 0;

  /// Replicates >= 100, alphas non-empty and ascending, parameters valid.
  void validate() const;
  std::int64_t replicates_at(std::size_t alpha_index) const;
  ModelParams params_at(double alpha) const;
  /// First stream id used at the given alpha index.
  std::uint64_t stream_base(std::size_t alpha_index) const;
};

nlohmann::json config_to_json(const ExperimentConfig& cfg);
/// Strict reader: unknown keys raise SchemaError with the offending path.
ExperimentConfig config_from_json(const nlohmann::json& j);
/// Git-style blob hash of the canonical config JSON.
std::string config_hash(const ExperimentConfig& cfg);

enum class Verdict { WithinTolerance, TrendConsistent, Fail };

std::string_view to_string(Verdict v);

/// Outcome of one L replicate, as written to JSONL.
struct ReplicateRecord {
  double alpha = 0.0;
  std::uint64_t stream = 0;
  jumpsim::AbsorptionStatus status = jumpsim::AbsorptionStatus::Ongoing;
  double time = 0.0;
  double rescaled_time = 0.0;
  bool provisional = false;
  bool budget_exceeded = false;
  std::int64_t events = 0;
  JumpState initial_state;
};

nlohmann::json to_json(const ReplicateRecord& r);

struct EstimateReport {
  double alpha = 0.0;
  std::int64_t replicates = 0;
  std::int64_t successes = 0;
  std::int64_t ongoing = 0;
  std::int64_t provisional = 0;
  std::int64_t budget_exceeded = 0;
  double estimate = 0.0;
  double standard_error = 0.0;
  stats::Interval ci;
  double theory = 0.0;
  analytics::ProbabilityBounds bounds;
  /// Fixation-time reports: quartiles of the rescaled absorption time.
  std::optional<stats::Quartiles> time_quartiles;
  Verdict verdict = Verdict::Fail;
  /// Set when too many runs stayed undecided or too few fixed.
  bool invalid = false;
  std::string note;
  double runtime_seconds = 0.0;
};

struct SweepReport {
  ExperimentConfig config;
  std::vector<EstimateReport> per_alpha;
  std::vector<ReplicateRecord> replicates;
  bool hard_band_pass = false;
  bool trend_pass = false;
  /// Spearman correlation of alpha against the distance to the target.
  double trend_spearman = 0.0;
  Verdict overall = Verdict::Fail;
  std::string hash;
  std::uint64_t stream_first = 0;
  std::uint64_t stream_last = 0;
};

nlohmann::json to_json(const SweepReport& r);
/// One row per alpha: alpha, replicates, estimate, se, ci_low, ci_high, theory, verdict.
std::string to_csv(const SweepReport& r);

/// Runs all L replicates of the configuration (any kind).
std::vector<ReplicateRecord> run_L_replicates(const ExperimentConfig& cfg, std::size_t alpha_index);

/// Fraction of Fixation3 absorptions per alpha with Wilson intervals, against
/// the limit (sub-critical) or zero (otherwise).
SweepReport estimate_fixation_probability(const ExperimentConfig& cfg);

/// Median and quartiles of (alpha / log alpha) times the absorption time of
/// the Fixation3 runs, against tau4.
SweepReport estimate_conditional_fixation_time(const ExperimentConfig& cfg);

// ---------------------------------------------------------------------------
// Exponent paths.

struct ExponentSample {
  double tau = 0.0;
  std::array<analytics::Exponent, kNumTypes> q{analytics::Exponent::neg_inf(),
                                               analytics::Exponent::neg_inf(),
                                               analytics::Exponent::neg_inf(),
                                               analytics::Exponent::neg_inf()};
};

/// log L_i(tau log(alpha)/alpha) / log(alpha) on the grid. The trajectory must
/// carry grid or event records; grid points past its end throw.
std::vector<ExponentSample> extract_exponent_path(const jumpsim::Trajectory& tr, double alpha,
                                                  const std::vector<double>& tau_grid);

struct ExponentComparison {
  double tau = 0.0;
  int type = 0;
  analytics::Exponent empirical = analytics::Exponent::neg_inf();
  analytics::Exponent theory = analytics::Exponent::neg_inf();
  bool excluded = false;
  bool within = false;
};

struct ExponentPathReport {
  double alpha = 0.0;
  analytics::Branch branch = analytics::Branch::Fixation3;
  std::int64_t runs = 0;
  std::int64_t matching_runs = 0;
  std::vector<double> tau_grid;
  /// Median over matching runs of each type's exponent per grid point.
  std::vector<ExponentSample> median_path;
  std::vector<ExponentComparison> comparisons;
  std::int64_t checked = 0;
  std::int64_t within = 0;
  double max_deviation = 0.0;
  /// Super-critical shape: Spearman of the median type-1 exponent against
  /// tau between sigma1 and sigma2.
  std::optional<double> decreasing_spearman;
};

/// Median of exponents where NEG_INF ranks below every finite value.
analytics::Exponent median_exponent(std::vector<analytics::Exponent> v);

/// Runs L at cfg.alphas.back() with grid recording, keeps the runs of the
/// branch (Fixation3 in the sub-critical regime, type-2 sweep otherwise) and
/// compares their median exponents with the limit path.
ExponentPathReport exponent_path_experiment(const ExperimentConfig& cfg);

nlohmann::json to_json(const ExponentPathReport& r);

/// Tidy CSV rows "tau,series,value,branch,alpha" for the theory path of a
/// branch (breakpoints included) and, when given, the empirical medians.
std::string exponent_plot_csv(const analytics::ScenarioTimes& times, analytics::Branch branch,
                              const std::vector<double>& tau_grid,
                              const ExponentPathReport* empirical);

// ---------------------------------------------------------------------------
// Cross-module oracle experiments. Each returns the raw numbers; `passed`
// applies the default rule stated next to it.

struct ComparisonResult {
  double empirical = 0.0;
  double standard_error = 0.0;
  double target = 0.0;
  /// |empirical - target| / standard_error.
  double z = 0.0;
  std::int64_t replicates = 0;
  bool passed = false;  // z <= 3
  nlohmann::json extra;
};

/// Thinning SSA of the logistic-driven branching process with immigration
/// gamma_scale * rho * y (1 - y) against the closed-form survival.
ComparisonResult survival_ssa_experiment(double c1, double c2, double rho, std::int64_t replicates,
                                    std::uint64_t seed, double gamma_scale = 1.0);

/// Survival frequency of the rescaled V-process against immigration_survival(c1, c2, 2 rho).
/// `extra` carries the survival of the same process started at y = eps
/// computed by quadrature.
ComparisonResult v_process_experiment(double c1, double c2, double rho, double epsilon,
                                      std::int64_t replicates, std::uint64_t seed);

struct DualityResult {
  double alpha = 0.0;
  double tau = 0.0;
  std::array<double, 4> sde_mean{};
  std::array<double, 4> sde_se{};
  std::array<double, 4> asrg_mean{};
  std::array<double, 4> asrg_se{};
  /// max_j |sde - asrg| / combined SE.
  double max_z = 0.0;
  bool passed = false;  // max_z <= 3
};

/// E[X_j(tau)] from SDE paths against the one-line ASRG estimate, alpha_i = c_i alpha.
DualityResult duality_experiment(double alpha, double c1, double c2, double rho,
                                 const SimplexState& x, double tau, std::int64_t sde_paths,
                                 std::int64_t asrg_replicates, double dt, std::uint64_t seed);

struct PiEquilibriumResult {
  double tv = 0.0;
  /// Largest standardized flux imbalance across neighbouring levels.
  double max_balance_z = 0.0;
  std::int64_t levels_checked = 0;
  std::int64_t samples = 0;
  bool tv_passed = false;       // tv < 0.05
  bool balance_passed = false;  // max_balance_z <= 4
};

PiEquilibriumResult pi_equilibrium_experiment(double alpha, double rho, std::int64_t samples,
                                              std::uint64_t seed);

/// P(L(t) = 0) for binary branching with rates lambda > mu from one
/// individual, against mu/lambda with the exponential envelope plus 3 SE.
ComparisonResult branching_extinction_experiment(double lambda, double mu, double t,
                                                 std::int64_t replicates, std::uint64_t seed);

/// Mean occupation integral up to T_ell (or extinction) for rates a i, b i
/// from k, against (ell - k)/(a - b); passes when mean <= bound + 3 SE.
ComparisonResult occupation_experiment(double a, double b, std::int64_t k, std::int64_t ell,
                                       std::int64_t replicates, std::uint64_t seed);

/// Extinction time from z alpha^p with birth alpha k and death alpha (1+c) k:
/// share of runs with |(alpha/log alpha) T_0 - p/c| > band. Passes below 5%.
ComparisonResult subcritical_hitting_experiment(double c, double p, double z, double alpha,
                                                double band, std::int64_t replicates,
                                                std::uint64_t seed);

/// L from its initial law at alpha: share of sampled points in the window
/// [0, log(alpha)/alpha] with |total/alpha - 2| > 0.15. Passes below 1%.
ComparisonResult concentration_experiment(double alpha, std::int64_t replicates,
                                          std::uint64_t seed);

/// Two-type reduction of the SDE (rho = 0, x2 = x3 = 0): fixation frequency of
/// type 1 from x against (1 - e^{-2 a1 x}) / (1 - e^{-2 a1}).
ComparisonResult one_locus_sde_experiment(double alpha1, double x, std::int64_t paths, double dt,
                                          std::uint64_t seed);

/// Share of L runs with T_1^3 < T^2_{eps alpha}. Passes below 5%.
ComparisonResult early_recombinant_experiment(double alpha, double c1, double c2, double rho,
                                              double psi, double epsilon,
                                              std::int64_t replicates, std::uint64_t seed);

// ---------------------------------------------------------------------------

struct CheckResult {
  std::string name;
  bool passed = false;
  std::uint64_t seed = 0;
  nlohmann::json details;
};

struct OracleSuiteConfig {
  /// Only the exact, deterministic and trivial checks.
  bool quick = true;
  std::uint64_t seed = 20240601;
};

struct OracleReport {
  std::vector<CheckResult> checks;
  bool all_passed = false;
};

OracleReport run_oracle_suite(const OracleSuiteConfig& cfg);
nlohmann::json to_json(const OracleReport& r);

}  // namespace sweepsim::experiments
