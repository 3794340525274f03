#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "sweepsim/params.h"
#include "sweepsim/rng.h"

namespace sweepsim::asrg {

/// Branching labels: selective 1, 2, 3 and recombination.
enum class Label : std::uint8_t { Sel1 = 1, Sel2 = 2, Sel3 = 3, Recomb = 4 };

std::string_view to_string(Label l);

/// Label probabilities (alpha1, alpha2 - alpha1, alpha - alpha2, rho) / (alpha + rho).
std::array<double, 4> label_probabilities(const ModelParams& p);
Label sample_branch_label(const ModelParams& p, RngStream& rng);

using ParticleId = std::uint32_t;

enum class EventKind : std::uint8_t { Coalescence, Branching };

/// One event of the graph at backward time beta.
/// Coalescence: `lower` holds the merging pair, `upper[0]` the new particle.
/// Branching: `lower[0]` is replaced by `upper[0]` and `upper[1]`; for a
/// selective label upper[0] is the incoming and upper[1] the continuing line,
/// for recombination upper[0] is the A/a line and upper[1] the B/b line.
struct AsrgEvent {
  double beta = 0.0;
  EventKind kind = EventKind::Coalescence;
  Label label = Label::Sel1;
  std::array<ParticleId, 2> lower{};
  std::array<ParticleId, 2> upper{};
};

struct AsrgGraph {
  double tau = 0.0;
  /// Particles at beta = 0, in sample order.
  std::vector<ParticleId> sample;
  /// Particles alive at beta = tau.
  std::vector<ParticleId> top;
  std::vector<AsrgEvent> events;
  ParticleId next_id = 0;
};

inline constexpr std::size_t kDefaultParticleBudget = 1'000'000;

AsrgGraph build_asrg(std::int64_t k, const ModelParams& p, double tau, RngStream& rng,
                     std::size_t particle_budget = kDefaultParticleBudget);

/// Selective rule: the incoming type wins iff it is at least the label.
int selective_outcome(int label, int incoming, int continuing);

/// Recombination lookup: A/a locus from the A/a line, B/b locus from the B/b line.
int recombination_outcome(int a_line, int b_line);

/// Types J_1..J_k of the sample given the types of graph.top (same order).
std::vector<int> propagate_types(const AsrgGraph& g, const std::vector<int>& top_types);

struct LineCountPath {
  std::vector<double> times;
  std::vector<std::int64_t> counts;
};

/// Birth k -> k+1 at (alpha + rho) k, death k -> k-1 at k (k-1) / 2.
LineCountPath simulate_line_count(std::int64_t k, double alpha, double rho, double beta_max,
                                  RngStream& rng);

struct LineCountStats {
  /// Time spent at each count (index = count).
  std::vector<double> occupation;
  /// Jumps k -> k+1 and k -> k-1 counted at the source level k.
  std::vector<std::int64_t> up;
  std::vector<std::int64_t> down;
  /// Histogram of the count read off at regular sample times.
  std::vector<std::int64_t> sampled;
  std::int64_t samples = 0;
  double total_time = 0.0;
};

/// Runs the line-counting chain from k, discards [0, burn_in], then records
/// occupation, jump counts and `samples` readings spaced by `spacing`.
LineCountStats line_count_statistics(std::int64_t k, double alpha, double rho, double burn_in,
                                     double spacing, std::int64_t samples, RngStream& rng);

/// Poisson(2 (alpha + rho)) conditioned to be positive, by rejection.
std::int64_t sample_pi(double alpha, double rho, RngStream& rng);

struct BernoulliEstimate {
  double estimate = 0.0;
  double standard_error = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  std::int64_t successes = 0;
  std::int64_t trials = 0;
};

/// P(J_1 = j_1, ..., J_k = j_k) with the top types i.i.d. from x.
BernoulliEstimate duality_estimate(const SimplexState& x, const std::vector<int>& targets,
                                   double tau, const ModelParams& p, std::int64_t replicates,
                                   RngStream& rng);

/// One-line version: counts of J_1 = j for j = 0..3 over the replicates.
std::array<std::int64_t, 4> duality_type_counts(const SimplexState& x, double tau,
                                                const ModelParams& p, std::int64_t replicates,
                                                RngStream& rng);

struct FixationEstimate {
  std::array<double, 4> probability{};
  std::array<std::int64_t, 4> counts{};
  std::int64_t valid = 0;
  /// Replicates whose line count never reached one before tau.
  std::int64_t not_single = 0;
  double tau = 0.0;
};

/// Backward horizon long enough for the line count, started from its
/// equilibrium, to visit one with high probability: 5 / (P(Pi = 1) (alpha + rho)).
double default_fixation_tau(double alpha, double rho);

/// Starts Pi lines, builds the graph up to tau and reports how often all
/// sample types coincide with type i. Only the part of the graph above the
/// last time the line count was one is kept.
FixationEstimate asrg_fixation_estimate(const SimplexState& x, const ModelParams& p, double tau,
                                        std::int64_t replicates, RngStream& rng);

/// Outcome of a single replicate: the common type, or empty when the line
/// count never reached one.
std::optional<int> asrg_fixation_replicate(const SimplexState& x, const ModelParams& p,
                                           double tau, RngStream& rng);

}  // namespace sweepsim::asrg
