#include "sweepsim/asrg.h"

#include <cmath>
#include <stdexcept>

#include "sweepsim/analytics.h"
#include "sweepsim/stats.h"

namespace sweepsim::asrg {

std::string_view to_string(Label l) {
  switch (l) {
    case Label::Sel1: return "1";
    case Label::Sel2: return "2";
    case Label::Sel3: return "3";
    case Label::Recomb: return "a";
  }
  return "?";
}

std::array<double, 4> label_probabilities(const ModelParams& p) {
  const double total = p.alpha + p.rho;
  return {p.alpha1 / total, (p.alpha2 - p.alpha1) / total, (p.alpha - p.alpha2) / total,
          p.rho / total};
}

Label sample_branch_label(const ModelParams& p, RngStream& rng) {
  const double u = rng.uniform() * (p.alpha + p.rho);
  if (u < p.alpha1) return Label::Sel1;
  if (u < p.alpha2) return Label::Sel2;
  if (u < p.alpha) return Label::Sel3;
  return Label::Recomb;
}

int selective_outcome(int label, int incoming, int continuing) {
  return incoming >= label ? incoming : continuing;
}

int recombination_outcome(int a_line, int b_line) {
  const bool has_a = a_line == 1 || a_line == 3;
  const bool has_b = b_line == 2 || b_line == 3;
  return (has_a ? 1 : 0) + (has_b ? 2 : 0);
}

namespace {

// Shared event generator: advances the particle set by one event.
class GraphGrower {
 public:
  GraphGrower(const ModelParams& p, RngStream& rng, std::size_t budget)
      : p_(p), rng_(rng), budget_(budget), birth_(p.alpha + p.rho) {}

  ParticleId fresh() { return next_id_++; }
  ParticleId next_id() const { return next_id_; }

  std::vector<ParticleId> alive;

  double total_rate() const {
    const double n = static_cast<double>(alive.size());
    return birth_ * n + 0.5 * n * (n - 1.0);
  }

  AsrgEvent step(double beta) {
    AsrgEvent ev;
    ev.beta = beta;
    const double n = static_cast<double>(alive.size());
    const double coal = 0.5 * n * (n - 1.0);
    if (rng_.uniform() * total_rate() < coal) {
      ev.kind = EventKind::Coalescence;
      const std::size_t i = take_index();
      ev.lower[0] = remove_at(i);
      ev.lower[1] = remove_at(take_index());
      ev.upper[0] = fresh();
      alive.push_back(ev.upper[0]);
    } else {
      ev.kind = EventKind::Branching;
      ev.label = sample_branch_label(p_, rng_);
      ev.lower[0] = remove_at(take_index());
      ParticleId first = fresh();
      ParticleId second = fresh();
      // Which new line takes which role is a fair coin.
      if (rng_.bernoulli(0.5)) std::swap(first, second);
      ev.upper = {first, second};
      alive.push_back(first);
      alive.push_back(second);
      if (alive.size() > budget_) throw std::runtime_error("particle budget exceeded");
    }
    return ev;
  }

 private:
  std::size_t take_index() { return static_cast<std::size_t>(rng_.index(alive.size())); }
  ParticleId remove_at(std::size_t i) {
    const ParticleId id = alive[i];
    alive[i] = alive.back();
    alive.pop_back();
    return id;
  }

  const ModelParams& p_;
  RngStream& rng_;
  std::size_t budget_;
  double birth_;
  ParticleId next_id_ = 0;
};

void replay(const std::vector<AsrgEvent>& events, std::vector<int>& type) {
  for (auto it = events.rbegin(); it != events.rend(); ++it) {
    const AsrgEvent& ev = *it;
    if (ev.kind == EventKind::Coalescence) {
      const int t = type[ev.upper[0]];
      type[ev.lower[0]] = t;
      type[ev.lower[1]] = t;
    } else if (ev.label == Label::Recomb) {
      type[ev.lower[0]] = recombination_outcome(type[ev.upper[0]], type[ev.upper[1]]);
    } else {
      type[ev.lower[0]] =
          selective_outcome(static_cast<int>(ev.label), type[ev.upper[0]], type[ev.upper[1]]);
    }
  }
}

int draw_type(const SimplexState& x, RngStream& rng) {
  const double u = rng.uniform();
  double acc = 0.0;
  for (int i = 0; i < kNumTypes - 1; ++i) {
    acc += x[i];
    if (u < acc) return i;
  }
  // Skip trailing zero-mass types if rounding lands past the last positive entry.
  for (int i = kNumTypes - 1; i > 0; --i) {
    if (x[i] > 0.0) return i;
  }
  return 0;
}

}  // namespace

AsrgGraph build_asrg(std::int64_t k, const ModelParams& p, double tau, RngStream& rng,
                     std::size_t particle_budget) {
  if (k < 1) throw std::invalid_argument("need at least one line");
  if (tau < 0.0) throw std::invalid_argument("tau must be >= 0");
  GraphGrower grow(p, rng, particle_budget);
  AsrgGraph g;
  g.tau = tau;
  for (std::int64_t i = 0; i < k; ++i) {
    const ParticleId id = grow.fresh();
    g.sample.push_back(id);
    grow.alive.push_back(id);
  }
  double beta = 0.0;
  while (true) {
    beta += rng.exponential(grow.total_rate());
    if (beta > tau) break;
    g.events.push_back(grow.step(beta));
  }
  g.top = grow.alive;
  g.next_id = grow.next_id();
  return g;
}

std::vector<int> propagate_types(const AsrgGraph& g, const std::vector<int>& top_types) {
  if (top_types.size() != g.top.size()) {
    throw std::invalid_argument("assignment must type every particle at beta = tau");
  }
  std::vector<int> type(g.next_id, -1);
  for (std::size_t i = 0; i < g.top.size(); ++i) {
    if (top_types[i] < 0 || top_types[i] >= kNumTypes) throw std::invalid_argument("bad type");
    type[g.top[i]] = top_types[i];
  }
  replay(g.events, type);
  std::vector<int> out;
  out.reserve(g.sample.size());
  for (ParticleId id : g.sample) out.push_back(type[id]);
  return out;
}

LineCountPath simulate_line_count(std::int64_t k, double alpha, double rho, double beta_max,
                                  RngStream& rng) {
  if (k < 1) throw std::invalid_argument("need at least one line");
  LineCountPath path;
  path.times.push_back(0.0);
  path.counts.push_back(k);
  double beta = 0.0;
  const double b = alpha + rho;
  while (true) {
    const double n = static_cast<double>(k);
    const double up = b * n;
    const double down = 0.5 * n * (n - 1.0);
    beta += rng.exponential(up + down);
    if (beta > beta_max) break;
    k += rng.uniform() * (up + down) < up ? 1 : -1;
    path.times.push_back(beta);
    path.counts.push_back(k);
  }
  return path;
}

LineCountStats line_count_statistics(std::int64_t k, double alpha, double rho, double burn_in,
                                     double spacing, std::int64_t samples, RngStream& rng) {
  if (k < 1) throw std::invalid_argument("need at least one line");
  if (!(spacing > 0.0)) throw std::invalid_argument("spacing must be positive");
  LineCountStats st;
  const double b = alpha + rho;
  auto grow_to = [&](std::int64_t level) {
    const auto need = static_cast<std::size_t>(level + 2);
    if (st.occupation.size() < need) {
      st.occupation.resize(need, 0.0);
      st.up.resize(need, 0);
      st.down.resize(need, 0);
      st.sampled.resize(need, 0);
    }
  };
  grow_to(k);
  double beta = 0.0;
  const double end = burn_in + spacing * static_cast<double>(samples);
  double next_sample = burn_in + spacing;
  while (true) {
    const double n = static_cast<double>(k);
    const double up = b * n;
    const double down = 0.5 * n * (n - 1.0);
    const double next = beta + rng.exponential(up + down);
    const double lo = std::max(beta, burn_in);
    const double hi = std::min(next, end);
    if (hi > lo) st.occupation[static_cast<std::size_t>(k)] += hi - lo;
    while (next_sample <= std::min(next, end) && st.samples < samples) {
      ++st.sampled[static_cast<std::size_t>(k)];
      ++st.samples;
      next_sample += spacing;
    }
    if (next >= end) break;
    const bool is_up = rng.uniform() * (up + down) < up;
    if (next > burn_in) {
      if (is_up) {
        ++st.up[static_cast<std::size_t>(k)];
      } else {
        ++st.down[static_cast<std::size_t>(k)];
      }
    }
    k += is_up ? 1 : -1;
    grow_to(k);
    beta = next;
  }
  st.total_time = end - burn_in;
  return st;
}

std::int64_t sample_pi(double alpha, double rho, RngStream& rng) {
  const double mean = 2.0 * (alpha + rho);
  if (!(mean > 0.0)) throw std::invalid_argument("alpha + rho must be positive");
  while (true) {
    const std::int64_t k = rng.poisson(mean);
    if (k > 0) return k;
  }
}

BernoulliEstimate duality_estimate(const SimplexState& x, const std::vector<int>& targets,
                                   double tau, const ModelParams& p, std::int64_t replicates,
                                   RngStream& rng) {
  if (targets.empty()) throw std::invalid_argument("need at least one target");
  if (replicates < 1) throw std::invalid_argument("need at least one replicate");
  BernoulliEstimate e;
  const auto k = static_cast<std::int64_t>(targets.size());
  std::vector<int> top;
  for (std::int64_t r = 0; r < replicates; ++r) {
    const AsrgGraph g = build_asrg(k, p, tau, rng);
    top.resize(g.top.size());
    for (auto& t : top) t = draw_type(x, rng);
    if (propagate_types(g, top) == targets) ++e.successes;
  }
  e.trials = replicates;
  const double n = static_cast<double>(replicates);
  e.estimate = static_cast<double>(e.successes) / n;
  e.standard_error = std::sqrt(e.estimate * (1.0 - e.estimate) / n);
  const auto ci = stats::wilson_interval(e.successes, e.trials);
  e.ci_low = ci.low;
  e.ci_high = ci.high;
  return e;
}

std::array<std::int64_t, 4> duality_type_counts(const SimplexState& x, double tau,
                                                const ModelParams& p, std::int64_t replicates,
                                                RngStream& rng) {
  std::array<std::int64_t, 4> counts{};
  std::vector<int> top;
  for (std::int64_t r = 0; r < replicates; ++r) {
    const AsrgGraph g = build_asrg(1, p, tau, rng);
    top.resize(g.top.size());
    for (auto& t : top) t = draw_type(x, rng);
    ++counts[static_cast<std::size_t>(propagate_types(g, top)[0])];
  }
  return counts;
}

double default_fixation_tau(double alpha, double rho) {
  return 5.0 / (analytics::pi_equilibrium_pmf(alpha, rho, 1) * (alpha + rho));
}

std::optional<int> asrg_fixation_replicate(const SimplexState& x, const ModelParams& p,
                                           double tau, RngStream& rng) {
  GraphGrower grow(p, rng, kDefaultParticleBudget);
  const std::int64_t k = sample_pi(p.alpha, p.rho, rng);
  for (std::int64_t i = 0; i < k; ++i) grow.alive.push_back(grow.fresh());
  std::optional<ParticleId> root;
  if (k == 1) root = grow.alive[0];
  std::vector<AsrgEvent> log;
  double beta = 0.0;
  while (true) {
    beta += rng.exponential(grow.total_rate());
    if (beta > tau) break;
    log.push_back(grow.step(beta));
    if (grow.alive.size() == 1) {
      // Every sample line descends from this particle: its type is theirs.
      root = grow.alive[0];
      log.clear();
    }
  }
  if (!root) return std::nullopt;
  std::vector<int> type(grow.next_id(), -1);
  for (ParticleId id : grow.alive) type[id] = draw_type(x, rng);
  replay(log, type);
  return type[*root];
}

FixationEstimate asrg_fixation_estimate(const SimplexState& x, const ModelParams& p, double tau,
                                        std::int64_t replicates, RngStream& rng) {
  FixationEstimate est;
  est.tau = tau;
  for (std::int64_t r = 0; r < replicates; ++r) {
    const auto t = asrg_fixation_replicate(x, p, tau, rng);
    if (!t) {
      ++est.not_single;
      continue;
    }
    ++est.counts[static_cast<std::size_t>(*t)];
    ++est.valid;
  }
  if (est.valid > 0) {
    for (int i = 0; i < kNumTypes; ++i) {
      est.probability[static_cast<std::size_t>(i)] =
          static_cast<double>(est.counts[static_cast<std::size_t>(i)]) /
          static_cast<double>(est.valid);
    }
  }
  return est;
}

}  // namespace sweepsim::asrg
