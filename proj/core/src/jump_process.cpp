#include "sweepsim/jump_process.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "sweepsim/birth_death.h"

namespace sweepsim::jumpsim {

namespace {

constexpr std::array<Reaction, kNumReactions> kReactions = {{
    {{1, 0, 0, 0}, "birth0"},
    {{0, 1, 0, 0}, "birth1"},
    {{0, 0, 1, 0}, "birth2"},
    {{0, 0, 0, 1}, "birth3"},
    {{-1, 0, 0, 0}, "death0"},
    {{0, -1, 0, 0}, "death1"},
    {{0, 0, -1, 0}, "death2"},
    {{0, 0, 0, -1}, "death3"},
    {{1, -1, -1, 0}, "recomb12to0"},
    {{0, -1, -1, 1}, "recomb12to3"},
    {{-1, 1, 0, -1}, "recomb03to1"},
    {{-1, 0, 1, -1}, "recomb03to2"},
}};

double pairs(double n) { return 0.5 * n * (n - 1.0); }

}  // namespace

TransitionTable::TransitionTable(Variant v) : variant_(v) {}

const std::array<Reaction, kNumReactions>& TransitionTable::reactions() { return kReactions; }

double TransitionTable::rates(const JumpState& s, const ModelParams& p, RateVector& out) const {
  std::array<double, kNumTypes> l{};
  for (int i = 0; i < kNumTypes; ++i) l[static_cast<std::size_t>(i)] = static_cast<double>(s[i]);

  if (variant_ == Variant::L) {
    const double rec = 0.5 * p.rho / p.alpha;
    for (int i = 0; i < kNumTypes; ++i) {
      const auto ui = static_cast<std::size_t>(i);
      out[ui] = p.alpha * l[ui];
      double cross = 0.0;
      for (int j = 0; j < kNumTypes; ++j) {
        if (j == i) continue;
        cross += l[static_cast<std::size_t>(j)] * (1.0 - p.limit_ratio(i) + p.limit_ratio(j));
      }
      out[4 + ui] = pairs(l[ui]) + 0.5 * l[ui] * cross;
    }
    out[8] = out[9] = rec * l[1] * l[2];
    out[10] = out[11] = rec * l[0] * l[3];
  } else {
    const double ar = p.alpha + p.rho;
    const double rec = 0.5 * p.rho / ar;
    for (int i = 0; i < kNumTypes; ++i) {
      const auto ui = static_cast<std::size_t>(i);
      out[ui] = ar * l[ui];
      double cross = 0.0;
      for (int j = 0; j < kNumTypes; ++j) {
        if (j == i) continue;
        cross += l[static_cast<std::size_t>(j)] * (p.alpha - p.selection(i) + p.selection(j));
      }
      const double partners = (i == 0 || i == 3) ? l[1] + l[2] : l[0] + l[3];
      out[4 + ui] = pairs(l[ui]) + 0.5 * l[ui] * cross / ar + rec * l[ui] * partners;
    }
    out[8] = out[9] = rec * l[1] * l[2];
    out[10] = out[11] = rec * l[0] * l[3];
  }
  double sum = 0.0;
  for (double r : out) sum += r;
  return sum;
}

std::string_view to_string(AbsorptionStatus s) {
  switch (s) {
    case AbsorptionStatus::Fixation3: return "Fixation3";
    case AbsorptionStatus::Failure: return "Failure";
    case AbsorptionStatus::Ongoing: return "Ongoing";
  }
  return "Ongoing";
}

AbsorptionStatus classify_absorption(const JumpState& s) {
  if (s.total() == 0) throw std::domain_error("all-zero state is unreachable");
  if (s[0] == 0 && s[1] == 0 && s[2] == 0) return AbsorptionStatus::Fixation3;
  if (s[3] == 0 && (s[1] == 0 || s[2] == 0)) return AbsorptionStatus::Failure;
  return AbsorptionStatus::Ongoing;
}

JumpState initial_state_L(const ModelParams& p, RngStream& rng) {
  const double share = p.c_init * std::pow(p.alpha, -p.psi);
  JumpState s;
  s[2] = 1;
  s[3] = 0;
  s[1] = rng.poisson(2.0 * p.alpha * share);
  s[0] = rng.poisson(2.0 * p.alpha * std::max(0.0, 1.0 - share));
  return s;
}

JumpState initial_state_Ltilde(const SimplexState& x, const ModelParams& p, RngStream& rng) {
  const double scale = 2.0 * (p.alpha + p.rho);
  for (int attempt = 0; attempt < 1'000'000; ++attempt) {
    JumpState s;
    for (int i = 0; i < kNumTypes; ++i) s[i] = rng.poisson(scale * x[i]);
    if (s.total() > 0) return s;
  }
  throw std::runtime_error("could not draw a positive initial state");
}

double default_t_max(const ModelParams& p) {
  const double d = p.c2 - p.c1;
  const double tau4 = (1.0 - p.psi) / d + 2.0 / (1.0 - p.c2);
  const double sigma2 = 1.0 / p.c2 + (1.0 - p.psi + p.c1 / p.c2) / d;
  const double horizon = std::max({tau4, sigma2, 1.0});
  return 3.0 * horizon * std::max(std::log(p.alpha), 1.0) / p.alpha;
}

namespace {

bool monotype(const JumpState& s, int& type) {
  int present = 0;
  for (int i = 0; i < kNumTypes; ++i) {
    if (s[i] > 0) {
      ++present;
      type = i;
    }
  }
  return present == 1;
}

}  // namespace

LRun simulate_from(Variant v, const JumpState& start, const ModelParams& p, RngStream& rng,
                   const RunOptions& opt) {
  if (!(opt.t_max > 0.0)) throw std::invalid_argument("t_max must be positive");
  const TransitionTable table(v);
  LRun out;
  Trajectory& tr = out.trajectory;
  tr.initial_state = start;
  tr.stopping_times.assign(opt.thresholds.size(), std::nullopt);

  JumpState s = start;
  double t = 0.0;
  std::size_t next_sample = 0;
  std::size_t thresholds_left = opt.thresholds.size();

  auto note_thresholds = [&] {
    for (std::size_t k = 0; k < opt.thresholds.size(); ++k) {
      if (!tr.stopping_times[k] && s[opt.thresholds[k].type] >= opt.thresholds[k].level) {
        tr.stopping_times[k] = t;
        --thresholds_left;
      }
    }
  };
  auto fill_samples = [&](double upto, bool inclusive) {
    if (opt.record != RecordMode::Grid) return;
    while (next_sample < opt.sample_times.size() &&
           (opt.sample_times[next_sample] < upto ||
            (inclusive && opt.sample_times[next_sample] <= upto))) {
      tr.records.push_back({opt.sample_times[next_sample], s});
      ++next_sample;
    }
  };
  auto absorbed = [&]() -> bool {
    if (v == Variant::L) {
      out.status = classify_absorption(s);
      return out.status != AbsorptionStatus::Ongoing;
    }
    int type = 0;
    return monotype(s, type);
  };

  note_thresholds();
  if (opt.record == RecordMode::Events) tr.records.push_back({0.0, s});
  std::optional<double> absorbed_at;
  if (absorbed()) absorbed_at = 0.0;
  bool done = absorbed_at && opt.stop_at_absorption;
  RateVector r{};
  while (!done) {
    if (opt.stop_after_thresholds && thresholds_left == 0) break;
    if (opt.stop_at_first_threshold && thresholds_left < opt.thresholds.size()) break;
    const double total = table.rates(s, p, r);
    if (!(total > 0.0)) break;
    const double dt = rng.exponential(total);
    if (t + dt > opt.t_max) {
      t = opt.t_max;
      break;
    }
    t += dt;
    fill_samples(t, false);
    double u = rng.uniform() * total;
    std::size_t k = 0;
    for (; k + 1 < kNumReactions; ++k) {
      if (u < r[k]) break;
      u -= r[k];
    }
    // Guard against round-off landing on a zero-rate reaction.
    while (r[k] == 0.0 && k > 0) --k;
    const auto& d = kReactions[k].delta;
    for (int i = 0; i < kNumTypes; ++i) s[i] += d[static_cast<std::size_t>(i)];
    ++tr.events;
    if (opt.record == RecordMode::Events) tr.records.push_back({t, s});
    note_thresholds();
    if (!absorbed_at && absorbed()) absorbed_at = t;
    done = absorbed_at && opt.stop_at_absorption;
    if (tr.events >= opt.event_budget && !done) {
      out.budget_exceeded = true;
      break;
    }
  }
  fill_samples(done ? std::numeric_limits<double>::infinity() : t, true);
  tr.final_state = s;
  tr.final_time = t;
  out.time = absorbed_at.value_or(t);

  if (v == Variant::L) absorbed();
  if (!absorbed_at && !out.budget_exceeded && v == Variant::L && t >= opt.t_max) {
    const double total = static_cast<double>(s.total());
    if (total > 0.0) {
      if (static_cast<double>(s[3]) >= opt.tie_break_share * total) {
        out.status = AbsorptionStatus::Fixation3;
        out.provisional = true;
      } else {
        for (int i = 0; i < 3; ++i) {
          if (static_cast<double>(s[i]) >= opt.tie_break_share * total) {
            out.status = AbsorptionStatus::Failure;
            out.provisional = true;
          }
        }
      }
    }
  }
  if (out.budget_exceeded && !absorbed_at) out.status = AbsorptionStatus::Ongoing;
  return out;
}

LRun simulate_L(const ModelParams& p, RngStream& rng, const RunOptions& opt) {
  const JumpState start = initial_state_L(p, rng);
  return simulate_from(Variant::L, start, p, rng, opt);
}

LtildeRun simulate_Ltilde(const SimplexState& x, const ModelParams& p, RngStream& rng,
                          const RunOptions& opt) {
  const JumpState start = initial_state_Ltilde(x, p, rng);
  LtildeRun out;
  out.run = simulate_from(Variant::Ltilde, start, p, rng, opt);
  out.run.status = AbsorptionStatus::Ongoing;
  int type = 0;
  const JumpState& s = out.run.trajectory.final_state;
  if (monotype(s, type)) {
    out.fixed_type = type;
  } else if (!out.run.budget_exceeded && out.run.trajectory.final_time >= opt.t_max) {
    const double total = static_cast<double>(s.total());
    for (int i = 0; i < kNumTypes; ++i) {
      if (static_cast<double>(s[i]) >= opt.tie_break_share * total) {
        out.fixed_type = i;
        out.run.provisional = true;
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

VDrive::VDrive(const ModelParams& p, double epsilon, const VOptions& opt)
    : p_(p), epsilon_(epsilon), step_(opt.step) {
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw std::invalid_argument("epsilon must be in (0,1)");
  if (!(opt.step > 0.0)) throw std::invalid_argument("step must be positive");
  if (!(p.c1 < p.c2)) throw std::invalid_argument("need c1 < c2");
  t_max_ = opt.t_max > 0.0 ? opt.t_max
                           : std::log((1.0 - epsilon) / epsilon) / (p.c2 - p.c1) +
                                 bd::logistic_window(p.c1, p.c2, 2.0 * p.rho);
  const auto n = static_cast<std::size_t>(std::ceil(t_max_ / step_));
  grid_.resize(n + 1);
  double v = 2.0 * (1.0 - epsilon);
  grid_[0] = v;
  const double h = step_;
  for (std::size_t k = 1; k <= n; ++k) {
    const double k1 = drift(v);
    const double k2 = drift(v + 0.5 * h * k1);
    const double k3 = drift(v + 0.5 * h * k2);
    const double k4 = drift(v + h * k3);
    v += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    grid_[k] = v;
  }
}

double VDrive::drift(double v) const { return -0.5 * (p_.c2 - p_.c1) * v * (2.0 - v); }

double VDrive::v1(double t) const {
  const double u_all = std::clamp(t, 0.0, static_cast<double>(grid_.size() - 1) * step_) / step_;
  auto k = static_cast<std::size_t>(u_all);
  if (k + 1 >= grid_.size()) return grid_.back();
  const double u = u_all - static_cast<double>(k);
  const double va = grid_[k];
  const double vb = grid_[k + 1];
  const double h = step_;
  // Cubic Hermite interpolation between the nodes, kept inside their range.
  const double u2 = u * u;
  const double u3 = u2 * u;
  const double v = (2 * u3 - 3 * u2 + 1) * va + (u3 - 2 * u2 + u) * h * drift(va) +
                   (-2 * u3 + 3 * u2) * vb + (u3 - u2) * h * drift(vb);
  return std::clamp(v, std::min(va, vb), std::max(va, vb));
}

VRun simulate_V(const VDrive& drive, RngStream& rng, const VOptions& opt) {
  const ModelParams& p = drive.params();
  const double c1 = p.c1;
  const double c2 = p.c2;
  const double rho = p.rho;
  const double t_max = drive.t_max();
  auto death = [&](double v1) { return 0.5 * c1 * v1 + 0.5 * c2 * (2.0 - v1); };
  auto immigration = [&](double v1) { return 0.5 * rho * v1 * (2.0 - v1); };

  // Lineages die at rate at most c2 against splitting rate 1.
  const auto stop_count =
      static_cast<std::int64_t>(std::ceil(std::log(opt.survival_tolerance) / std::log(c2)));
  const double dmax = std::max(c1, c2);
  const double imax = 0.5 * rho;

  VRun out;
  std::int64_t n = 0;
  std::int64_t events = 0;
  double t = 0.0;
  if (opt.record_path) out.path.push_back({t, drive.v1(0.0), n});
  while (true) {
    const double bound = static_cast<double>(n) * (1.0 + dmax) + imax;
    if (!(bound > 0.0)) {
      t = t_max;
      break;
    }
    t += rng.exponential(bound);
    if (t >= t_max) {
      t = t_max;
      break;
    }
    const double v = drive.v1(t);
    const double nd = static_cast<double>(n);
    const double birth = nd + immigration(v);
    const double dth = nd * death(v);
    const double w = rng.uniform() * bound;
    if (w < birth) {
      ++n;
    } else if (w < birth + dth) {
      --n;
    } else {
      continue;
    }
    if (++events > opt.event_budget) throw std::runtime_error("event budget exceeded");
    if (opt.record_path) out.path.push_back({t, v, n});
    if (n >= stop_count) {
      out.early_stop = true;
      break;
    }
  }
  out.final_v3 = n;
  out.final_time = t;
  out.survived = n > 0;
  if (opt.record_path) out.path.push_back({t, drive.v1(t), n});
  return out;
}

VRun simulate_V(const ModelParams& p, double epsilon, RngStream& rng, const VOptions& opt) {
  return simulate_V(VDrive(p, epsilon, opt), rng, opt);
}

// ---------------------------------------------------------------------------

std::string_view to_string(BdStop s) {
  switch (s) {
    case BdStop::Extinct: return "extinct";
    case BdStop::HitUpper: return "hit_upper";
    case BdStop::TimeLimit: return "time_limit";
    case BdStop::Budget: return "budget";
  }
  return "time_limit";
}

BdRun simulate_birth_death(const CountRateFn& birth, const CountRateFn& death,
                           std::int64_t initial, RngStream& rng, const StopSpec& stop) {
  if (initial < 0) throw std::invalid_argument("initial count must be >= 0");
  BdRun out;
  std::int64_t k = initial;
  double t = 0.0;
  std::size_t next = 0;
  auto fill = [&](double upto) {
    while (next < stop.sample_times.size() && stop.sample_times[next] < upto) {
      out.samples.push_back(k);
      ++next;
    }
  };
  auto finish = [&](BdStop reason) {
    out.reason = reason;
    out.final_count = k;
    out.time = t;
    // After an early stop the remaining sample slots hold the final count.
    fill(std::numeric_limits<double>::infinity());
    return out;
  };

  if (stop.stop_on_extinction && k == 0) return finish(BdStop::Extinct);
  if (stop.upper > 0 && k >= stop.upper) return finish(BdStop::HitUpper);
  while (true) {
    const double b = birth(k);
    const double d = k > 0 ? death(k) : 0.0;
    if (b < 0.0 || d < 0.0) throw std::domain_error("negative rate");
    const double total = b + d;
    const double dt = total > 0.0 ? rng.exponential(total) : std::numeric_limits<double>::infinity();
    if (t + dt >= stop.t_max) {
      fill(stop.t_max);
      if (k != 0) out.occupation += static_cast<double>(k) * (stop.t_max - t);
      t = stop.t_max;
      return finish(BdStop::TimeLimit);
    }
    out.occupation += static_cast<double>(k) * dt;
    t += dt;
    fill(t);
    if (rng.uniform() * total < b) {
      ++k;
    } else {
      --k;
    }
    if (++out.events >= stop.event_budget) return finish(BdStop::Budget);
    if (stop.stop_on_extinction && k == 0) return finish(BdStop::Extinct);
    if (stop.upper > 0 && k >= stop.upper) return finish(BdStop::HitUpper);
  }
}

}  // namespace sweepsim::jumpsim
