#include <gtest/gtest.h>

#include <cmath>

#include "generators.h"
#include "oracles.h"
#include "sweepsim/experiments.h"
#include "sweepsim/jump_process.h"
#include "sweepsim/parallel.h"

using namespace sweepsim;
using namespace sweepsim::jumpsim;

namespace {

double rel_diff(double a, double b) { return std::abs(a - b) / std::max({1.0, std::abs(a), std::abs(b)}); }

}  // namespace

TEST(Transitions, StoichiometryTable) {
  const auto& r = TransitionTable::reactions();
  for (int i = 0; i < 4; ++i) {
    Stoichiometry birth{}, death{};
    birth[i] = 1;
    death[i] = -1;
    EXPECT_EQ(r[i].delta, birth);
    EXPECT_EQ(r[4 + i].delta, death);
  }
  EXPECT_EQ(r[8].delta, (Stoichiometry{1, -1, -1, 0}));
  EXPECT_EQ(r[9].delta, (Stoichiometry{0, -1, -1, 1}));
  EXPECT_EQ(r[10].delta, (Stoichiometry{-1, 1, 0, -1}));
  EXPECT_EQ(r[11].delta, (Stoichiometry{-1, 0, 1, -1}));
}

TEST(Transitions, RatesMatchDefinitionAtRandomStates) {
  gen::Source src(401);
  const TransitionTable L(Variant::L), Lt(Variant::Ltilde);
  for (int i = 0; i < 1000; ++i) {
    const auto p = src.params();
    const auto s = src.jump_state();
    RateVector got{};
    const double total = L.rates(s, p, got);
    const auto want = oracle::l_rates(s.l, p.alpha, p.c1, p.c2, p.rho);
    double sum = 0.0;
    for (std::size_t k = 0; k < 12; ++k) {
      ASSERT_LT(rel_diff(got[k], want[k]), 1e-12) << "L case " << i << " reaction " << k;
      sum += want[k];
    }
    EXPECT_LT(rel_diff(total, sum), 1e-12);

    Lt.rates(s, p, got);
    const auto want_t = oracle::ltilde_rates(s.l, p.alpha, p.alpha1, p.alpha2, p.rho);
    for (std::size_t k = 0; k < 12; ++k) {
      ASSERT_LT(rel_diff(got[k], want_t[k]), 1e-12) << "Ltilde case " << i << " reaction " << k;
    }
  }
}

TEST(Transitions, DualLineCountMarginal) {
  // Births of the total at (alpha + rho) l, losses at l (l - 1) / 2.
  gen::Source src(402);
  const TransitionTable Lt(Variant::Ltilde);
  for (int i = 0; i < 1000; ++i) {
    const auto p = src.params();
    const auto s = src.jump_state(300);
    RateVector r{};
    Lt.rates(s, p, r);
    const double l = static_cast<double>(s.total());
    const double up = r[0] + r[1] + r[2] + r[3];
    double down = 0.0;
    for (std::size_t k = 4; k < 12; ++k) down += r[k];
    EXPECT_LT(rel_diff(up, (p.alpha + p.rho) * l), 1e-12) << i;
    EXPECT_LT(rel_diff(down, l * (l - 1) / 2), 1e-11) << i;
  }
}

TEST(Transitions, NoRecombinantSourceWithoutRecombination) {
  gen::Source src(403);
  const TransitionTable L(Variant::L);
  for (int i = 0; i < 200; ++i) {
    auto p = src.params();
    p.rho = 0.0;
    auto s = src.jump_state();
    s.l[3] = 0;
    if (s.total() == 0) s.l[0] = 1;
    RateVector r{};
    L.rates(s, p, r);
    EXPECT_EQ(r[3], 0.0);
    EXPECT_EQ(r[9], 0.0);
  }
}

TEST(Absorption, Classes) {
  EXPECT_EQ(classify_absorption(JumpState{{0, 0, 0, 3}}), AbsorptionStatus::Fixation3);
  EXPECT_EQ(classify_absorption(JumpState{{4, 3, 0, 0}}), AbsorptionStatus::Failure);
  EXPECT_EQ(classify_absorption(JumpState{{4, 0, 2, 0}}), AbsorptionStatus::Failure);
  EXPECT_EQ(classify_absorption(JumpState{{0, 1, 1, 0}}), AbsorptionStatus::Ongoing);
  EXPECT_EQ(classify_absorption(JumpState{{1, 0, 0, 1}}), AbsorptionStatus::Ongoing);
  EXPECT_THROW(classify_absorption(JumpState{}), std::domain_error);
}

TEST(InitialState, LaunchesOneSecondMutant) {
  const auto p = make_params(1000, 0.4, 0.8, 1.0, 0.5, 1.5);
  double l1 = 0.0, l0 = 0.0;
  const int n = 4000;
  for (int i = 0; i < n; ++i) {
    RngStream rng(5, static_cast<std::uint64_t>(i));
    const auto s = initial_state_L(p, rng);
    ASSERT_EQ(s[2], 1);
    ASSERT_EQ(s[3], 0);
    l1 += static_cast<double>(s[1]);
    l0 += static_cast<double>(s[0]);
  }
  const double m1 = 2 * 1.5 * std::pow(1000.0, 0.5);
  const double m0 = 2 * 1000 * (1 - 1.5 * std::pow(1000.0, -0.5));
  EXPECT_NEAR(l1 / n, m1, 4 * std::sqrt(m1 / n));
  EXPECT_NEAR(l0 / n, m0, 4 * std::sqrt(m0 / n));
}

TEST(InitialState, DualStartIsPositive) {
  const auto p = make_params(0.01, 0.4, 0.8, 0.0, 0.2);
  const auto x = make_simplex(0.25, 0.25, 0.25, 0.25);
  for (int i = 0; i < 500; ++i) {
    RngStream rng(6, static_cast<std::uint64_t>(i));
    EXPECT_GT(initial_state_Ltilde(x, p, rng).total(), 0);
  }
}

TEST(Simulation, RecordedTransitionsAreInTheTable) {
  const auto p = make_params(100, 0.4, 0.8, 1.0, 0.2);
  RunOptions opt;
  opt.t_max = default_t_max(p);
  opt.record = RecordMode::Events;
  for (std::uint64_t s = 0; s < 20; ++s) {
    RngStream rng(8, s);
    const auto run = simulate_L(p, rng, opt);
    const auto& recs = run.trajectory.records;
    ASSERT_FALSE(recs.empty());
    EXPECT_EQ(recs.front().time, 0.0);
    EXPECT_EQ(recs.front().state, run.trajectory.initial_state);
    JumpState prev = run.trajectory.initial_state;
    for (std::size_t j = 1; j < recs.size(); ++j) {
      const auto& rec = recs[j];
      Stoichiometry d{};
      for (int i = 0; i < 4; ++i) d[i] = static_cast<int>(rec.state[i] - prev[i]);
      bool found = false;
      for (const auto& r : TransitionTable::reactions()) found = found || r.delta == d;
      ASSERT_TRUE(found) << "stream " << s;
      for (int i = 0; i < 4; ++i) ASSERT_GE(rec.state[i], 0);
      prev = rec.state;
    }
    EXPECT_EQ(prev, run.trajectory.final_state);
    EXPECT_EQ(static_cast<std::int64_t>(recs.size()) - 1, run.trajectory.events);
  }
}

TEST(Simulation, SameStreamSameTrajectory) {
  const auto p = make_params(200, 0.4, 0.8, 1.0, 0.2);
  RunOptions opt;
  opt.t_max = default_t_max(p);
  opt.record = RecordMode::Events;
  RngStream a(3, 17), b(3, 17);
  const auto ra = simulate_L(p, a, opt);
  const auto rb = simulate_L(p, b, opt);
  ASSERT_EQ(ra.trajectory.records.size(), rb.trajectory.records.size());
  for (std::size_t i = 0; i < ra.trajectory.records.size(); ++i) {
    ASSERT_EQ(ra.trajectory.records[i].time, rb.trajectory.records[i].time);
    ASSERT_EQ(ra.trajectory.records[i].state, rb.trajectory.records[i].state);
  }
  EXPECT_EQ(ra.status, rb.status);
}

TEST(Simulation, StoppingTimesAreFirstPassages) {
  const auto p = make_params(200, 0.4, 0.8, 1.0, 0.2);
  RunOptions opt;
  opt.t_max = default_t_max(p);
  opt.record = RecordMode::Events;
  opt.thresholds = {{2, 20}, {3, 5}};
  for (std::uint64_t s = 0; s < 30; ++s) {
    RngStream rng(9, s);
    const auto run = simulate_L(p, rng, opt);
    for (std::size_t k = 0; k < opt.thresholds.size(); ++k) {
      const auto th = opt.thresholds[k];
      std::optional<double> first;
      for (const auto& rec : run.trajectory.records) {
        if (rec.state[th.type] >= th.level) {
          first = rec.time;
          break;
        }
      }
      EXPECT_EQ(run.trajectory.stopping_times[k], first) << "stream " << s << " threshold " << k;
    }
  }
}

TEST(Simulation, StopAtFirstThreshold) {
  const auto p = make_params(200, 0.4, 0.8, 1.0, 0.2);
  RunOptions opt;
  opt.t_max = default_t_max(p);
  opt.thresholds = {{2, 10}};
  opt.stop_at_first_threshold = true;
  for (std::uint64_t s = 0; s < 30; ++s) {
    RngStream rng(10, s);
    const auto run = simulate_L(p, rng, opt);
    if (run.trajectory.stopping_times[0]) {
      EXPECT_EQ(run.trajectory.final_state[2], 10);
      EXPECT_EQ(run.time, *run.trajectory.stopping_times[0]);
    }
  }
}

TEST(Simulation, TieBreakIsFlagged) {
  const auto p = make_params(1000, 0.4, 0.8, 1.0, 0.2);
  RunOptions opt;
  opt.t_max = 1e-9;
  RngStream rng(11, 0);
  const auto run = simulate_from(Variant::L, JumpState{{2, 0, 0, 5000}}, p, rng, opt);
  EXPECT_EQ(run.status, AbsorptionStatus::Fixation3);
  EXPECT_TRUE(run.provisional);

  RngStream rng2(11, 1);
  const auto mixed = simulate_from(Variant::L, JumpState{{500, 0, 0, 500}}, p, rng2, opt);
  EXPECT_EQ(mixed.status, AbsorptionStatus::Ongoing);
  EXPECT_FALSE(mixed.provisional);
}

TEST(Simulation, BudgetIsReportedNotHidden) {
  const auto p = make_params(1000, 0.4, 0.8, 1.0, 0.2);
  RunOptions opt;
  opt.t_max = default_t_max(p);
  opt.event_budget = 100;
  RngStream rng(12, 0);
  const auto run = simulate_L(p, rng, opt);
  EXPECT_TRUE(run.budget_exceeded);
  EXPECT_EQ(run.trajectory.events, 100);
}

TEST(Simulation, DualFromMonotypeIsFixed) {
  const auto p = make_params(10, 0.4, 0.8, 1.0, 0.2);
  RunOptions opt;
  opt.t_max = 10.0;
  RngStream rng(13, 0);
  const auto r = simulate_Ltilde(make_simplex(0, 0, 0, 1), p, rng, opt);
  ASSERT_TRUE(r.fixed_type.has_value());
  EXPECT_EQ(*r.fixed_type, 3);
}

TEST(Simulation, DualAbsorbsInASingleType) {
  const auto p = make_params(2, 0.4, 0.8, 0.5, 0.2);
  RunOptions opt;
  opt.t_max = 200.0;
  for (std::uint64_t s = 0; s < 50; ++s) {
    RngStream rng(14, s);
    const auto r = simulate_Ltilde(make_simplex(0.4, 0.3, 0.2, 0.1), p, rng, opt);
    ASSERT_TRUE(r.fixed_type.has_value()) << s;
    int alive = 0;
    for (int i = 0; i < 4; ++i) alive += r.run.trajectory.final_state[i] > 0;
    EXPECT_EQ(alive, 1);
    EXPECT_GT(r.run.trajectory.final_state[*r.fixed_type], 0);
  }
}

TEST(BirthDeath, ExtinctionMatchesClassical) {
  const std::int64_t n = 20000;
  StopSpec stop;
  stop.t_max = 3.0;
  const auto runs = run_replicates<BdRun>(15, 0, n, [&](RngStream& rng, std::int64_t) {
    return simulate_birth_death([](std::int64_t k) { return 1.0 * double(k); },
                                [](std::int64_t k) { return 0.5 * double(k); }, 1, rng, stop);
  });
  double ext = 0.0, occ = 0.0, occ2 = 0.0;
  for (const auto& r : runs) {
    ext += r.reason == BdStop::Extinct;
    occ += r.occupation;
    occ2 += r.occupation * r.occupation;
  }
  const double target = oracle::linear_bd_extinction(1.0, 0.5, 3.0);
  EXPECT_NEAR(ext / n, target, 4 * std::sqrt(target * (1 - target) / n));
  // E int_0^t L = (e^{(lambda - mu) t} - 1) / (lambda - mu)
  const double mean = occ / n;
  const double se = std::sqrt((occ2 / n - mean * mean) / n);
  EXPECT_NEAR(mean, (std::exp(1.5) - 1) / 0.5, 4 * se);
}

TEST(BirthDeath, UpperLevelStops) {
  StopSpec stop;
  stop.t_max = 100.0;
  stop.upper = 50;
  RngStream rng(16, 0);
  for (int i = 0; i < 20; ++i) {
    const auto r = simulate_birth_death([](std::int64_t k) { return 2.0 * double(k); },
                                        [](std::int64_t k) { return 0.1 * double(k); }, 10, rng, stop);
    if (r.reason == BdStop::HitUpper) EXPECT_EQ(r.final_count, 50);
    else EXPECT_EQ(r.reason, BdStop::Extinct);
  }
}

TEST(BirthDeath, SamplesOnGrid) {
  StopSpec stop;
  stop.t_max = 1.0;
  stop.stop_on_extinction = false;
  stop.sample_times = {0.0, 0.5, 1.0};
  RngStream rng(17, 0);
  const auto r = simulate_birth_death([](std::int64_t) { return 0.0; },
                                      [](std::int64_t) { return 0.0; }, 7, rng, stop);
  EXPECT_EQ(r.samples, (std::vector<std::int64_t>{7, 7, 7}));
  EXPECT_DOUBLE_EQ(r.occupation, 7.0);
}

TEST(RescaledProcess, DriveFollowsLogisticSolution) {
  const auto p = make_params(1000, 0.4, 0.8, 1.0, 0.2);
  const double eps = 0.05;
  const VDrive drive(p, eps);
  for (double t : {0.0, 0.7, 3.3, 10.0, 25.0, drive.t_max() * 0.99}) {
    const double u0 = 1 - eps;
    const double u = 1.0 / (1.0 + (1 - u0) / u0 * std::exp(0.4 * t));
    EXPECT_NEAR(drive.v1(t), 2 * u, 1e-9) << t;
  }
}

TEST(RescaledProcess, Deterministic) {
  const auto p = make_params(1000, 0.4, 0.8, 1.0, 0.2);
  const VDrive drive(p, 0.05);
  VOptions opt;
  opt.record_path = true;
  RngStream a(18, 3), b(18, 3);
  const auto ra = simulate_V(drive, a, opt);
  const auto rb = simulate_V(drive, b, opt);
  EXPECT_EQ(ra.survived, rb.survived);
  EXPECT_EQ(ra.final_v3, rb.final_v3);
  ASSERT_EQ(ra.path.size(), rb.path.size());
  for (std::size_t i = 0; i < ra.path.size(); ++i) EXPECT_EQ(ra.path[i].time, rb.path[i].time);
}

TEST(Envelopes, NoEarlyRecombinant) {
  // Runs where the recombinant appears before type 2 reaches eps alpha.
  const auto r = experiments::early_recombinant_experiment(5000, 0.4, 0.8, 0.25, 0.2, 0.05, 300, 19);
  EXPECT_LT(r.empirical, 0.05) << r.extra.dump();
}
