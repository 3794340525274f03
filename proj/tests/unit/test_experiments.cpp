#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "generators.h"
#include "oracles.h"
#include "sweepsim/analytics.h"
#include "sweepsim/birth_death.h"
#include "sweepsim/experiments.h"
#include "sweepsim/json_io.h"
#include "sweepsim/stats.h"

using namespace sweepsim;
using namespace sweepsim::experiments;
using analytics::Exponent;

namespace {

ExperimentConfig small_config() {
  ExperimentConfig c;
  c.alphas = {50.0, 100.0};
  c.replicates = 200;
  c.seed = 99;
  return c;
}

}  // namespace

TEST(Config, JsonRoundTrip) {
  auto c = small_config();
  c.kind = ExperimentKind::FixationTime;
  c.replicates_per_alpha = {150, 300};
  c.tau_grid = {0.5, 1.0};
  c.tolerance.time_band = 0.3;
  const auto back = config_from_json(config_to_json(c));
  EXPECT_EQ(config_to_json(back), config_to_json(c));
  EXPECT_EQ(config_hash(back), config_hash(c));
  EXPECT_EQ(back.replicates_at(1), 300);
}

TEST(Config, HashIgnoresThreadsButNotSeed) {
  auto a = small_config();
  auto b = a;
  b.threads = 7;
  EXPECT_EQ(config_hash(a), config_hash(b));
  b.seed = 100;
  EXPECT_NE(config_hash(a), config_hash(b));
  EXPECT_EQ(config_hash(a).size(), 40u);
}

TEST(Config, StrictReader) {
  auto j = config_to_json(small_config());
  j["replcates"] = 5;
  try {
    config_from_json(j);
    FAIL() << "unknown key accepted";
  } catch (const SchemaError& e) {
    EXPECT_NE(std::string(e.what()).find("replcates"), std::string::npos);
  }
  auto k = config_to_json(small_config());
  k["kind"] = "nonsense";
  EXPECT_THROW(config_from_json(k), SchemaError);
  auto m = config_to_json(small_config());
  m["alphas"] = "many";
  EXPECT_THROW(config_from_json(m), SchemaError);
}

TEST(Config, Validation) {
  auto c = small_config();
  EXPECT_NO_THROW(c.validate());
  c.replicates = 50;
  EXPECT_ANY_THROW(c.validate());
  c = small_config();
  c.alphas = {100.0, 50.0};
  EXPECT_ANY_THROW(c.validate());
  c = small_config();
  c.alphas.clear();
  EXPECT_ANY_THROW(c.validate());
  c = small_config();
  c.replicates_per_alpha = {200};
  EXPECT_ANY_THROW(c.validate());
}

TEST(Config, StreamsDoNotOverlap) {
  auto c = small_config();
  c.replicates_per_alpha = {150, 300};
  EXPECT_EQ(c.stream_base(0), c.first_stream);
  EXPECT_EQ(c.stream_base(1), c.first_stream + 150);
}

TEST(Stats, WilsonCoverage) {
  std::mt19937_64 eng(601);
  const int trials = 10000;
  int covered = 0;
  std::uniform_real_distribution<double> pick(0.05, 0.95);
  for (int i = 0; i < trials; ++i) {
    const double p = pick(eng);
    const std::int64_t n = 200;
    const auto k = std::binomial_distribution<std::int64_t>(n, p)(eng);
    const auto ci = stats::wilson_interval(k, n);
    covered += ci.low <= p && p <= ci.high;
  }
  EXPECT_NEAR(double(covered) / trials, 0.95, 0.01);
}

TEST(Sweep, ThreadCountDoesNotChangeResults) {
  auto a = small_config();
  a.threads = 1;
  auto b = a;
  b.threads = 3;
  const auto ra = estimate_fixation_probability(a);
  const auto rb = estimate_fixation_probability(b);
  ASSERT_EQ(ra.replicates.size(), rb.replicates.size());
  for (std::size_t i = 0; i < ra.replicates.size(); ++i) {
    EXPECT_EQ(to_json(ra.replicates[i]), to_json(rb.replicates[i]));
  }
  for (std::size_t i = 0; i < ra.per_alpha.size(); ++i) {
    EXPECT_EQ(ra.per_alpha[i].successes, rb.per_alpha[i].successes);
  }
}

TEST(Sweep, ReportCarriesProvenance) {
  const auto c = small_config();
  const auto r = estimate_fixation_probability(c);
  const auto j = to_json(r);
  EXPECT_EQ(j.at("schema"), "1");
  EXPECT_EQ(j.at("config_hash"), config_hash(c));
  EXPECT_EQ(j.at("stream_range"), nlohmann::json::array({0, 399}));
  EXPECT_EQ(j.at("config").at("seed"), 99);
  EXPECT_EQ(r.stream_first, c.first_stream);
  EXPECT_EQ(r.stream_last, c.first_stream + 399);
  ASSERT_EQ(r.per_alpha.size(), 2u);
  for (const auto& e : r.per_alpha) {
    EXPECT_EQ(e.replicates, 200);
    EXPECT_LE(e.ci.low, e.estimate);
    EXPECT_GE(e.ci.high, e.estimate);
    EXPECT_NEAR(e.theory, analytics::limiting_fixation_probability(0.4, 0.8, 1.0), 1e-12);
  }
  const auto csv = to_csv(r);
  EXPECT_EQ(csv.rfind("alpha,", 0), 0u);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 3);
}

TEST(Sweep, FixationTimeUsesOnlyFixedRuns) {
  auto c = small_config();
  c.kind = ExperimentKind::FixationTime;
  c.replicates = 600;
  const auto r = estimate_conditional_fixation_time(c);
  for (const auto& e : r.per_alpha) {
    if (e.successes > 0) {
      ASSERT_TRUE(e.time_quartiles.has_value());
      EXPECT_LE(e.time_quartiles->q1, e.time_quartiles->median);
      EXPECT_LE(e.time_quartiles->median, e.time_quartiles->q3);
    }
  }
}

TEST(Exponents, ExtractionReadsLastRecord) {
  jumpsim::Trajectory tr;
  tr.initial_state = JumpState{{100, 10, 1, 0}};
  const double alpha = 100.0;
  const double unit = std::log(alpha) / alpha;
  tr.records.push_back({0.0, tr.initial_state});
  tr.records.push_back({0.5 * unit, JumpState{{100, 10, 10, 0}}});
  tr.records.push_back({1.5 * unit, JumpState{{100, 10, 100, 1}}});
  tr.final_time = 2.0 * unit;
  const auto path = extract_exponent_path(tr, alpha, {0.0, 1.0, 2.0});
  ASSERT_EQ(path.size(), 3u);
  EXPECT_EQ(path[0].q[2], Exponent::finite(0.0));
  EXPECT_TRUE(path[0].q[3].is_neg_inf());
  EXPECT_NEAR(path[1].q[2].value(), 0.5, 1e-12);
  EXPECT_NEAR(path[2].q[2].value(), 1.0, 1e-12);
  EXPECT_EQ(path[2].q[3], Exponent::finite(0.0));
  EXPECT_THROW(extract_exponent_path(tr, alpha, {3.0}), std::out_of_range);
  EXPECT_THROW(extract_exponent_path(jumpsim::Trajectory{}, alpha, {0.0}), std::invalid_argument);
}

TEST(Exponents, MedianRanksNegInfLowest) {
  std::vector<Exponent> v{Exponent::neg_inf(), Exponent::finite(0.2), Exponent::neg_inf()};
  EXPECT_TRUE(median_exponent(v).is_neg_inf());
  v.push_back(Exponent::finite(0.5));
  v.push_back(Exponent::finite(0.7));
  EXPECT_EQ(median_exponent(v), Exponent::finite(0.2));
  EXPECT_THROW(median_exponent({}), std::invalid_argument);
}

TEST(Exponents, PlotCsvHasHeaderAndBreakpoints) {
  const auto t = analytics::scenario_times(0.2, 0.4, 0.8, 1.0);
  const auto csv = exponent_plot_csv(t, analytics::Branch::Fixation3, {0.0, 1.0}, nullptr);
  EXPECT_EQ(csv.rfind("tau,series,value,branch,alpha\n", 0), 0u);
  for (const char* label : {",breakpoint,tau1,", ",breakpoint,tau4,"}) {
    EXPECT_NE(csv.find(label), std::string::npos) << label;
  }
}

TEST(Oracles, QuickSuitePasses) {
  const auto r = run_oracle_suite(OracleSuiteConfig{});
  EXPECT_TRUE(r.all_passed) << to_json(r).dump(2);
  EXPECT_FALSE(r.checks.empty());
}

TEST(Oracles, CrossChecksAtSmallSize) {
  const auto occ = occupation_experiment(2.0, 1.0, 1, 20, 2000, 602);
  EXPECT_TRUE(occ.passed) << occ.extra.dump();
  const auto br = branching_extinction_experiment(2.0, 1.0, 5.0, 4000, 603);
  EXPECT_TRUE(br.passed) << br.extra.dump();
  const auto ssa = survival_ssa_experiment(0.4, 0.8, 1.0, 4000, 604);
  EXPECT_NEAR(ssa.target, bd::immigration_survival(0.4, 0.8, 1.0), 1e-15);
  EXPECT_TRUE(ssa.passed) << ssa.z;
  const auto one = one_locus_sde_experiment(2.0, 0.3, 2000, 1e-3, 605);
  EXPECT_NEAR(one.target, oracle::one_locus_fixation(2.0, 0.3), 1e-9);
  EXPECT_TRUE(one.passed) << one.z;
}
