#include <gtest/gtest.h>

#include <cstdlib>
#include <set>

#include "generators.h"
#include "oracles.h"
#include "sweepsim/json_io.h"
#include "sweepsim/parallel.h"
#include "sweepsim/params.h"
#include "sweepsim/quadrature.h"
#include "sweepsim/rng.h"
#include "sweepsim/stats.h"

using namespace sweepsim;

TEST(Regime, ClassifiesEachSideOfTheCriticalRatio) {
  EXPECT_EQ(classify_regime(0.2, 0.4, 0.8), Regime::SubCritical);
  EXPECT_EQ(classify_regime(0.9, 0.4, 0.8), Regime::SuperCritical);
  EXPECT_EQ(classify_regime(1.0, 0.4, 0.8), Regime::SuperCritical);
  EXPECT_EQ(classify_regime(1.2, 0.4, 0.8), Regime::NonEstablishing);
  EXPECT_EQ(classify_regime(0.5, 0.4, 0.8), Regime::Boundary);
  EXPECT_THROW(classify_regime(0.2, 0.8, 0.4), std::invalid_argument);
}

TEST(Regime, TotalAndDeterministicOnRandomParams) {
  gen::Source src(101);
  for (int i = 0; i < gen::kCases; ++i) {
    const auto p = src.params();
    const Regime a = classify_regime(p.psi, p.c1, p.c2);
    EXPECT_EQ(a, classify_regime(p.psi, p.c1, p.c2)) << "case " << i;
    EXPECT_NE(a, Regime::Boundary) << "case " << i;
    EXPECT_EQ(validate_params(p).regime, a) << "case " << i;
  }
}

TEST(Params, RejectsBadOrderings) {
  auto p = make_params(100, 0.4, 0.8, 1.0, 0.2);
  auto bad = p;
  bad.alpha2 = 30;
  EXPECT_THROW(validate_params(bad), std::invalid_argument);
  bad = p;
  bad.rho = -1;
  EXPECT_THROW(validate_params(bad), std::invalid_argument);
  bad = p;
  bad.c2 = 1.0;
  EXPECT_THROW(validate_params(bad), std::invalid_argument);
  bad = p;
  bad.psi = 0.5;
  EXPECT_THROW(validate_params(bad), std::invalid_argument);
  EXPECT_NO_THROW(validate_params(bad, false));
}

TEST(Params, RatioMismatchIsAWarning) {
  auto p = make_params(100, 0.4, 0.8, 1.0, 0.2);
  EXPECT_TRUE(validate_params(p).warnings.empty());
  p.alpha1 = 41;
  const auto v = validate_params(p);
  ASSERT_EQ(v.warnings.size(), 1u);
  EXPECT_NE(v.warnings[0].find("alpha1"), std::string::npos);
}

TEST(Params, HardCodedExtremeRatios) {
  const auto p = make_params(100, 0.4, 0.8, 1.0, 0.2);
  EXPECT_EQ(p.limit_ratio(0), 0.0);
  EXPECT_EQ(p.limit_ratio(3), 1.0);
  EXPECT_EQ(p.selection(0), 0.0);
  EXPECT_EQ(p.selection(3), 100.0);
  EXPECT_THROW(p.selection(4), std::out_of_range);
}

TEST(Simplex, DerivedInitialFrequenciesStayOnTheSimplex) {
  gen::Source src(102);
  int feasible = 0;
  for (int i = 0; i < gen::kCases; ++i) {
    const auto p = src.params();
    const double delta = src.uniform(0.0, 0.5);
    if (delta + p.c_init * std::pow(p.alpha, -p.psi) >= 1.0) {
      EXPECT_THROW(derive_initial_frequencies(p, delta), std::invalid_argument);
      continue;
    }
    ++feasible;
    const auto x = derive_initial_frequencies(p, delta);
    EXPECT_TRUE(x.on_simplex()) << "case " << i;
    EXPECT_DOUBLE_EQ(x[2], delta);
    EXPECT_EQ(x[3], 0.0);
  }
  EXPECT_GT(feasible, gen::kCases / 2);
}

TEST(Simplex, NormalizeClampsNegatives) {
  SimplexState s;
  s.x = {0.5, -0.1, 0.7, 0.2};
  s.normalize();
  EXPECT_TRUE(s.on_simplex());
  EXPECT_EQ(s[1], 0.0);
  EXPECT_THROW(make_simplex(0.5, 0.5, 0.5, 0.0), std::invalid_argument);
}

TEST(Json, ParamsRoundTrip) {
  gen::Source src(103);
  for (int i = 0; i < 50; ++i) {
    const auto p = src.params();
    EXPECT_EQ(params_from_json(params_to_json(p)), p) << "case " << i;
  }
}

TEST(Json, UnknownAndMissingKeysAreErrors) {
  auto j = params_to_json(make_params(100, 0.4, 0.8, 1.0, 0.2));
  auto extra = j;
  extra["beta"] = 1.0;
  EXPECT_THROW(params_from_json(extra), SchemaError);
  auto missing = j;
  missing.erase("rho");
  EXPECT_THROW(params_from_json(missing), SchemaError);
  auto wrong = j;
  wrong["rho"] = "one";
  EXPECT_THROW(params_from_json(wrong), SchemaError);
}

TEST(Json, GitBlobHashMatchesGit) {
  // `printf 'hello\n' | git hash-object --stdin`
  EXPECT_EQ(git_blob_hash("hello\n"), "ce013625030ba8dba906f756967f9e9ca394464a");
  EXPECT_EQ(git_blob_hash(""), "e69de29bb2d1d6434b8b29ae775ad8c2e48c5391");
}

TEST(Json, CanonicalDumpSortsKeys) {
  nlohmann::json a = {{"b", 1}, {"a", 2}};
  EXPECT_EQ(canonical_dump(a), "{\"a\":2,\"b\":1}");
}

TEST(Rng, SameSeedAndStreamReproduce) {
  RngStream a(5, 7), b(5, 7), c(5, 8);
  bool differs = false;
  for (int i = 0; i < 100; ++i) {
    const double u = a.uniform();
    EXPECT_EQ(u, b.uniform());
    differs = differs || u != c.uniform();
  }
  EXPECT_TRUE(differs);
}

TEST(Rng, UniformIsOpen) {
  RngStream r(1, 0);
  for (int i = 0; i < 100000; ++i) {
    const double u = r.uniform();
    ASSERT_GT(u, 0.0);
    ASSERT_LT(u, 1.0);
  }
}

TEST(Rng, StreamsLookIndependent) {
  // Means of 1000 streams' first draw should be near 1/2.
  double sum = 0.0;
  for (std::uint64_t s = 0; s < 1000; ++s) sum += RngStream(9, s).uniform();
  EXPECT_NEAR(sum / 1000.0, 0.5, 4.0 * std::sqrt(1.0 / 12.0 / 1000.0));
}

TEST(Rng, ExponentialAndPoissonMeans) {
  RngStream r(3, 0);
  double e = 0.0, p = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    e += r.exponential(4.0);
    p += static_cast<double>(r.poisson(3.5));
  }
  EXPECT_NEAR(e / n, 0.25, 4.0 * 0.25 / std::sqrt(n));
  EXPECT_NEAR(p / n, 3.5, 4.0 * std::sqrt(3.5 / n));
}

TEST(Rng, SplitIsDeterministic) {
  const RngStream base(11, 2);
  auto a = base.split(4);
  auto b = base.split(4);
  EXPECT_EQ(a.uniform(), b.uniform());
}

TEST(Parallel, EnvironmentCapsWorkers) {
  ::setenv("SWEEPSIM_THREADS", "1", 1);
  EXPECT_EQ(worker_count(), 1u);
  ::setenv("SWEEPSIM_THREADS", "garbage", 1);
  EXPECT_GE(worker_count(), 1u);
  ::unsetenv("SWEEPSIM_THREADS");
}

TEST(Parallel, ResultsIndependentOfThreadCount) {
  auto fn = [](RngStream& rng, std::int64_t i) { return rng.uniform() + static_cast<double>(i); };
  const auto one = run_replicates<double>(4, 10, 257, fn, 1);
  const auto many = run_replicates<double>(4, 10, 257, fn, 8);
  EXPECT_EQ(one, many);
  RngStream r(4, 10 + 100);
  EXPECT_EQ(one[100], r.uniform() + 100.0);
}

TEST(Parallel, LowestFailingReplicateIsReported) {
  auto fn = [](RngStream&, std::int64_t i) -> int {
    if (i == 30 || i == 70) throw std::runtime_error(std::to_string(i));
    return 0;
  };
  try {
    run_replicates<int>(1, 0, 100, fn, 4);
    FAIL();
  } catch (const std::runtime_error& e) {
    EXPECT_STREQ(e.what(), "30");
  }
}

TEST(Stats, NormalQuantileMatchesGsl) {
  for (double p : {1e-6, 0.01, 0.025, 0.3, 0.5, 0.8, 0.975, 0.999999}) {
    EXPECT_NEAR(stats::normal_quantile(p), oracle::normal_quantile(p), 1e-8) << p;
  }
}

TEST(Stats, ChiSquareCriticalValueCloseToGsl) {
  // Wilson-Hilferty is an approximation; relative error a fraction of a percent.
  for (int dof : {3, 10, 50, 200}) {
    const double exact = oracle::chi_square_upper_quantile(dof, 0.01);
    EXPECT_NEAR(stats::chi_square_critical_value(dof, 0.01), exact, 0.01 * exact) << dof;
  }
}

TEST(Stats, QuantileAndSpearmanMatchGsl) {
  gen::Source src(104);
  for (int c = 0; c < 50; ++c) {
    std::vector<double> x(static_cast<std::size_t>(src.integer(3, 60))), y(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
      x[i] = src.uniform(-5, 5);
      y[i] = x[i] * src.uniform(-1, 2) + src.uniform(-1, 1);
    }
    for (double q : {0.0, 0.1, 0.25, 0.5, 0.75, 1.0}) {
      EXPECT_NEAR(stats::quantile(x, q), oracle::quantile(x, q), 1e-12);
    }
    EXPECT_NEAR(stats::spearman(x, y), oracle::spearman(x, y), 1e-12);
  }
  EXPECT_THROW(stats::quantile({}, 0.5), std::invalid_argument);
}

TEST(Stats, WilsonIntervalKnownValue) {
  // 10 of 100, z = 1.96: textbook (0.0552, 0.1744).
  const auto ci = stats::wilson_interval(10, 100);
  EXPECT_NEAR(ci.low, 0.0552, 1e-4);
  EXPECT_NEAR(ci.high, 0.1744, 1e-4);
  const auto zero = stats::wilson_interval(0, 50);
  EXPECT_EQ(zero.low, 0.0);
  EXPECT_GT(zero.high, 0.0);
}

TEST(Stats, TotalVariationAndKs) {
  EXPECT_DOUBLE_EQ(stats::total_variation({0.5, 0.5}, {1.0}), 0.5);
  EXPECT_DOUBLE_EQ(stats::ks_statistic({1, 2, 3}, {1, 2, 3}), 0.0);
  EXPECT_DOUBLE_EQ(stats::ks_statistic({0, 0}, {1, 1}), 1.0);
  // c(0.05) = 1.358 for the asymptotic two-sample test.
  EXPECT_NEAR(stats::ks_critical_value(100, 100, 0.05), 1.358 * std::sqrt(0.02), 2e-3);
}

TEST(Quadrature, AdaptiveSimpsonOnKnownIntegrals) {
  EXPECT_NEAR(integrate([](double x) { return std::exp(-x); }, 0, 30).value, -std::expm1(-30.0),
              1e-11);
  EXPECT_NEAR(integrate([](double x) { return std::sin(x); }, 0, M_PI).value, 2.0, 1e-11);
  EXPECT_NEAR(integrate([](double x) { return x * x; }, 1, 0).value, -1.0 / 3.0, 1e-13);
  EXPECT_NEAR(gauss_legendre([](double x) { return std::pow(x, 9); }, 0, 2, 5), 102.4, 1e-10);
  EXPECT_NEAR(gauss_legendre([](double x) { return std::exp(x); }, 0, 1, 16), std::exp(1.0) - 1, 1e-14);
}

TEST(Quadrature, NarrowPeakIsFound) {
  auto peak = [](double x) { return std::exp(-4.0 * (x - 37.3) * (x - 37.3)); };
  EXPECT_NEAR(integrate(peak, 0, 100).value, std::sqrt(M_PI / 4.0), 1e-9);
}
