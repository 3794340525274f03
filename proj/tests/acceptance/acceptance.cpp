// Acceptance run: one PASS/FAIL line per criterion. Pass criterion numbers
// as arguments to run a subset; the exit status is nonzero if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "cli.h"
#include "oracles.h"
#include "sweepsim/analytics.h"
#include "sweepsim/birth_death.h"
#include "sweepsim/experiments.h"

using namespace sweepsim;
using namespace sweepsim::experiments;

namespace {

// Pinned tolerances.
constexpr double kSigmas = 3.0;
constexpr double kKendallTol = 1e-9;
constexpr double kProbabilityBand = 0.25;
constexpr double kSuperCeiling = 0.02;
constexpr double kTimeBand = 0.20;
constexpr double kTrendSlack = 2.0;
constexpr double kExponentBand = 0.15;
constexpr double kBreakpointWindow = 0.1;
constexpr double kShapeSpearman = -0.8;
constexpr double kTvCeiling = 0.05;

constexpr std::uint64_t kSeed = 20240601;

struct Outcome {
  bool passed = false;
  std::string summary;
};

std::string num(double v, int prec = 4) {
  std::ostringstream s;
  s.precision(prec);
  s << v;
  return s.str();
}

Outcome survival_ssa() {
  const auto r = survival_ssa_experiment(0.4, 0.8, 1.0, 100000, kSeed + 1);
  return {r.z <= kSigmas, "empirical " + num(r.empirical) + " closed form " + num(r.target) +
                              " z " + num(r.z, 3)};
}

Outcome kendall() {
  double worst = 0.0;
  const auto s = bd::constant_schedule(2.0, 1.0, 0.0);
  for (double t : {0.25, 0.5, 1.0, 2.0, 3.0}) {
    for (double z : {0.0, 0.3, 0.6, 0.9}) {
      worst = std::max(worst, std::abs(bd::kendall_generating_function(s, 1, t, z) -
                                       oracle::linear_bd_pgf(2.0, 1.0, 1, t, z)));
    }
  }
  const double T = bd::logistic_window(0.4, 0.8, 1.0);
  const auto ls = bd::logistic_schedule(bd::LogisticDrive{0.4, 0.8, 0.5}, 1.0, 1.0, T);
  double worst_ext = 0.0;
  for (double t : {-T / 2, 0.0, 5.0, T}) {
    worst_ext = std::max(worst_ext, std::abs(bd::kendall_generating_function(ls, 0, t, 0.0) -
                                             bd::extinction_probability(ls, t)));
  }
  return {worst <= kKendallTol && worst_ext <= kKendallTol,
          "grid max error " + num(worst, 3) + ", zero-ancestor identity error " + num(worst_ext, 3)};
}

Outcome rescaled_process() {
  bool ok = true;
  std::string text;
  std::uint64_t seed = kSeed + 3;
  for (auto [c1, c2, rho] : {std::tuple{0.4, 0.8, 1.0}, std::tuple{0.3, 0.9, 0.5}}) {
    const auto r = v_process_experiment(c1, c2, rho, 0.05, 100000, seed++);
    ok = ok && r.z <= kSigmas;
    text += "(" + num(c1) + "," + num(c2) + "," + num(rho) + "): " + num(r.empirical) + " vs " +
            num(r.target) + " z " + num(r.z, 3) + "; ";
  }
  return {ok, text};
}

ExperimentConfig sweep_config(double psi, double c1, double c2, double rho) {
  ExperimentConfig c;
  c.psi = psi;
  c.c1 = c1;
  c.c2 = c2;
  c.rho = rho;
  c.seed = kSeed + 4;
  c.tolerance.relative_band = kProbabilityBand;
  c.tolerance.absolute_band = kSuperCeiling;
  c.tolerance.time_band = kTimeBand;
  c.tolerance.trend_se = kTrendSlack;
  c.tolerance.exponent_band = kExponentBand;
  c.tolerance.breakpoint_window = kBreakpointWindow;
  return c;
}

Outcome fixation_probability() {
  auto c = sweep_config(0.2, 0.4, 0.8, 1.0);
  c.alphas = {200.0, 1000.0, 5000.0};
  c.replicates = 4000;
  const auto r = estimate_fixation_probability(c);
  const auto& last = r.per_alpha.back();
  std::string text;
  for (const auto& e : r.per_alpha) text += num(e.alpha) + ": " + num(e.estimate) + "; ";
  text += "limit " + num(last.theory) + " bounds [" + num(last.bounds.lower) + ", " +
          num(last.bounds.upper) + "] trend " + (r.trend_pass ? "ok" : "broken");
  return {r.hard_band_pass && r.trend_pass, text};
}

Outcome supercritical() {
  auto c = sweep_config(0.9, 0.4, 0.8, 1.0);
  c.alphas = {1000.0};
  c.replicates = 4000;
  const auto r = estimate_fixation_probability(c);
  const auto& e = r.per_alpha.back();
  return {e.estimate < kSuperCeiling && !e.invalid,
          "estimate " + num(e.estimate) + " (" + std::to_string(e.successes) + "/" +
              std::to_string(e.replicates) + ") ceiling " + num(kSuperCeiling)};
}

Outcome fixation_time() {
  auto c = sweep_config(0.2, 0.5, 0.8, 2.0);
  c.alphas = {200.0, 1000.0, 5000.0, 10000.0};
  c.replicates_per_alpha = {4000, 4000, 1500, 1200};
  const auto r = estimate_conditional_fixation_time(c);
  // Sample IQR of n points has standard error about 1.166 IQR / sqrt(n).
  bool iqr_down = true;
  std::string text;
  for (std::size_t i = 0; i < r.per_alpha.size(); ++i) {
    const auto& e = r.per_alpha[i];
    const double iqr = e.time_quartiles->iqr();
    text += num(e.alpha) + ": median " + num(e.estimate) + " iqr " + num(iqr) + "; ";
    if (i > 0) {
      const auto& prev = r.per_alpha[i - 1];
      const double piqr = prev.time_quartiles->iqr();
      const double se = std::hypot(1.166 * iqr / std::sqrt(double(e.successes)),
                                   1.166 * piqr / std::sqrt(double(prev.successes)));
      iqr_down = iqr_down && iqr <= piqr + kTrendSlack * se;
    }
  }
  text += "tau4 " + num(r.per_alpha.back().theory) + (iqr_down ? "" : " iqr not decreasing");
  return {r.hard_band_pass && iqr_down, text};
}

Outcome exponent_paths() {
  auto sub = sweep_config(0.2, 0.4, 0.8, 1.0);
  sub.alphas = {10000.0};
  sub.replicates = 600;
  const auto rs = exponent_path_experiment(sub);
  auto sup = sweep_config(0.9, 0.4, 0.8, 1.0);
  sup.alphas = {10000.0};
  sup.replicates = 600;
  const auto rp = exponent_path_experiment(sup);
  const bool sub_ok = rs.matching_runs > 0 && rs.checked > 0 && rs.within == rs.checked;
  const bool sup_ok = rp.matching_runs > 0 && rp.within == rp.checked && rp.decreasing_spearman &&
                      *rp.decreasing_spearman <= kShapeSpearman;
  return {sub_ok && sup_ok,
          "sub-critical " + std::to_string(rs.within) + "/" + std::to_string(rs.checked) +
              " within (max deviation " + num(rs.max_deviation, 3) + ", " +
              std::to_string(rs.matching_runs) + " runs); super-critical " + std::to_string(rp.within) +
              "/" + std::to_string(rp.checked) + " within, type-1 Spearman " +
              num(rp.decreasing_spearman.value_or(NAN), 3)};
}

Outcome duality() {
  bool ok = true;
  double worst = 0.0;
  std::uint64_t seed = kSeed + 7;
  for (double alpha : {1.0, 2.0, 5.0}) {
    for (double tau : {0.2, 0.5}) {
      const auto d = duality_experiment(alpha, 0.4, 0.8, 1.0, make_simplex(0.4, 0.3, 0.2, 0.1), tau,
                                        10000, 100000, 1e-4, seed++);
      ok = ok && d.max_z <= kSigmas;
      worst = std::max(worst, d.max_z);
    }
  }
  return {ok, "largest standardized gap " + num(worst, 3) + " over 6 settings x 4 types"};
}

Outcome line_count_law() {
  const auto e = pi_equilibrium_experiment(24.0, 1.0, 100000, kSeed + 8);
  return {e.tv < kTvCeiling && e.balance_passed,
          "TV " + num(e.tv, 3) + ", flux balance max z " + num(e.max_balance_z, 3) + " over " +
              std::to_string(e.levels_checked) + " levels"};
}

Outcome envelopes() {
  std::vector<std::pair<std::string, ComparisonResult>> parts;
  parts.emplace_back("extinction", branching_extinction_experiment(1.0, 0.5, 10.0, 100000, kSeed + 9));
  parts.emplace_back("occupation", occupation_experiment(1.0, 0.5, 1, 50, 20000, kSeed + 10));
  parts.emplace_back("hitting", subcritical_hitting_experiment(1.0, 1.0, 1.0, 1e4, 0.4, 2000, kSeed + 11));
  parts.emplace_back("concentration", concentration_experiment(5000.0, 100, kSeed + 12));
  parts.emplace_back("one-locus", one_locus_sde_experiment(2.0, 0.3, 10000, 2e-4, kSeed + 13));
  bool ok = true;
  std::string text;
  for (const auto& [name, r] : parts) {
    ok = ok && r.passed;
    text += name + (r.passed ? " ok" : " FAILED") + " (" + num(r.empirical) + " vs " + num(r.target) +
            "); ";
  }
  return {ok, text};
}

std::string cli_output(const std::vector<std::string>& args) {
  std::vector<const char*> argv{"sweepsim"};
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return out.str();
}

Outcome determinism() {
  ExperimentConfig c;
  c.alphas = {100.0, 300.0};
  c.replicates = 300;
  c.seed = kSeed + 14;
  auto jsonl = [](const SweepReport& r) {
    std::string s;
    for (const auto& rec : r.replicates) s += to_json(rec).dump() + "\n";
    return s;
  };
  auto c1 = c;
  c1.threads = 1;
  auto c4 = c;
  c4.threads = 4;
  const auto a = jsonl(estimate_fixation_probability(c1));
  const auto b = jsonl(estimate_fixation_probability(c4));
  const auto again = jsonl(estimate_fixation_probability(c1));
  const std::vector<std::string> sim{"--seed", "9", "simulate", "--process", "L", "--alpha", "200",
                                     "--replicates", "20"};
  const auto s1 = cli_output(sim);
  const auto s2 = cli_output(sim);
  const bool ok = !a.empty() && a == b && a == again && !s1.empty() && s1 == s2;
  return {ok, "sweep JSONL " + std::to_string(a.size()) + " bytes, identical across reruns and threads: " +
                  (a == b && a == again ? "yes" : "no") + "; CLI simulate identical: " +
                  (s1 == s2 ? "yes" : "no")};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"survival closed form vs SSA", survival_ssa},
      {"Kendall generating function", kendall},
      {"rescaled process vs survival formula", rescaled_process},
      {"sub-critical fixation probability", fixation_probability},
      {"super-critical fixation probability", supercritical},
      {"conditional fixation time", fixation_time},
      {"exponent paths", exponent_paths},
      {"duality", duality},
      {"line-count equilibrium", line_count_law},
      {"property envelopes", envelopes},
      {"determinism", determinism},
  };
  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::stoi(argv[i]));

  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int n = static_cast<int>(i + 1);
    if (!only.empty() && !only.count(n)) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::cout << "criterion " << n << " [" << criteria[i].first << "]: " << (o.passed ? "PASS" : "FAIL")
              << " - " << o.summary << " (" << num(secs, 3) << " s)" << std::endl;
    if (!o.passed) ++failed;
  }
  std::cout << (failed == 0 ? "all criteria passed" : std::to_string(failed) + " criteria failed")
            << std::endl;
  return failed == 0 ? 0 : 1;
}
