#include <chrono>
#include <cmath>
#include <functional>

#include "sweepsim/asrg.h"
#include "sweepsim/birth_death.h"
#include "sweepsim/diffusion.h"
#include "sweepsim/experiments.h"
#include "sweepsim/json_io.h"

namespace sweepsim::experiments {

namespace {

nlohmann::json comparison_json(const ComparisonResult& c) {
  nlohmann::json j{{"empirical", c.empirical},
                   {"standard_error", c.standard_error},
                   {"target", c.target},
                   {"z", std::isfinite(c.z) ? nlohmann::json(c.z) : nlohmann::json("inf")},
                   {"replicates", c.replicates}};
  if (!c.extra.is_null()) j["extra"] = c.extra;
  return j;
}

CheckResult close_to(std::string name, double value, double target, double tol) {
  CheckResult r;
  r.name = std::move(name);
  r.passed = std::abs(value - target) <= tol;
  r.details = {{"value", value}, {"target", target}, {"tolerance", tol}};
  return r;
}

std::vector<CheckResult> exact_checks() {
  std::vector<CheckResult> out;

  {
    CheckResult r;
    r.name = "no_recombinant_source_without_recombination";
    const ModelParams p = make_params(10.0, 0.4, 0.8, 0.0, 0.2);
    jumpsim::RateVector rates{};
    bool zero = true;
    for (const JumpState s : {JumpState{{2, 1, 1, 0}}, JumpState{{5, 3, 7, 0}}}) {
      jumpsim::TransitionTable(jumpsim::Variant::L).rates(s, p, rates);
      zero = zero && rates[9] == 0.0 && rates[7] == 0.0 && rates[3] == 0.0;
    }
    r.passed = zero;
    out.push_back(r);
  }
  out.push_back(close_to("survival_without_immigration", bd::immigration_survival(0.4, 0.8, 0.0), 0.0, 0.0));
  out.push_back(close_to("limit_value", analytics::limiting_fixation_probability(0.4, 0.8, 1.0),
                         0.6460, 5e-5));
  {
    const auto b = analytics::fixation_probability_bounds(0.4, 0.8, 1.0);
    CheckResult r = close_to("limit_bounds_lower", b.lower, 0.5057, 5e-5);
    out.push_back(r);
    out.push_back(close_to("limit_bounds_upper", b.upper, 0.7602, 5e-5));
  }
  out.push_back(close_to("recombinant_survival_identity",
                         0.8 * bd::immigration_survival(0.4, 0.8, 2.0),
                         analytics::limiting_fixation_probability(0.4, 0.8, 1.0), 1e-12));
  out.push_back(close_to("kendall_constant_rate",
                         bd::kendall_generating_function(bd::constant_schedule(2.0, 1.0, 0.0), 1,
                                                         std::log(2.0), 0.0),
                         1.0 / 3.0, 1e-9));
  {
    double sum = 0.0;
    for (std::int64_t k = 1; k < 400; ++k) sum += analytics::pi_equilibrium_pmf(24.0, 1.0, k);
    out.push_back(close_to("line_count_law_normalized", sum, 1.0, 1e-12));
  }
  out.push_back(close_to("one_locus_formula", diffusion::one_locus_fixation_probability(2.0, 0.3),
                         0.7118, 5e-5));
  {
    CheckResult r;
    r.name = "type_propagation_rules";
    r.passed = asrg::selective_outcome(2, 3, 1) == 3 && asrg::selective_outcome(2, 1, 0) == 0 &&
               asrg::selective_outcome(1, 1, 0) == 1 && asrg::recombination_outcome(1, 2) == 3 &&
               asrg::recombination_outcome(2, 1) == 0 && asrg::recombination_outcome(3, 0) == 1;
    out.push_back(r);
  }
  {
    CheckResult r;
    r.name = "absorption_classes";
    using jumpsim::AbsorptionStatus;
    r.passed = jumpsim::classify_absorption(JumpState{{0, 0, 0, 7}}) == AbsorptionStatus::Fixation3 &&
               jumpsim::classify_absorption(JumpState{{5, 2, 0, 0}}) == AbsorptionStatus::Failure &&
               jumpsim::classify_absorption(JumpState{{1, 1, 1, 1}}) == AbsorptionStatus::Ongoing;
    out.push_back(r);
  }
  return out;
}

}  // namespace

OracleReport run_oracle_suite(const OracleSuiteConfig& cfg) {
  OracleReport rep;
  rep.checks = exact_checks();
  if (!cfg.quick) {
    std::uint64_t seed = cfg.seed;
    auto add = [&](std::string name, const std::function<CheckResult(std::uint64_t)>& fn) {
      const auto start = std::chrono::steady_clock::now();
      CheckResult r = fn(seed);
      r.name = std::move(name);
      r.seed = seed;
      r.details["runtime_seconds"] =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      rep.checks.push_back(std::move(r));
      ++seed;
    };
    auto from = [](const ComparisonResult& c) {
      CheckResult r;
      r.passed = c.passed;
      r.details = comparison_json(c);
      return r;
    };
    add("survival_quadrature", [](std::uint64_t) {
      return close_to("", bd::immigration_survival_quadrature(0.4, 0.8, 1.0), bd::immigration_survival(0.4, 0.8, 1.0),
                      1e-9);
    });
    add("extinction_identity", [](std::uint64_t) {
      const double T = bd::logistic_window(0.4, 0.8, 1.0);
      const auto s = bd::logistic_schedule(bd::LogisticDrive{0.4, 0.8, 0.5}, 1.0, 1.0, T);
      return close_to("", bd::kendall_generating_function(s, 0, T, 0.0),
                      bd::extinction_probability(s, T), 1e-9);
    });
    add("survival_ssa", [&](std::uint64_t s) { return from(survival_ssa_experiment(0.4, 0.8, 1.0, 100000, s)); });
    add("rescaled_process_survival",
        [&](std::uint64_t s) { return from(v_process_experiment(0.4, 0.8, 1.0, 0.05, 100000, s)); });
    add("duality", [&](std::uint64_t s) {
      const auto d = duality_experiment(1.0, 0.4, 0.8, 1.0, make_simplex(0.4, 0.3, 0.2, 0.1), 0.2,
                                        10000, 100000, 1e-4, s);
      CheckResult r;
      r.passed = d.passed;
      r.details = {{"sde_mean", d.sde_mean}, {"asrg_mean", d.asrg_mean}, {"max_z", d.max_z}};
      return r;
    });
    add("line_count_equilibrium", [&](std::uint64_t s) {
      const auto e = pi_equilibrium_experiment(24.0, 1.0, 100000, s);
      CheckResult r;
      r.passed = e.tv_passed && e.balance_passed;
      r.details = {{"tv", e.tv}, {"max_balance_z", e.max_balance_z}, {"levels", e.levels_checked}};
      return r;
    });
    add("branching_extinction",
        [&](std::uint64_t s) { return from(branching_extinction_experiment(1.0, 0.5, 10.0, 100000, s)); });
    add("occupation_bound",
        [&](std::uint64_t s) { return from(occupation_experiment(1.0, 0.5, 1, 50, 20000, s)); });
    add("subcritical_hitting", [&](std::uint64_t s) {
      return from(subcritical_hitting_experiment(1.0, 1.0, 1.0, 1e4, 0.4, 2000, s));
    });
    add("total_concentration",
        [&](std::uint64_t s) { return from(concentration_experiment(5000.0, 100, s)); });
    add("one_locus_sde",
        [&](std::uint64_t s) { return from(one_locus_sde_experiment(2.0, 0.3, 10000, 2e-4, s)); });
  }
  rep.all_passed = true;
  for (const auto& c : rep.checks) rep.all_passed = rep.all_passed && c.passed;
  return rep;
}

nlohmann::json to_json(const OracleReport& r) {
  nlohmann::json checks = nlohmann::json::array();
  for (const auto& c : r.checks) {
    checks.push_back({{"name", c.name}, {"passed", c.passed}, {"seed", c.seed}, {"details", c.details}});
  }
  return {{"schema", kSchemaVersion}, {"all_passed", r.all_passed}, {"checks", checks}};
}

}  // namespace sweepsim::experiments
