#include "sweepsim/experiments.h"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <set>
#include <sstream>
#include <stdexcept>

#include "sweepsim/asrg.h"
#include "sweepsim/birth_death.h"
#include "sweepsim/diffusion.h"
#include "sweepsim/json_io.h"
#include "sweepsim/parallel.h"

namespace sweepsim::experiments {

using analytics::Exponent;
using jumpsim::AbsorptionStatus;

std::string_view to_string(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::FixationProbability:
      return "fixation_probability";
    case ExperimentKind::FixationTime:
      return "fixation_time";
    case ExperimentKind::ExponentPath:
      return "exponent_path";
  }
  return "?";
}

ExperimentKind experiment_kind_from_string(std::string_view s) {
  if (s == "fixation_probability") return ExperimentKind::FixationProbability;
  if (s == "fixation_time") return ExperimentKind::FixationTime;
  if (s == "exponent_path") return ExperimentKind::ExponentPath;
  throw SchemaError("/kind: unknown experiment kind '" + std::string(s) + "'");
}

std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::WithinTolerance:
      return "within_tolerance";
    case Verdict::TrendConsistent:
      return "trend_consistent";
    case Verdict::Fail:
      return "fail";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// Configuration.

void ExperimentConfig::validate() const {
  if (alphas.empty()) throw std::invalid_argument("alpha list is empty");
  for (std::size_t i = 0; i < alphas.size(); ++i) {
    if (!(alphas[i] > 0.0)) throw std::invalid_argument("alphas must be positive");
    if (i > 0 && !(alphas[i] > alphas[i - 1])) {
      throw std::invalid_argument("alpha list must be sorted ascending");
    }
  }
  if (!replicates_per_alpha.empty() && replicates_per_alpha.size() != alphas.size()) {
    throw std::invalid_argument("replicates_per_alpha must match the alpha list");
  }
  for (std::size_t i = 0; i < alphas.size(); ++i) {
    if (replicates_at(i) < 100) throw std::invalid_argument("replicate count must be >= 100");
  }
  if (!(t_max_factor > 0.0)) throw std::invalid_argument("t_max_factor must be positive");
  for (std::size_t i = 1; i < tau_grid.size(); ++i) {
    if (!(tau_grid[i] > tau_grid[i - 1])) throw std::invalid_argument("tau grid must ascend");
  }
  if (!tau_grid.empty() && tau_grid.front() < 0.0) {
    throw std::invalid_argument("tau grid must be >= 0");
  }
  for (double a : alphas) validate_params(params_at(a), false);
}

std::int64_t ExperimentConfig::replicates_at(std::size_t i) const {
  return replicates_per_alpha.empty() ? replicates : replicates_per_alpha.at(i);
}

ModelParams ExperimentConfig::params_at(double alpha) const {
  return make_params(alpha, c1, c2, rho, psi, c_init);
}

std::uint64_t ExperimentConfig::stream_base(std::size_t alpha_index) const {
  std::uint64_t base = first_stream;
  for (std::size_t i = 0; i < alpha_index; ++i) {
    base += static_cast<std::uint64_t>(replicates_at(i));
  }
  return base;
}

namespace {

nlohmann::json tolerance_to_json(const TolerancePolicy& t) {
  return {{"relative_band", t.relative_band},
          {"time_band", t.time_band},
          {"absolute_band", t.absolute_band},
          {"trend_se", t.trend_se},
          {"max_ongoing_share", t.max_ongoing_share},
          {"exponent_band", t.exponent_band},
          {"breakpoint_window", t.breakpoint_window}};
}

void check_keys(const nlohmann::json& j, const std::set<std::string>& allowed,
                const std::string& path) {
  if (!j.is_object()) throw SchemaError(path + "/: expected a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (!allowed.contains(key)) throw SchemaError(path + "/" + key + ": unknown key");
  }
}

double read_number(const nlohmann::json& j, const std::string& key, const std::string& path,
                   double fallback) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_number()) throw SchemaError(path + "/" + key + ": expected a number");
  return j.at(key).get<double>();
}

template <class Int>
Int read_integer(const nlohmann::json& j, const std::string& key, const std::string& path,
                 Int fallback) {
  if (!j.contains(key)) return fallback;
  const auto& v = j.at(key);
  if (!v.is_number_integer()) throw SchemaError(path + "/" + key + ": expected an integer");
  if (v.is_number_unsigned()) return static_cast<Int>(v.get<std::uint64_t>());
  const auto s = v.get<std::int64_t>();
  if (std::is_unsigned_v<Int> && s < 0) {
    throw SchemaError(path + "/" + key + ": expected a non-negative integer");
  }
  return static_cast<Int>(s);
}

std::vector<double> read_number_array(const nlohmann::json& j, const std::string& key,
                                      const std::string& path) {
  if (!j.contains(key)) return {};
  const auto& a = j.at(key);
  if (!a.is_array()) throw SchemaError(path + "/" + key + ": expected an array");
  std::vector<double> out;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!a[i].is_number()) {
      throw SchemaError(path + "/" + key + "/" + std::to_string(i) + ": expected a number");
    }
    out.push_back(a[i].get<double>());
  }
  return out;
}

}  // namespace

nlohmann::json config_to_json(const ExperimentConfig& cfg) {
  nlohmann::json j{{"schema", kSchemaVersion},
                   {"kind", to_string(cfg.kind)},
                   {"alphas", cfg.alphas},
                   {"rho", cfg.rho},
                   {"psi", cfg.psi},
                   {"c1", cfg.c1},
                   {"c2", cfg.c2},
                   {"c_init", cfg.c_init},
                   {"replicates", cfg.replicates},
                   {"seed", cfg.seed},
                   {"first_stream", cfg.first_stream},
                   {"t_max_factor", cfg.t_max_factor},
                   {"tolerance", tolerance_to_json(cfg.tolerance)}};
  if (!cfg.replicates_per_alpha.empty()) j["replicates_per_alpha"] = cfg.replicates_per_alpha;
  if (!cfg.tau_grid.empty()) j["tau_grid"] = cfg.tau_grid;
  if (cfg.threads != 0) j["threads"] = cfg.threads;
  return j;
}

ExperimentConfig config_from_json(const nlohmann::json& j) {
  check_keys(j,
             {"schema", "kind", "alphas", "rho", "psi", "c1", "c2", "c_init", "replicates",
              "replicates_per_alpha", "seed", "first_stream", "t_max_factor", "tau_grid",
              "tolerance", "threads"},
             "");
  if (j.contains("schema")) {
    if (!j.at("schema").is_string() || j.at("schema").get<std::string>() != kSchemaVersion) {
      throw SchemaError("/schema: expected \"" + std::string(kSchemaVersion) + "\"");
    }
  }
  ExperimentConfig cfg;
  if (j.contains("kind")) {
    if (!j.at("kind").is_string()) throw SchemaError("/kind: expected a string");
    cfg.kind = experiment_kind_from_string(j.at("kind").get<std::string>());
  }
  if (j.contains("alphas")) cfg.alphas = read_number_array(j, "alphas", "");
  cfg.rho = read_number(j, "rho", "", cfg.rho);
  cfg.psi = read_number(j, "psi", "", cfg.psi);
  cfg.c1 = read_number(j, "c1", "", cfg.c1);
  cfg.c2 = read_number(j, "c2", "", cfg.c2);
  cfg.c_init = read_number(j, "c_init", "", cfg.c_init);
  cfg.replicates = read_integer<std::int64_t>(j, "replicates", "", cfg.replicates);
  if (j.contains("replicates_per_alpha")) {
    const auto& a = j.at("replicates_per_alpha");
    if (!a.is_array()) throw SchemaError("/replicates_per_alpha: expected an array");
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (!a[i].is_number_integer()) {
        throw SchemaError("/replicates_per_alpha/" + std::to_string(i) + ": expected an integer");
      }
      cfg.replicates_per_alpha.push_back(a[i].get<std::int64_t>());
    }
  }
  cfg.seed = read_integer<std::uint64_t>(j, "seed", "", cfg.seed);
  cfg.first_stream = read_integer<std::uint64_t>(j, "first_stream", "", cfg.first_stream);
  cfg.t_max_factor = read_number(j, "t_max_factor", "", cfg.t_max_factor);
  cfg.tau_grid = read_number_array(j, "tau_grid", "");
  cfg.threads = read_integer<unsigned>(j, "threads", "", cfg.threads);
  if (j.contains("tolerance")) {
    const auto& t = j.at("tolerance");
    check_keys(t,
               {"relative_band", "time_band", "absolute_band", "trend_se", "max_ongoing_share",
                "exponent_band", "breakpoint_window"},
               "/tolerance");
    auto& tol = cfg.tolerance;
    tol.relative_band = read_number(t, "relative_band", "/tolerance", tol.relative_band);
    tol.time_band = read_number(t, "time_band", "/tolerance", tol.time_band);
    tol.absolute_band = read_number(t, "absolute_band", "/tolerance", tol.absolute_band);
    tol.trend_se = read_number(t, "trend_se", "/tolerance", tol.trend_se);
    tol.max_ongoing_share =
        read_number(t, "max_ongoing_share", "/tolerance", tol.max_ongoing_share);
    tol.exponent_band = read_number(t, "exponent_band", "/tolerance", tol.exponent_band);
    tol.breakpoint_window =
        read_number(t, "breakpoint_window", "/tolerance", tol.breakpoint_window);
  }
  return cfg;
}

std::string config_hash(const ExperimentConfig& cfg) {
  // The thread count never changes results, so it stays out of the hash.
  nlohmann::json j = config_to_json(cfg);
  j.erase("threads");
  return git_blob_hash(canonical_dump(j));
}

// ---------------------------------------------------------------------------
// Fixation probability and time.

nlohmann::json to_json(const ReplicateRecord& r) {
  return {{"alpha", r.alpha},
          {"stream", r.stream},
          {"status", jumpsim::to_string(r.status)},
          {"time", r.time},
          {"rescaled_time", r.rescaled_time},
          {"provisional", r.provisional},
          {"budget_exceeded", r.budget_exceeded},
          {"events", r.events},
          {"initial_state", r.initial_state.l}};
}

std::vector<ReplicateRecord> run_L_replicates(const ExperimentConfig& cfg,
                                              std::size_t alpha_index) {
  const double alpha = cfg.alphas.at(alpha_index);
  const ModelParams p = cfg.params_at(alpha);
  jumpsim::RunOptions opt;
  opt.t_max = jumpsim::default_t_max(p) * cfg.t_max_factor;
  const std::uint64_t base = cfg.stream_base(alpha_index);
  const double scale = alpha / std::log(alpha);
  return run_replicates<ReplicateRecord>(
      cfg.seed, base, cfg.replicates_at(alpha_index),
      [&](RngStream& rng, std::int64_t i) {
        const jumpsim::LRun run = jumpsim::simulate_L(p, rng, opt);
        ReplicateRecord r;
        r.alpha = alpha;
        r.stream = base + static_cast<std::uint64_t>(i);
        r.status = run.status;
        r.time = run.time;
        r.rescaled_time = run.time * scale;
        r.provisional = run.provisional;
        r.budget_exceeded = run.budget_exceeded;
        r.events = run.trajectory.events;
        r.initial_state = run.trajectory.initial_state;
        return r;
      },
      cfg.threads);
}

namespace {

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

EstimateReport tally(const std::vector<ReplicateRecord>& runs, double alpha,
                     const TolerancePolicy& tol) {
  EstimateReport e;
  e.alpha = alpha;
  e.replicates = static_cast<std::int64_t>(runs.size());
  for (const auto& r : runs) {
    if (r.status == AbsorptionStatus::Fixation3) ++e.successes;
    if (r.status == AbsorptionStatus::Ongoing) ++e.ongoing;
    if (r.provisional) ++e.provisional;
    if (r.budget_exceeded) ++e.budget_exceeded;
  }
  const double n = static_cast<double>(e.replicates);
  e.estimate = static_cast<double>(e.successes) / n;
  e.standard_error = std::sqrt(e.estimate * (1.0 - e.estimate) / n);
  e.ci = stats::wilson_interval(e.successes, e.replicates);
  if (static_cast<double>(e.ongoing) > tol.max_ongoing_share * n) {
    e.invalid = true;
    e.note = "more than " + std::to_string(tol.max_ongoing_share * 100.0) + "% of runs undecided";
  }
  return e;
}

// Consecutive distances may grow by at most `slack` combined standard errors.
bool trend_ok(const std::vector<double>& dist, const std::vector<double>& se, double slack) {
  for (std::size_t i = 1; i < dist.size(); ++i) {
    if (dist[i] > dist[i - 1] + slack * std::hypot(se[i], se[i - 1])) return false;
  }
  return true;
}

void finish_sweep(SweepReport& rep, const std::vector<double>& dist, const std::vector<double>& se) {
  const auto& cfg = rep.config;
  rep.trend_pass = trend_ok(dist, se, cfg.tolerance.trend_se);
  if (dist.size() >= 2) {
    rep.trend_spearman = stats::spearman(cfg.alphas, dist);
  }
  rep.hard_band_pass = !rep.per_alpha.empty() &&
                       rep.per_alpha.back().verdict == Verdict::WithinTolerance &&
                       !rep.per_alpha.back().invalid;
  if (rep.hard_band_pass) {
    rep.overall = Verdict::WithinTolerance;
  } else if (rep.trend_pass) {
    rep.overall = Verdict::TrendConsistent;
  } else {
    rep.overall = Verdict::Fail;
  }
  rep.hash = config_hash(cfg);
  rep.stream_first = cfg.first_stream;
  rep.stream_last = cfg.stream_base(cfg.alphas.size()) - 1;
}

}  // namespace

SweepReport estimate_fixation_probability(const ExperimentConfig& cfg) {
  cfg.validate();
  const Regime regime = classify_regime(cfg.psi, cfg.c1, cfg.c2);
  if (regime == Regime::Boundary) {
    throw std::invalid_argument("fixation probability is undetermined on the regime boundary");
  }
  const bool sub = regime == Regime::SubCritical;
  SweepReport rep;
  rep.config = cfg;
  std::vector<double> dist;
  std::vector<double> se;
  for (std::size_t i = 0; i < cfg.alphas.size(); ++i) {
    const auto start = std::chrono::steady_clock::now();
    auto runs = run_L_replicates(cfg, i);
    EstimateReport e = tally(runs, cfg.alphas[i], cfg.tolerance);
    if (sub) {
      e.theory = analytics::limiting_fixation_probability(cfg.c1, cfg.c2, cfg.rho);
      e.bounds = analytics::fixation_probability_bounds(cfg.c1, cfg.c2, cfg.rho);
      const bool band = std::abs(e.estimate - e.theory) <= cfg.tolerance.relative_band * e.theory;
      const bool inside = e.estimate >= e.bounds.lower && e.estimate <= e.bounds.upper;
      e.verdict = band && inside && !e.invalid ? Verdict::WithinTolerance : Verdict::Fail;
    } else {
      e.theory = 0.0;
      e.bounds = {0.0, 0.0};
      e.verdict = e.estimate < cfg.tolerance.absolute_band && !e.invalid ? Verdict::WithinTolerance
                                                                         : Verdict::Fail;
    }
    dist.push_back(std::abs(e.estimate - e.theory));
    se.push_back(e.standard_error);
    e.runtime_seconds = seconds_since(start);
    rep.per_alpha.push_back(e);
    rep.replicates.insert(rep.replicates.end(), runs.begin(), runs.end());
  }
  finish_sweep(rep, dist, se);
  // A trend verdict on single estimates is upgraded per alpha for reporting.
  if (rep.trend_pass) {
    for (auto& e : rep.per_alpha) {
      if (e.verdict == Verdict::Fail && !e.invalid) e.verdict = Verdict::TrendConsistent;
    }
  }
  return rep;
}

SweepReport estimate_conditional_fixation_time(const ExperimentConfig& cfg) {
  cfg.validate();
  const double tau4 = analytics::limiting_fixation_time(cfg.psi, cfg.c1, cfg.c2);
  SweepReport rep;
  rep.config = cfg;
  std::vector<double> dist;
  std::vector<double> se;
  for (std::size_t i = 0; i < cfg.alphas.size(); ++i) {
    const auto start = std::chrono::steady_clock::now();
    auto runs = run_L_replicates(cfg, i);
    EstimateReport e = tally(runs, cfg.alphas[i], cfg.tolerance);
    std::vector<double> times;
    for (const auto& r : runs) {
      if (r.status == AbsorptionStatus::Fixation3 && !r.provisional) {
        times.push_back(r.rescaled_time);
      }
    }
    if (times.size() < 100) {
      throw std::runtime_error("only " + std::to_string(times.size()) +
                               " fixing replicates at alpha " + std::to_string(cfg.alphas[i]) +
                               "; at least 100 are needed");
    }
    const auto q = stats::quartiles(times);
    e.time_quartiles = q;
    e.estimate = q.median;
    // Asymptotic standard error of a sample median via the IQR of a normal.
    e.standard_error = 1.2533 * (q.iqr() / 1.349) / std::sqrt(static_cast<double>(times.size()));
    e.ci = {q.median - stats::kZ95 * e.standard_error, q.median + stats::kZ95 * e.standard_error};
    e.theory = tau4;
    e.bounds = {tau4 * (1.0 - cfg.tolerance.time_band), tau4 * (1.0 + cfg.tolerance.time_band)};
    e.verdict = std::abs(q.median - tau4) <= cfg.tolerance.time_band * tau4 && !e.invalid
                    ? Verdict::WithinTolerance
                    : Verdict::Fail;
    dist.push_back(std::abs(q.median - tau4));
    se.push_back(e.standard_error);
    e.runtime_seconds = seconds_since(start);
    rep.per_alpha.push_back(e);
    rep.replicates.insert(rep.replicates.end(), runs.begin(), runs.end());
  }
  finish_sweep(rep, dist, se);
  if (rep.trend_pass) {
    for (auto& e : rep.per_alpha) {
      if (e.verdict == Verdict::Fail && !e.invalid) e.verdict = Verdict::TrendConsistent;
    }
  }
  return rep;
}

namespace {

nlohmann::json to_json(const EstimateReport& e) {
  nlohmann::json j{{"alpha", e.alpha},
                   {"replicates", e.replicates},
                   {"successes", e.successes},
                   {"ongoing", e.ongoing},
                   {"provisional", e.provisional},
                   {"budget_exceeded", e.budget_exceeded},
                   {"estimate", e.estimate},
                   {"standard_error", e.standard_error},
                   {"ci", {e.ci.low, e.ci.high}},
                   {"theory", e.theory},
                   {"bounds", {e.bounds.lower, e.bounds.upper}},
                   {"verdict", to_string(e.verdict)},
                   {"invalid", e.invalid},
                   {"runtime_seconds", e.runtime_seconds}};
  if (e.time_quartiles) {
    j["time_quartiles"] = {e.time_quartiles->q1, e.time_quartiles->median, e.time_quartiles->q3};
  }
  if (!e.note.empty()) j["note"] = e.note;
  return j;
}

std::string fmt(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return "nan";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string fmt(const Exponent& e) {
  return e.is_neg_inf() ? std::string(analytics::kNegInfLiteral) : fmt(e.value());
}

}  // namespace

nlohmann::json to_json(const SweepReport& r) {
  nlohmann::json per = nlohmann::json::array();
  for (const auto& e : r.per_alpha) per.push_back(to_json(e));
  return {{"schema", kSchemaVersion},
          {"config", config_to_json(r.config)},
          {"config_hash", r.hash},
          {"seed", r.config.seed},
          {"stream_range", {r.stream_first, r.stream_last}},
          {"per_alpha", per},
          {"hard_band_pass", r.hard_band_pass},
          {"trend_pass", r.trend_pass},
          {"trend_spearman", r.trend_spearman},
          {"verdict", to_string(r.overall)}};
}

std::string to_csv(const SweepReport& r) {
  std::string out =
      "alpha,replicates,successes,ongoing,estimate,standard_error,ci_low,ci_high,theory,"
      "time_q1,time_median,time_q3,verdict\n";
  for (const auto& e : r.per_alpha) {
    out += fmt(e.alpha) + "," + std::to_string(e.replicates) + "," +
           std::to_string(e.successes) + "," + std::to_string(e.ongoing) + "," +
           fmt(e.estimate) + "," + fmt(e.standard_error) + "," + fmt(e.ci.low) + "," +
           fmt(e.ci.high) + "," + fmt(e.theory) + ",";
    if (e.time_quartiles) {
      out += fmt(e.time_quartiles->q1) + "," + fmt(e.time_quartiles->median) + "," +
             fmt(e.time_quartiles->q3);
    } else {
      out += ",,";
    }
    out += "," + std::string(to_string(e.verdict)) + "\n";
  }
  return out;
}

// ---------------------------------------------------------------------------
// Exponent paths.

std::vector<ExponentSample> extract_exponent_path(const jumpsim::Trajectory& tr, double alpha,
                                                  const std::vector<double>& tau_grid) {
  if (!(alpha > 1.0)) throw std::invalid_argument("alpha must exceed 1");
  if (tr.records.empty()) throw std::invalid_argument("trajectory has no records");
  const double scale = std::log(alpha) / alpha;
  const double horizon = std::max(tr.final_time, tr.records.back().time);
  std::vector<ExponentSample> out;
  out.reserve(tau_grid.size());
  for (double tau : tau_grid) {
    const double s = tau * scale;
    if (s > horizon * (1.0 + 1e-12)) {
      throw std::out_of_range("grid point tau=" + fmt(tau) + " lies beyond the trajectory");
    }
    // Last record at or before s (relative slack for grid-recorded times).
    auto it = std::upper_bound(tr.records.begin(), tr.records.end(), s * (1.0 + 1e-12),
                               [](double v, const jumpsim::EventRecord& r) { return v < r.time; });
    const JumpState& st = it == tr.records.begin() ? tr.initial_state : std::prev(it)->state;
    ExponentSample e;
    e.tau = tau;
    for (int i = 0; i < kNumTypes; ++i) {
      e.q[static_cast<std::size_t>(i)] = Exponent::of_count(st[i], alpha);
    }
    out.push_back(e);
  }
  return out;
}

Exponent median_exponent(std::vector<Exponent> v) {
  if (v.empty()) throw std::invalid_argument("median of an empty sample");
  std::sort(v.begin(), v.end(), [](const Exponent& a, const Exponent& b) { return a < b; });
  return v[(v.size() - 1) / 2];
}

namespace {

std::vector<double> default_tau_grid(analytics::Branch branch, const analytics::ScenarioTimes& t) {
  const auto bps = analytics::breakpoints(branch, t);
  const double end = bps.back() + 1.0;
  std::vector<double> grid;
  for (int k = 0;; ++k) {
    const double tau = 0.25 * k;
    if (tau > end) break;
    grid.push_back(tau);
  }
  return grid;
}

bool near_breakpoint(double tau, const std::vector<double>& bps, double window) {
  return std::any_of(bps.begin(), bps.end(),
                     [&](double b) { return std::abs(tau - b) <= window; });
}

}  // namespace

ExponentPathReport exponent_path_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  const Regime regime = classify_regime(cfg.psi, cfg.c1, cfg.c2);
  if (regime == Regime::Boundary) throw std::invalid_argument("no exponent path on the boundary");
  const bool sub = regime == Regime::SubCritical;
  const auto times = analytics::scenario_times(cfg.psi, cfg.c1, cfg.c2, cfg.rho);
  const std::size_t ai = cfg.alphas.size() - 1;
  const double alpha = cfg.alphas[ai];
  const ModelParams p = cfg.params_at(alpha);

  ExponentPathReport rep;
  rep.alpha = alpha;
  rep.branch = sub ? analytics::Branch::Fixation3 : analytics::Branch::SuperB;
  rep.tau_grid = cfg.tau_grid.empty() ? default_tau_grid(rep.branch, times) : cfg.tau_grid;

  const double scale = std::log(alpha) / alpha;
  jumpsim::RunOptions opt;
  opt.record = jumpsim::RecordMode::Grid;
  for (double tau : rep.tau_grid) opt.sample_times.push_back(tau * scale);
  opt.t_max = std::max(jumpsim::default_t_max(p) * cfg.t_max_factor, opt.sample_times.back());

  using Path = std::optional<std::vector<ExponentSample>>;
  const auto paths = run_replicates<Path>(
      cfg.seed, cfg.stream_base(ai), cfg.replicates_at(ai),
      [&](RngStream& rng, std::int64_t) -> Path {
        const jumpsim::LRun run = jumpsim::simulate_L(p, rng, opt);
        const JumpState& f = run.trajectory.final_state;
        const bool match = sub ? run.status == AbsorptionStatus::Fixation3 && !run.provisional
                               : run.status == AbsorptionStatus::Failure && f[1] == 0 && f[2] > 0;
        if (!match) return std::nullopt;
        return extract_exponent_path(run.trajectory, alpha, rep.tau_grid);
      },
      cfg.threads);

  rep.runs = static_cast<std::int64_t>(paths.size());
  std::vector<const std::vector<ExponentSample>*> kept;
  for (const auto& pth : paths) {
    if (pth) kept.push_back(&*pth);
  }
  rep.matching_runs = static_cast<std::int64_t>(kept.size());
  if (kept.empty()) return rep;

  const auto bps = analytics::breakpoints(rep.branch, times);
  for (std::size_t g = 0; g < rep.tau_grid.size(); ++g) {
    ExponentSample med;
    med.tau = rep.tau_grid[g];
    for (std::size_t i = 0; i < kNumTypes; ++i) {
      std::vector<Exponent> col;
      col.reserve(kept.size());
      for (const auto* k : kept) col.push_back((*k)[g].q[i]);
      med.q[i] = median_exponent(std::move(col));
    }
    rep.median_path.push_back(med);

    const auto pt = analytics::exponent_path(rep.branch, times, med.tau);
    const bool excluded =
        pt.excluded || near_breakpoint(med.tau, bps, cfg.tolerance.breakpoint_window);
    if (!pt.values) continue;
    std::vector<std::pair<int, Exponent>> claims;
    if (pt.values->q1) claims.emplace_back(1, *pt.values->q1);
    claims.emplace_back(2, pt.values->q2);
    claims.emplace_back(3, pt.values->q3);
    for (const auto& [type, theory] : claims) {
      ExponentComparison c;
      c.tau = med.tau;
      c.type = type;
      c.theory = theory;
      c.empirical = med.q[static_cast<std::size_t>(type)];
      c.excluded = excluded;
      if (theory.is_neg_inf() || c.empirical.is_neg_inf()) {
        c.within = theory.is_neg_inf() && c.empirical.is_neg_inf();
      } else {
        const double d = std::abs(theory.value() - c.empirical.value());
        c.within = d <= cfg.tolerance.exponent_band;
        if (!excluded) rep.max_deviation = std::max(rep.max_deviation, d);
      }
      if (!excluded) {
        ++rep.checked;
        if (c.within) ++rep.within;
      }
      rep.comparisons.push_back(c);
    }
  }

  if (!sub) {
    std::vector<double> xs;
    std::vector<double> ys;
    const double w = cfg.tolerance.breakpoint_window;
    for (const auto& m : rep.median_path) {
      if (m.tau > times.sigma1 + w && m.tau < times.sigma2 - w && !m.q[1].is_neg_inf()) {
        xs.push_back(m.tau);
        ys.push_back(m.q[1].value());
      }
    }
    if (xs.size() >= 3) rep.decreasing_spearman = stats::spearman(xs, ys);
  }
  return rep;
}

nlohmann::json to_json(const ExponentPathReport& r) {
  nlohmann::json med = nlohmann::json::array();
  for (const auto& m : r.median_path) {
    nlohmann::json q = nlohmann::json::array();
    for (const auto& e : m.q) q.push_back(e.to_string());
    med.push_back({{"tau", m.tau}, {"exponents", q}});
  }
  nlohmann::json cmp = nlohmann::json::array();
  for (const auto& c : r.comparisons) {
    cmp.push_back({{"tau", c.tau},
                   {"type", c.type},
                   {"empirical", c.empirical.to_string()},
                   {"theory", c.theory.to_string()},
                   {"excluded", c.excluded},
                   {"within", c.within}});
  }
  nlohmann::json j{{"schema", kSchemaVersion},
                   {"alpha", r.alpha},
                   {"branch", analytics::to_string(r.branch)},
                   {"runs", r.runs},
                   {"matching_runs", r.matching_runs},
                   {"checked", r.checked},
                   {"within", r.within},
                   {"max_deviation", r.max_deviation},
                   {"median_path", med},
                   {"comparisons", cmp}};
  if (r.decreasing_spearman) j["decreasing_spearman"] = *r.decreasing_spearman;
  return j;
}

std::string exponent_plot_csv(const analytics::ScenarioTimes& times, analytics::Branch branch,
                              const std::vector<double>& tau_grid,
                              const ExponentPathReport* empirical) {
  const std::string bname(analytics::to_string(branch));
  const auto bps = analytics::breakpoints(branch, times);
  std::vector<double> taus = tau_grid;
  taus.insert(taus.end(), bps.begin(), bps.end());
  std::sort(taus.begin(), taus.end());
  taus.erase(std::unique(taus.begin(), taus.end()), taus.end());

  std::string out = "tau,series,value,branch,alpha\n";
  const bool sub = analytics::is_subcritical_branch(branch);
  for (std::size_t k = 0; k < bps.size(); ++k) {
    const std::string label = (sub ? "tau" : "sigma") + std::to_string(k + 1);
    out += fmt(bps[k]) + ",breakpoint," + label + "," + bname + ",inf\n";
  }
  for (double tau : taus) {
    const auto pt = analytics::exponent_path(branch, times, tau);
    if (!pt.values) continue;
    if (pt.values->q1) out += fmt(tau) + ",theory_type1," + fmt(*pt.values->q1) + "," + bname + ",inf\n";
    out += fmt(tau) + ",theory_type2," + fmt(pt.values->q2) + "," + bname + ",inf\n";
    out += fmt(tau) + ",theory_type3," + fmt(pt.values->q3) + "," + bname + ",inf\n";
  }
  if (empirical != nullptr) {
    if (empirical->branch != branch) throw std::invalid_argument("empirical series has another branch");
    for (const auto& m : empirical->median_path) {
      for (int i = 0; i < kNumTypes; ++i) {
        out += fmt(m.tau) + ",empirical_type" + std::to_string(i) + "," +
               fmt(m.q[static_cast<std::size_t>(i)]) + "," + bname + "," + fmt(empirical->alpha) +
               "\n";
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Cross-module oracle experiments.

namespace {

ComparisonResult bernoulli_against(std::int64_t successes, std::int64_t n, double target) {
  ComparisonResult c;
  c.replicates = n;
  c.empirical = static_cast<double>(successes) / static_cast<double>(n);
  c.standard_error = std::sqrt(c.empirical * (1.0 - c.empirical) / static_cast<double>(n));
  c.target = target;
  const double diff = std::abs(c.empirical - target);
  c.z = c.standard_error > 0.0 ? diff / c.standard_error : (diff == 0.0 ? 0.0 : INFINITY);
  c.passed = c.z <= 3.0;
  return c;
}

std::int64_t count_true(const std::vector<char>& v) {
  return std::count(v.begin(), v.end(), char{1});
}

}  // namespace

ComparisonResult survival_ssa_experiment(double c1, double c2, double rho, std::int64_t replicates,
                                    std::uint64_t seed, double gamma_scale) {
  const double T = bd::logistic_window(c1, c2, rho * gamma_scale);
  const auto sched = bd::logistic_schedule(bd::LogisticDrive{c1, c2, 0.5}, rho, gamma_scale, T);
  const auto hits = run_replicates<char>(seed, 0, replicates, [&](RngStream& rng, std::int64_t) {
    return static_cast<char>(bd::simulate_immigration_branching(sched, 1.0, rng).survived);
  });
  auto c = bernoulli_against(count_true(hits), replicates, bd::immigration_survival(c1, c2, rho * gamma_scale));
  c.extra = {{"window", T}, {"quadrature", bd::immigration_survival_quadrature(c1, c2, rho, gamma_scale)}};
  return c;
}

ComparisonResult v_process_experiment(double c1, double c2, double rho, double epsilon,
                                      std::int64_t replicates, std::uint64_t seed) {
  const ModelParams p = make_params(1000.0, c1, c2, rho, 0.5 * c1 / c2);
  const jumpsim::VDrive drive(p, epsilon);
  const auto hits = run_replicates<char>(seed, 0, replicates, [&](RngStream& rng, std::int64_t) {
    return static_cast<char>(jumpsim::simulate_V(drive, rng).survived);
  });
  const std::int64_t s = count_true(hits);
  auto c = bernoulli_against(s, replicates, bd::immigration_survival(c1, c2, 2.0 * rho));
  const double truncated = bd::logistic_survival_from(c1, c2, rho, 2.0, epsilon);
  const auto t = bernoulli_against(s, replicates, truncated);
  c.extra = {{"started_at_epsilon", truncated}, {"z_started_at_epsilon", t.z}};
  return c;
}

DualityResult duality_experiment(double alpha, double c1, double c2, double rho,
                                 const SimplexState& x, double tau, std::int64_t sde_paths,
                                 std::int64_t asrg_replicates, double dt, std::uint64_t seed) {
  const ModelParams p = make_params(alpha, c1, c2, rho, 0.5 * c1 / c2);
  DualityResult out;
  out.alpha = alpha;
  out.tau = tau;

  diffusion::SdeConfig cfg;
  cfg.dt = dt;
  cfg.t_max = tau;
  using Row = std::array<double, 4>;
  const auto ends = run_replicates<Row>(seed, 0, sde_paths, [&](RngStream& rng, std::int64_t) {
    const auto run = diffusion::simulate_sde(x, p, cfg, rng);
    Row r{};
    if (run.fixed) {
      r[static_cast<std::size_t>(*run.fixed)] = 1.0;
    } else {
      r = run.final_state.x;
    }
    return r;
  });
  for (std::size_t j = 0; j < 4; ++j) {
    std::vector<double> col;
    col.reserve(ends.size());
    for (const auto& r : ends) col.push_back(r[j]);
    const auto s = stats::summarize(col);
    out.sde_mean[j] = s.mean;
    out.sde_se[j] = s.standard_error;
  }

  // ASRG replicates in fixed-size chunks, each on its own stream.
  constexpr std::int64_t kChunk = 1000;
  const std::int64_t chunks = (asrg_replicates + kChunk - 1) / kChunk;
  using Counts = std::array<std::int64_t, 4>;
  const auto parts = run_replicates<Counts>(
      seed, static_cast<std::uint64_t>(sde_paths), chunks, [&](RngStream& rng, std::int64_t i) {
        const std::int64_t n = std::min(kChunk, asrg_replicates - i * kChunk);
        return asrg::duality_type_counts(x, tau, p, n, rng);
      });
  Counts total{};
  for (const auto& c : parts) {
    for (std::size_t j = 0; j < 4; ++j) total[j] += c[j];
  }
  const double n = static_cast<double>(asrg_replicates);
  for (std::size_t j = 0; j < 4; ++j) {
    const double m = static_cast<double>(total[j]) / n;
    out.asrg_mean[j] = m;
    out.asrg_se[j] = std::sqrt(m * (1.0 - m) / n);
    const double se = std::hypot(out.sde_se[j], out.asrg_se[j]);
    const double d = std::abs(out.sde_mean[j] - m);
    out.max_z = std::max(out.max_z, se > 0.0 ? d / se : (d == 0.0 ? 0.0 : INFINITY));
  }
  out.passed = out.max_z <= 3.0;
  return out;
}

PiEquilibriumResult pi_equilibrium_experiment(double alpha, double rho, std::int64_t samples,
                                              std::uint64_t seed) {
  RngStream rng(seed, 0);
  const double b = alpha + rho;
  const std::int64_t start = asrg::sample_pi(alpha, rho, rng);
  // Relaxation near the mean takes about 1/b; space readings accordingly.
  const double spacing = 1.0 / b;
  const auto st = asrg::line_count_statistics(start, alpha, rho, 20.0 / b, spacing, samples, rng);

  PiEquilibriumResult out;
  out.samples = st.samples;
  std::vector<double> emp(st.sampled.size(), 0.0);
  std::vector<double> theo(st.sampled.size(), 0.0);
  for (std::size_t k = 0; k < st.sampled.size(); ++k) {
    emp[k] = static_cast<double>(st.sampled[k]) / static_cast<double>(st.samples);
    theo[k] = analytics::pi_equilibrium_pmf(alpha, rho, static_cast<std::int64_t>(k));
  }
  // Mass of the law beyond the observed range.
  double seen = 0.0;
  for (double v : theo) seen += v;
  out.tv = stats::total_variation(emp, theo) + 0.5 * std::max(0.0, 1.0 - seen);
  out.tv_passed = out.tv < 0.05;

  // Flux across each edge k <-> k+1, estimated from the two occupation times.
  for (std::size_t k = 1; k + 1 < st.occupation.size(); ++k) {
    const auto crossings = st.up[k];
    if (crossings < 100) continue;
    const double kk = static_cast<double>(k);
    const double up_flux = st.occupation[k] * b * kk;
    const double down_flux = st.occupation[k + 1] * 0.5 * (kk + 1.0) * kk;
    const double z = std::abs(up_flux - down_flux) / std::sqrt(2.0 * static_cast<double>(crossings));
    out.max_balance_z = std::max(out.max_balance_z, z);
    ++out.levels_checked;
  }
  out.balance_passed = out.levels_checked > 0 && out.max_balance_z <= 4.0;
  return out;
}

ComparisonResult branching_extinction_experiment(double lambda, double mu, double t,
                                                 std::int64_t replicates, std::uint64_t seed) {
  const auto bounds = bd::binary_branching_extinction_bounds(lambda, mu, t, 1.0);
  jumpsim::StopSpec stop;
  stop.t_max = t;
  // Beyond this size extinction before t is below 1e-12.
  stop.upper = static_cast<std::int64_t>(std::ceil(std::log(1e-12) / std::log(mu / lambda)));
  const auto hits = run_replicates<char>(seed, 0, replicates, [&](RngStream& rng, std::int64_t) {
    const auto run = jumpsim::simulate_birth_death(
        [&](std::int64_t k) { return lambda * static_cast<double>(k); },
        [&](std::int64_t k) { return mu * static_cast<double>(k); }, 1, rng, stop);
    return static_cast<char>(run.reason == jumpsim::BdStop::Extinct);
  });
  auto c = bernoulli_against(count_true(hits), replicates, mu / lambda);
  c.passed = std::abs(c.empirical - c.target) <= bounds.extinction + 3.0 * c.standard_error;
  c.extra = {{"envelope", bounds.extinction}};
  return c;
}

ComparisonResult occupation_experiment(double a, double b, std::int64_t k, std::int64_t ell,
                                       std::int64_t replicates, std::uint64_t seed) {
  if (!(a > b && b >= 0.0)) throw std::invalid_argument("need a > b >= 0");
  if (!(ell > k && k >= 1)) throw std::invalid_argument("need ell > k >= 1");
  jumpsim::StopSpec stop;
  stop.t_max = std::numeric_limits<double>::infinity();
  stop.upper = ell;
  const auto occ = run_replicates<double>(seed, 0, replicates, [&](RngStream& rng, std::int64_t) {
    return jumpsim::simulate_birth_death(
               [&](std::int64_t i) { return a * static_cast<double>(i); },
               [&](std::int64_t i) { return b * static_cast<double>(i); }, k, rng, stop)
        .occupation;
  });
  const auto s = stats::summarize(occ);
  ComparisonResult c;
  c.replicates = replicates;
  c.empirical = s.mean;
  c.standard_error = s.standard_error;
  c.target = static_cast<double>(ell - k) / (a - b);
  c.z = (s.mean - c.target) / s.standard_error;
  c.passed = s.mean <= c.target + 3.0 * s.standard_error;
  return c;
}

ComparisonResult subcritical_hitting_experiment(double c, double p, double z, double alpha,
                                                double band, std::int64_t replicates,
                                                std::uint64_t seed) {
  if (!(c > 0.0 && alpha > 1.0)) throw std::invalid_argument("need c > 0 and alpha > 1");
  const auto start = static_cast<std::int64_t>(std::llround(z * std::pow(alpha, p)));
  jumpsim::StopSpec stop;
  stop.t_max = std::numeric_limits<double>::infinity();
  const double scale = alpha / std::log(alpha);
  const auto times = run_replicates<double>(seed, 0, replicates, [&](RngStream& rng, std::int64_t) {
    return scale * jumpsim::simulate_birth_death(
                       [&](std::int64_t k) { return alpha * static_cast<double>(k); },
                       [&](std::int64_t k) { return alpha * (1.0 + c) * static_cast<double>(k); },
                       start, rng, stop)
                       .time;
  });
  const double target = p / c;
  const auto outside = std::count_if(times.begin(), times.end(),
                                     [&](double t) { return std::abs(t - target) > band; });
  ComparisonResult r;
  r.replicates = replicates;
  r.empirical = static_cast<double>(outside) / static_cast<double>(replicates);
  r.standard_error = std::sqrt(r.empirical * (1.0 - r.empirical) / static_cast<double>(replicates));
  r.target = target;
  r.passed = r.empirical < 0.05;
  r.extra = {{"median_rescaled_time", stats::quantile(times, 0.5)}, {"band", band}};
  return r;
}

ComparisonResult concentration_experiment(double alpha, std::int64_t replicates,
                                          std::uint64_t seed) {
  const ModelParams p = make_params(alpha, 0.4, 0.8, 1.0, 0.2);
  jumpsim::RunOptions opt;
  opt.record = jumpsim::RecordMode::Grid;
  const double window = std::log(alpha) / alpha;
  constexpr int kPoints = 50;
  for (int i = 0; i <= kPoints; ++i) opt.sample_times.push_back(window * i / kPoints);
  opt.t_max = window;
  using Tally = std::pair<std::int64_t, std::int64_t>;
  const auto tallies = run_replicates<Tally>(seed, 0, replicates, [&](RngStream& rng, std::int64_t) {
    const auto run = jumpsim::simulate_L(p, rng, opt);
    Tally t{0, 0};
    for (const auto& r : run.trajectory.records) {
      ++t.second;
      if (std::abs(static_cast<double>(r.state.total()) / alpha - 2.0) > 0.15) ++t.first;
    }
    return t;
  });
  std::int64_t bad = 0;
  std::int64_t all = 0;
  for (const auto& [b, n] : tallies) {
    bad += b;
    all += n;
  }
  ComparisonResult r;
  r.replicates = replicates;
  r.empirical = static_cast<double>(bad) / static_cast<double>(all);
  r.target = 0.0;
  r.passed = r.empirical < 0.01;
  r.extra = {{"points", all}};
  return r;
}

ComparisonResult one_locus_sde_experiment(double alpha1, double x, std::int64_t paths, double dt,
                                          std::uint64_t seed) {
  ModelParams p;
  p.alpha1 = alpha1;
  p.alpha2 = alpha1 + 1.0;
  p.alpha = alpha1 + 2.0;
  p.rho = 0.0;
  p.c1 = p.alpha1 / p.alpha;
  p.c2 = p.alpha2 / p.alpha;
  p.psi = 0.5 * p.c1 / p.c2;
  diffusion::SdeConfig cfg;
  cfg.dt = dt;
  cfg.t_max = 1000.0;
  const SimplexState x0 = make_simplex(1.0 - x, x, 0.0, 0.0);
  const auto hits = run_replicates<char>(seed, 0, paths, [&](RngStream& rng, std::int64_t) {
    const auto run = diffusion::simulate_sde(x0, p, cfg, rng);
    return static_cast<char>(run.fixed && *run.fixed == 1);
  });
  return bernoulli_against(count_true(hits), paths,
                           diffusion::one_locus_fixation_probability(alpha1, x));
}

ComparisonResult early_recombinant_experiment(double alpha, double c1, double c2, double rho,
                                              double psi, double epsilon,
                                              std::int64_t replicates, std::uint64_t seed) {
  const ModelParams p = make_params(alpha, c1, c2, rho, psi);
  jumpsim::RunOptions opt;
  opt.t_max = jumpsim::default_t_max(p);
  opt.thresholds = {{3, 1}, {2, static_cast<std::int64_t>(std::ceil(epsilon * alpha))}};
  opt.stop_at_first_threshold = true;
  const auto early = run_replicates<char>(seed, 0, replicates, [&](RngStream& rng, std::int64_t) {
    const auto run = jumpsim::simulate_L(p, rng, opt);
    const auto& st = run.trajectory.stopping_times;
    return static_cast<char>(st[0] && (!st[1] || *st[0] < *st[1]));
  });
  ComparisonResult r;
  r.replicates = replicates;
  r.empirical = static_cast<double>(count_true(early)) / static_cast<double>(replicates);
  r.standard_error = std::sqrt(r.empirical * (1.0 - r.empirical) / static_cast<double>(replicates));
  r.passed = r.empirical < 0.05;
  return r;
}

}  // namespace sweepsim::experiments
