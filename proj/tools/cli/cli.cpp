#include "cli.h"

#include <CLI11.hpp>

#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>

#include "sweepsim/asrg.h"
#include "sweepsim/birth_death.h"
#include "sweepsim/diffusion.h"
#include "sweepsim/json_io.h"
#include "sweepsim/jump_process.h"
#include "sweepsim/parallel.h"

namespace sweepsim::cli {

namespace {

class ValidationFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

nlohmann::json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError(path.string() + ": cannot open file");
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw SchemaError(path.string() + ": " + e.what());
  }
}

// Writes `content` to dir/name, or to `out` when no directory was given.
void emit(const CliConfig& cfg, std::ostream& out, const std::string& name,
          const std::string& content) {
  std::string text = content;
  if (text.empty() || text.back() != '\n') text += '\n';
  if (!cfg.output_dir) {
    out << text;
    return;
  }
  std::filesystem::create_directories(*cfg.output_dir);
  std::ofstream f(*cfg.output_dir / name, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + (*cfg.output_dir / name).string());
  f << text;
}

std::string csv_number(double v) {
  std::ostringstream os;
  os.imbue(std::locale::classic());
  os.precision(17);
  os << v;
  return os.str();
}

// ---------------------------------------------------------------------------

struct PredictArgs {
  double c1 = 0.4;
  double c2 = 0.8;
  double rho = 1.0;
  double psi = 0.2;
  bool plot = false;
};

nlohmann::json times_json(const analytics::ScenarioTimes& t) {
  return {{"tau1", t.tau1},     {"tau2", t.tau2},     {"tau3", t.tau3}, {"tau4", t.tau4},
          {"sigma1", t.sigma1}, {"sigma2", t.sigma2}, {"p", t.p}};
}

int cmd_predict(const CliConfig& cfg, PredictArgs a, std::ostream& out) {
  if (cfg.config_file) {
    const ModelParams p = params_from_json(read_json_file(*cfg.config_file));
    a.c1 = p.c1;
    a.c2 = p.c2;
    a.rho = p.rho;
    a.psi = p.psi;
  }
  const Regime regime = classify_regime(a.psi, a.c1, a.c2);
  if (regime == Regime::Boundary) {
    throw ValidationFailure("psi = c1/c2 lies on the regime boundary; no limit is stated there");
  }
  const auto times = analytics::scenario_times(a.psi, a.c1, a.c2, a.rho);
  nlohmann::json j{{"schema", kSchemaVersion},
                   {"params", {{"c1", a.c1}, {"c2", a.c2}, {"rho", a.rho}, {"psi", a.psi}}},
                   {"regime", to_string(regime)},
                   {"times", times_json(times)}};
  if (regime == Regime::SubCritical) {
    const auto b = analytics::fixation_probability_bounds(a.c1, a.c2, a.rho);
    j["limit"] = analytics::limiting_fixation_probability(a.c1, a.c2, a.rho);
    j["bounds"] = {b.lower, b.upper};
    j["integral_I"] = analytics::integral_I(a.c1, a.c2);
    j["fixation_time"] = analytics::limiting_fixation_time(a.psi, a.c1, a.c2);
    j["additive"] = {{"limit", analytics::additive_fixation_probability(a.c1, a.c2, a.rho)},
                     {"fixation_time", analytics::additive_fixation_time(a.psi, a.c1, a.c2)}};
    j["recombinant_survival"] = bd::immigration_survival(a.c1, a.c2, 2.0 * a.rho);
  } else {
    j["limit"] = analytics::limiting_fixation_probability_supercritical(a.psi, a.c1, a.c2).value;
  }
  emit(cfg, out, "predict.json", j.dump(2));
  if (a.plot) {
    std::vector<double> grid;
    const double end = (regime == Regime::SubCritical ? times.tau4 : times.sigma2) + 1.0;
    for (int k = 0; 0.05 * k <= end; ++k) grid.push_back(0.05 * k);
    for (const auto& [name, csv] : emit_plot_data(times, grid, nullptr, PlotKind::Theory)) {
      emit(cfg, out, name, csv);
    }
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------

struct SimulateArgs {
  std::string process = "L";
  double alpha = 1000.0;
  double rho = 1.0;
  double psi = 0.2;
  double c1 = 0.4;
  double c2 = 0.8;
  double c_init = 1.0;
  std::int64_t replicates = 100;
  std::uint64_t seed = 1;
  double tmax_factor = 1.0;
  std::string record = "none";
  std::vector<double> x{0.25, 0.25, 0.25, 0.25};
  double epsilon = 0.05;
  double lambda = 1.0;
  double mu = 0.5;
  std::int64_t initial = 1;
  double t = 10.0;
  std::vector<std::string> thresholds;
  int points = 200;
};

std::string trajectory_csv(const std::vector<jumpsim::EventRecord>& recs) {
  std::string s = "time,l0,l1,l2,l3\n";
  for (const auto& r : recs) {
    s += csv_number(r.time);
    for (int i = 0; i < kNumTypes; ++i) s += "," + std::to_string(r.state[i]);
    s += "\n";
  }
  return s;
}

std::vector<jumpsim::Threshold> parse_thresholds(const std::vector<std::string>& specs) {
  std::vector<jumpsim::Threshold> out;
  for (const auto& s : specs) {
    const auto colon = s.find(':');
    if (colon == std::string::npos) throw CLI::ValidationError("--threshold", "expected TYPE:LEVEL");
    try {
      const int type = std::stoi(s.substr(0, colon));
      const std::int64_t level = std::stoll(s.substr(colon + 1));
      if (type < 0 || type > 3 || level < 0) throw std::out_of_range("threshold");
      out.push_back({type, level});
    } catch (const std::logic_error&) {
      throw CLI::ValidationError("--threshold", "expected TYPE:LEVEL with TYPE in 0..3");
    }
  }
  return out;
}

int cmd_simulate(const CliConfig& cfg, SimulateArgs a, std::ostream& out) {
  if (cfg.seed_override) a.seed = *cfg.seed_override;
  ModelParams p = make_params(a.alpha, a.c1, a.c2, a.rho, a.psi, a.c_init);
  if (cfg.config_file) p = params_from_json(read_json_file(*cfg.config_file));
  if (a.replicates < 1) throw std::invalid_argument("replicates must be >= 1");
  const auto thresholds = parse_thresholds(a.thresholds);
  if (a.record != "none" && !cfg.output_dir) {
    throw std::invalid_argument("--record needs --out for the trajectory files");
  }

  std::vector<std::string> lines(static_cast<std::size_t>(a.replicates));
  std::vector<std::string> dumps;

  if (a.process == "L" || a.process == "Ltilde") {
    validate_params(p, false);
    const bool tilde = a.process == "Ltilde";
    SimplexState x;
    if (tilde) {
      if (a.x.size() != 4) throw std::invalid_argument("--x needs four frequencies");
      x = make_simplex(a.x[0], a.x[1], a.x[2], a.x[3]);
    }
    jumpsim::RunOptions opt;
    opt.t_max = jumpsim::default_t_max(p) * a.tmax_factor;
    opt.thresholds = thresholds;
    if (a.record == "events") {
      opt.record = jumpsim::RecordMode::Events;
    } else if (a.record == "downsampled") {
      opt.record = jumpsim::RecordMode::Grid;
      for (int i = 0; i <= a.points; ++i) opt.sample_times.push_back(opt.t_max * i / a.points);
    }
    struct Out {
      std::string line;
      std::string dump;
    };
    const double scale = p.alpha / std::log(p.alpha);
    auto res = run_replicates<Out>(a.seed, 0, a.replicates, [&](RngStream& rng, std::int64_t i) {
      jumpsim::LRun run;
      std::optional<int> fixed;
      if (tilde) {
        auto r = jumpsim::simulate_Ltilde(x, p, rng, opt);
        run = std::move(r.run);
        fixed = r.fixed_type;
      } else {
        run = jumpsim::simulate_L(p, rng, opt);
      }
      nlohmann::json st = nlohmann::json::array();
      for (const auto& s : run.trajectory.stopping_times) {
        st.push_back(s ? nlohmann::json(*s) : nlohmann::json(nullptr));
      }
      nlohmann::json j{{"replicate", i},
                       {"stream", rng.stream_id()},
                       {"time", run.time},
                       {"provisional", run.provisional},
                       {"budget_exceeded", run.budget_exceeded},
                       {"events", run.trajectory.events},
                       {"initial_state", run.trajectory.initial_state.l},
                       {"final_state", run.trajectory.final_state.l},
                       {"stopping_times", st}};
      if (tilde) {
        j["fixed_type"] = fixed ? nlohmann::json(*fixed) : nlohmann::json(nullptr);
      } else {
        j["status"] = jumpsim::to_string(run.status);
        j["rescaled_time"] = run.time * scale;
      }
      Out o{j.dump(), {}};
      if (opt.record != jumpsim::RecordMode::None) o.dump = trajectory_csv(run.trajectory.records);
      return o;
    });
    for (std::size_t i = 0; i < res.size(); ++i) {
      lines[i] = std::move(res[i].line);
      dumps.push_back(std::move(res[i].dump));
    }
  } else if (a.process == "V") {
    jumpsim::VOptions opt;
    opt.record_path = a.record != "none";
    const jumpsim::VDrive drive(p, a.epsilon, opt);
    struct Out {
      std::string line;
      std::string dump;
    };
    auto res = run_replicates<Out>(a.seed, 0, a.replicates, [&](RngStream& rng, std::int64_t i) {
      const auto run = jumpsim::simulate_V(drive, rng, opt);
      nlohmann::json j{{"replicate", i},          {"stream", rng.stream_id()},
                       {"survived", run.survived}, {"early_stop", run.early_stop},
                       {"final_v3", run.final_v3}, {"time", run.final_time}};
      Out o{j.dump(), {}};
      if (opt.record_path) {
        o.dump = "time,v1,v2,v3\n";
        for (const auto& pt : run.path) {
          o.dump += csv_number(pt.time) + "," + csv_number(pt.v1) + "," + csv_number(2.0 - pt.v1) +
                    "," + std::to_string(pt.v3) + "\n";
        }
      }
      return o;
    });
    for (std::size_t i = 0; i < res.size(); ++i) {
      lines[i] = std::move(res[i].line);
      dumps.push_back(std::move(res[i].dump));
    }
  } else if (a.process == "bd") {
    jumpsim::StopSpec stop;
    stop.t_max = a.t;
    if (!thresholds.empty()) stop.upper = thresholds.front().level;
    if (a.record == "downsampled") {
      for (int i = 0; i <= a.points; ++i) stop.sample_times.push_back(a.t * i / a.points);
    }
    const double lambda = a.lambda;
    const double mu = a.mu;
    struct Out {
      std::string line;
      std::string dump;
    };
    auto res = run_replicates<Out>(a.seed, 0, a.replicates, [&](RngStream& rng, std::int64_t i) {
      const auto run = jumpsim::simulate_birth_death(
          [&](std::int64_t k) { return lambda * static_cast<double>(k); },
          [&](std::int64_t k) { return mu * static_cast<double>(k); }, a.initial, rng, stop);
      nlohmann::json j{{"replicate", i},
                       {"stream", rng.stream_id()},
                       {"status", jumpsim::to_string(run.reason)},
                       {"time", run.time},
                       {"final_count", run.final_count},
                       {"occupation", run.occupation},
                       {"events", run.events}};
      Out o{j.dump(), {}};
      if (!stop.sample_times.empty()) {
        o.dump = "time,count\n";
        for (std::size_t k = 0; k < run.samples.size(); ++k) {
          o.dump += csv_number(stop.sample_times[k]) + "," + std::to_string(run.samples[k]) + "\n";
        }
      }
      return o;
    });
    for (std::size_t i = 0; i < res.size(); ++i) {
      lines[i] = std::move(res[i].line);
      dumps.push_back(std::move(res[i].dump));
    }
  } else {
    throw CLI::ValidationError("--process", "must be one of L, Ltilde, V, bd");
  }

  std::string jsonl;
  for (const auto& l : lines) jsonl += l + "\n";
  emit(cfg, out, "simulate_" + a.process + ".jsonl", jsonl);
  for (std::size_t i = 0; i < dumps.size(); ++i) {
    if (!dumps[i].empty()) emit(cfg, out, "trajectory_" + std::to_string(i) + ".csv", dumps[i]);
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------

struct SdeArgs {
  double alpha = 10.0;
  // Unset: 0.4 alpha and 0.8 alpha.
  std::optional<double> a1;
  std::optional<double> a2;
  double rho = 1.0;
  double psi = 0.2;
  double delta = 0.01;
  std::vector<double> x;
  double dt = 0.0;
  double tmax = 10.0;
  std::int64_t replicates = 100;
  std::uint64_t seed = 1;
  int points = 0;
};

int cmd_sde(const CliConfig& cfg, SdeArgs a, std::ostream& out) {
  if (cfg.seed_override) a.seed = *cfg.seed_override;
  ModelParams p;
  p.alpha = a.alpha;
  p.alpha1 = a.a1.value_or(0.4 * a.alpha);
  p.alpha2 = a.a2.value_or(0.8 * a.alpha);
  p.rho = a.rho;
  p.psi = a.psi;
  p.c1 = p.alpha1 / a.alpha;
  p.c2 = p.alpha2 / a.alpha;
  if (cfg.config_file) p = params_from_json(read_json_file(*cfg.config_file));
  validate_params(p, false);
  const SimplexState x0 = a.x.empty() ? derive_initial_frequencies(p, a.delta)
                          : a.x.size() == 4
                              ? make_simplex(a.x[0], a.x[1], a.x[2], a.x[3])
                              : throw std::invalid_argument("--x needs four frequencies");
  diffusion::SdeConfig sc;
  sc.dt = a.dt;
  sc.t_max = a.tmax;
  if (a.points > 0) {
    for (int i = 0; i <= a.points; ++i) sc.sample_times.push_back(a.tmax * i / a.points);
  }
  struct Out {
    std::string line;
    std::string dump;
  };
  auto res = run_replicates<Out>(a.seed, 0, a.replicates, [&](RngStream& rng, std::int64_t i) {
    const auto run = diffusion::simulate_sde(x0, p, sc, rng);
    nlohmann::json j{{"replicate", i},
                     {"stream", rng.stream_id()},
                     {"fixed_type", run.fixed ? nlohmann::json(*run.fixed) : nlohmann::json(nullptr)},
                     {"time", run.time},
                     {"final_state", simplex_to_json(run.final_state)},
                     {"steps", run.steps}};
    Out o{j.dump(), {}};
    if (!sc.sample_times.empty()) {
      o.dump = "time,x0,x1,x2,x3\n";
      for (std::size_t k = 0; k < run.samples.size(); ++k) {
        o.dump += csv_number(sc.sample_times[k]);
        for (int t = 0; t < 4; ++t) o.dump += "," + csv_number(run.samples[k][t]);
        o.dump += "\n";
      }
    }
    return o;
  });
  std::string jsonl;
  for (const auto& r : res) jsonl += r.line + "\n";
  emit(cfg, out, "sde.jsonl", jsonl);
  if (a.points > 0) {
    if (!cfg.output_dir) throw std::invalid_argument("--points needs --out for the trajectory files");
    for (std::size_t i = 0; i < res.size(); ++i) {
      emit(cfg, out, "sde_path_" + std::to_string(i) + ".csv", res[i].dump);
    }
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------

struct AsrgArgs {
  std::int64_t k = 1;
  double tau = 0.5;
  double alpha = 5.0;
  double rho = 1.0;
  std::optional<double> a1;
  std::optional<double> a2;
  std::vector<double> x{0.25, 0.25, 0.25, 0.25};
  std::int64_t replicates = 1000;
  std::uint64_t seed = 1;
  std::string events_log;
};

nlohmann::json event_json(const asrg::AsrgEvent& e) {
  nlohmann::json j{{"beta", e.beta}};
  if (e.kind == asrg::EventKind::Coalescence) {
    j["kind"] = "coalescence";
    j["lower"] = {e.lower[0], e.lower[1]};
    j["merged"] = e.upper[0];
  } else {
    j["kind"] = "branching";
    j["label"] = asrg::to_string(e.label);
    j["branching"] = e.lower[0];
    if (e.label == asrg::Label::Recomb) {
      j["roles"] = {{"A_line", e.upper[0]}, {"B_line", e.upper[1]}};
    } else {
      j["roles"] = {{"incoming", e.upper[0]}, {"continuing", e.upper[1]}};
    }
  }
  return j;
}

int cmd_asrg(const CliConfig& cfg, AsrgArgs a, std::ostream& out) {
  if (cfg.seed_override) a.seed = *cfg.seed_override;
  if (a.k < 1) throw std::invalid_argument("--k must be >= 1");
  if (a.x.size() != 4) throw std::invalid_argument("--x needs four frequencies");
  ModelParams p;
  p.alpha = a.alpha;
  p.alpha1 = a.a1.value_or(0.4 * a.alpha);
  p.alpha2 = a.a2.value_or(0.8 * a.alpha);
  p.rho = a.rho;
  p.c1 = p.alpha1 / a.alpha;
  p.c2 = p.alpha2 / a.alpha;
  p.psi = 0.5 * p.c1 / p.c2;
  validate_params(p, false);
  const SimplexState x = make_simplex(a.x[0], a.x[1], a.x[2], a.x[3]);

  struct Rep {
    std::vector<int> types;
    std::int64_t top = 0;
    std::int64_t events = 0;
  };
  const auto reps = run_replicates<Rep>(a.seed, 0, a.replicates, [&](RngStream& rng, std::int64_t) {
    const auto g = asrg::build_asrg(a.k, p, a.tau, rng);
    std::vector<int> top(g.top.size());
    for (auto& t : top) {
      const double u = rng.uniform();
      double acc = 0.0;
      t = 3;
      for (int i = 0; i < 4; ++i) {
        acc += x[i];
        if (u < acc) {
          t = i;
          break;
        }
      }
    }
    return Rep{asrg::propagate_types(g, top), static_cast<std::int64_t>(g.top.size()),
               static_cast<std::int64_t>(g.events.size())};
  });
  std::vector<std::array<std::int64_t, 4>> counts(static_cast<std::size_t>(a.k));
  std::int64_t monotype = 0;
  double top_sum = 0.0;
  double ev_sum = 0.0;
  for (const auto& r : reps) {
    for (std::size_t j = 0; j < r.types.size(); ++j) {
      ++counts[j][static_cast<std::size_t>(r.types[j])];
    }
    if (std::all_of(r.types.begin(), r.types.end(), [&](int t) { return t == r.types[0]; })) {
      ++monotype;
    }
    top_sum += static_cast<double>(r.top);
    ev_sum += static_cast<double>(r.events);
  }
  const double n = static_cast<double>(a.replicates);
  nlohmann::json freq = nlohmann::json::array();
  for (const auto& c : counts) {
    freq.push_back({c[0] / n, c[1] / n, c[2] / n, c[3] / n});
  }
  nlohmann::json j{{"schema", kSchemaVersion},
                   {"k", a.k},
                   {"tau", a.tau},
                   {"alpha", a.alpha},
                   {"alpha1", p.alpha1},
                   {"alpha2", p.alpha2},
                   {"rho", a.rho},
                   {"x", simplex_to_json(x)},
                   {"replicates", a.replicates},
                   {"seed", a.seed},
                   {"sample_type_frequencies", freq},
                   {"monotype_fraction", static_cast<double>(monotype) / n},
                   {"mean_top_lines", top_sum / n},
                   {"mean_events", ev_sum / n},
                   {"label_probabilities", asrg::label_probabilities(p)}};
  emit(cfg, out, "asrg.json", j.dump(2));
  if (!a.events_log.empty()) {
    RngStream rng(a.seed, 0);
    const auto g = asrg::build_asrg(a.k, p, a.tau, rng);
    std::string log;
    for (const auto& e : g.events) log += event_json(e).dump() + "\n";
    std::ofstream f(a.events_log, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + a.events_log);
    f << log;
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------

struct BdArgs {
  std::string schedule = "constant";
  double lambda = 2.0;
  double mu = 1.0;
  double gamma = 0.0;
  double t = 1.0;
  double z = 0.0;
  std::int64_t ell = 1;
  double c1 = 0.4;
  double c2 = 0.8;
  double rho = 1.0;
  double gamma_scale = 1.0;
};

int cmd_bd(const CliConfig& cfg, const BdArgs& a, std::ostream& out) {
  nlohmann::json j{{"schema", kSchemaVersion}, {"schedule", a.schedule}};
  if (a.schedule == "constant") {
    const auto s = bd::constant_schedule(a.lambda, a.mu, a.gamma);
    j["lambda"] = a.lambda;
    j["mu"] = a.mu;
    j["gamma"] = a.gamma;
    j["t"] = a.t;
    j["z"] = a.z;
    j["ell"] = a.ell;
    j["generating_function"] = bd::kendall_generating_function(s, a.ell, a.t, a.z);
    j["zero_probability_empty_start"] = bd::extinction_probability(s, a.t);
  } else if (a.schedule == "logistic") {
    const double T = bd::logistic_window(a.c1, a.c2, a.rho * a.gamma_scale);
    const auto s = bd::logistic_schedule(bd::LogisticDrive{a.c1, a.c2, 0.5}, a.rho, a.gamma_scale, T);
    j["c1"] = a.c1;
    j["c2"] = a.c2;
    j["rho"] = a.rho;
    j["gamma_scale"] = a.gamma_scale;
    j["window"] = {-T, T};
    j["extinction_probability"] = bd::extinction_probability(s, T);
    j["survival_quadrature"] = 1.0 - j["extinction_probability"].get<double>();
    j["survival_closed_form"] = bd::immigration_survival(a.c1, a.c2, a.rho * a.gamma_scale);
    j["generating_function"] = bd::kendall_generating_function(s, a.ell, T, a.z);
    j["ell"] = a.ell;
    j["z"] = a.z;
  } else {
    throw CLI::ValidationError("--schedule", "must be constant or logistic");
  }
  emit(cfg, out, "bd.json", j.dump(2));
  return kExitOk;
}

// ---------------------------------------------------------------------------

int cmd_sweep(const CliConfig& cfg, std::ostream& out, std::ostream& err) {
  if (!cfg.config_file) throw CLI::ValidationError("sweep", "--config is required");
  auto ec = experiments::config_from_json(read_json_file(*cfg.config_file));
  if (cfg.seed_override) ec.seed = *cfg.seed_override;
  ec.validate();
  if (cfg.verbosity > 0) {
    err << "sweep " << experiments::to_string(ec.kind) << " over " << ec.alphas.size()
        << " alpha values, hash " << experiments::config_hash(ec) << "\n";
  }
  if (ec.kind == experiments::ExperimentKind::ExponentPath) {
    const auto rep = experiments::exponent_path_experiment(ec);
    nlohmann::json j = experiments::to_json(rep);
    j["config"] = experiments::config_to_json(ec);
    j["config_hash"] = experiments::config_hash(ec);
    j["seed"] = ec.seed;
    const std::size_t last = ec.alphas.size() - 1;
    j["stream_range"] = {ec.stream_base(last), ec.stream_base(last + 1) - 1};
    emit(cfg, out, "report.json", j.dump(2));
    const auto times = analytics::scenario_times(ec.psi, ec.c1, ec.c2, ec.rho);
    if (rep.matching_runs > 0) {
      for (const auto& [name, csv] : emit_plot_data(times, rep.tau_grid, &rep, PlotKind::Empirical)) {
        emit(cfg, out, name, csv);
      }
    }
    const bool pass = rep.checked > 0 && rep.within == rep.checked;
    return pass ? kExitOk : kExitValidation;
  }
  const auto rep = ec.kind == experiments::ExperimentKind::FixationProbability
                       ? experiments::estimate_fixation_probability(ec)
                       : experiments::estimate_conditional_fixation_time(ec);
  emit(cfg, out, "report.json", experiments::to_json(rep).dump(2));
  emit(cfg, out, "estimates.csv", experiments::to_csv(rep));
  std::string jsonl;
  for (const auto& r : rep.replicates) jsonl += experiments::to_json(r).dump() + "\n";
  emit(cfg, out, "replicates.jsonl", jsonl);
  return rep.hard_band_pass ? kExitOk : kExitValidation;
}

int cmd_validate(const CliConfig& cfg, bool quick, std::ostream& out) {
  if (cfg.config_file) {
    const auto j = read_json_file(*cfg.config_file);
    // Either an experiment configuration or a bare parameter set.
    if (j.is_object() && j.contains("alpha1")) {
      const auto v = validate_params(params_from_json(j), false);
      emit(cfg, out, "validate_config.json",
           nlohmann::json{{"schema", kSchemaVersion}, {"regime", to_string(v.regime)},
                          {"warnings", v.warnings}}
               .dump(2));
    } else {
      auto ec = experiments::config_from_json(j);
      if (cfg.seed_override) ec.seed = *cfg.seed_override;
      ec.validate();
      emit(cfg, out, "validate_config.json",
           nlohmann::json{{"schema", kSchemaVersion}, {"config_hash", experiments::config_hash(ec)}}
               .dump(2));
    }
  }
  experiments::OracleSuiteConfig oc;
  oc.quick = quick;
  if (cfg.seed_override) oc.seed = *cfg.seed_override;
  const auto rep = experiments::run_oracle_suite(oc);
  emit(cfg, out, "validate.json", experiments::to_json(rep).dump(2));
  return rep.all_passed ? kExitOk : kExitValidation;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Simulation and limit formulas for competing linked sweeps", "sweepsim"};
  app.require_subcommand(1, 1);
  CliConfig cfg;
  std::string config_file;
  std::uint64_t seed = 0;
  std::string out_dir;
  auto* seed_opt = app.add_option("--seed", seed, "Seed override (wins over the config file)");
  app.add_option("--config", config_file, "Configuration or parameter JSON file");
  app.add_option("--out", out_dir, "Output directory (default: standard output)");
  app.add_flag("-v,--verbose", cfg.verbosity, "Verbosity");
  app.fallthrough();

  PredictArgs pa;
  auto* predict = app.add_subcommand("predict", "Limit formulas for a parameter set");
  predict->add_option("--c1", pa.c1);
  predict->add_option("--c2", pa.c2);
  predict->add_option("--rho", pa.rho);
  predict->add_option("--psi", pa.psi);
  predict->add_flag("--plot", pa.plot, "Also emit theoretical exponent-path CSV tables");

  SimulateArgs sa;
  auto* simulate = app.add_subcommand("simulate", "Exact simulation of the jump processes");
  simulate->add_option("--process", sa.process)->check(CLI::IsMember({"L", "Ltilde", "V", "bd"}));
  simulate->add_option("--alpha", sa.alpha);
  simulate->add_option("--rho", sa.rho);
  simulate->add_option("--psi", sa.psi);
  simulate->add_option("--c1", sa.c1);
  simulate->add_option("--c2", sa.c2);
  simulate->add_option("--c-init", sa.c_init);
  simulate->add_option("--replicates", sa.replicates);
  simulate->add_option("--tmax-factor", sa.tmax_factor);
  simulate->add_option("--record", sa.record)->check(CLI::IsMember({"none", "events", "downsampled"}));
  simulate->add_option("--points", sa.points, "Grid points for downsampled records");
  simulate->add_option("--x", sa.x, "Initial frequencies for Ltilde")->expected(4);
  simulate->add_option("--epsilon", sa.epsilon, "Start of the rescaled process");
  simulate->add_option("--lambda", sa.lambda, "bd: per-individual birth rate");
  simulate->add_option("--mu", sa.mu, "bd: per-individual death rate");
  simulate->add_option("--initial", sa.initial, "bd: initial count");
  simulate->add_option("--t", sa.t, "bd: time horizon");
  simulate->add_option("--threshold", sa.thresholds, "Stopping time TYPE:LEVEL (repeatable)");

  SdeArgs da;
  auto* sde = app.add_subcommand("sde", "Euler-Maruyama paths of the frequency diffusion");
  sde->add_option("--alpha", da.alpha);
  sde->add_option("--a1", da.a1);
  sde->add_option("--a2", da.a2);
  sde->add_option("--rho", da.rho);
  sde->add_option("--psi", da.psi);
  sde->add_option("--delta", da.delta);
  sde->add_option("--x", da.x, "Initial frequencies (overrides --delta)")->expected(4);
  sde->add_option("--dt", da.dt);
  sde->add_option("--tmax", da.tmax);
  sde->add_option("--replicates", da.replicates);
  sde->add_option("--points", da.points, "Downsampled trajectory points per path");

  AsrgArgs ga;
  auto* asrg_cmd = app.add_subcommand("asrg", "Ancestral graph sampling and type propagation");
  asrg_cmd->add_option("--k", ga.k);
  asrg_cmd->add_option("--tau", ga.tau);
  asrg_cmd->add_option("--alpha", ga.alpha);
  asrg_cmd->add_option("--rho", ga.rho);
  asrg_cmd->add_option("--a1", ga.a1);
  asrg_cmd->add_option("--a2", ga.a2);
  asrg_cmd->add_option("--x", ga.x)->expected(4);
  asrg_cmd->add_option("--replicates", ga.replicates);
  asrg_cmd->add_option("--events-log", ga.events_log, "JSONL dump of one graph");

  BdArgs ba;
  auto* bd_cmd = app.add_subcommand("bd", "Generating function of a linear birth-death process");
  bd_cmd->add_option("--schedule", ba.schedule)->check(CLI::IsMember({"constant", "logistic"}));
  bd_cmd->add_option("--lambda", ba.lambda);
  bd_cmd->add_option("--mu", ba.mu);
  bd_cmd->add_option("--gamma", ba.gamma);
  bd_cmd->add_option("--t", ba.t);
  bd_cmd->add_option("--z", ba.z);
  bd_cmd->add_option("--ell", ba.ell);
  bd_cmd->add_option("--c1", ba.c1);
  bd_cmd->add_option("--c2", ba.c2);
  bd_cmd->add_option("--rho", ba.rho);
  bd_cmd->add_option("--gamma-scale", ba.gamma_scale);

  auto* sweep = app.add_subcommand("sweep", "Monte Carlo experiment from a config file");

  bool quick = false;
  auto* validate = app.add_subcommand("validate", "Oracle checks, optionally of a config file");
  validate->add_flag("--quick", quick, "Only the exact, fast checks");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, err, err);
    err << app.help();
    return kExitUsage;
  }

  if (*seed_opt) cfg.seed_override = seed;
  if (!config_file.empty()) cfg.config_file = config_file;
  if (!out_dir.empty()) cfg.output_dir = out_dir;

  try {
    if (*predict) return cmd_predict(cfg, pa, out);
    if (*simulate) {
      cfg.subcommand = "simulate";
      return cmd_simulate(cfg, sa, out);
    }
    if (*sde) return cmd_sde(cfg, da, out);
    if (*asrg_cmd) return cmd_asrg(cfg, ga, out);
    if (*bd_cmd) return cmd_bd(cfg, ba, out);
    if (*sweep) return cmd_sweep(cfg, out, err);
    if (*validate) return cmd_validate(cfg, quick, out);
  } catch (const CLI::ValidationError& e) {
    err << "error: " << e.what() << "\n" << app.help();
    return kExitUsage;
  } catch (const SchemaError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const ValidationFailure& e) {
    err << "validation failed: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitValidation;
  }
  return kExitUsage;
}

}  // namespace sweepsim::cli
