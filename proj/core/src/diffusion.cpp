#include "sweepsim/diffusion.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace sweepsim::diffusion {

void validate(const SdeConfig& cfg) {
  if (!(cfg.dt >= 0.0)) throw std::invalid_argument("dt must be >= 0");
  if (!(cfg.t_max > 0.0)) throw std::invalid_argument("t_max must be positive");
  if (!(cfg.eta > 0.0 && cfg.eta < 1e-2)) throw std::invalid_argument("eta must be in (0, 0.01)");
  if (cfg.max_halvings < 0) throw std::invalid_argument("max_halvings must be >= 0");
  if (!std::is_sorted(cfg.sample_times.begin(), cfg.sample_times.end())) {
    throw std::invalid_argument("sample times must be ascending");
  }
}

double effective_dt(const SdeConfig& cfg, const ModelParams& p) {
  return cfg.dt > 0.0 ? cfg.dt : 1e-4 / (1.0 + p.alpha);
}

std::array<double, kNumTypes> drift(const SimplexState& x, const ModelParams& p) {
  double mean = 0.0;
  for (int j = 0; j < kNumTypes; ++j) mean += p.selection(j) * x[j];
  const double r = p.rho * (x[1] * x[2] - x[0] * x[3]);
  std::array<double, kNumTypes> d{};
  for (int i = 0; i < kNumTypes; ++i) {
    d[static_cast<std::size_t>(i)] = x[i] * (p.selection(i) - mean);
  }
  d[0] += r;
  d[3] += r;
  d[1] -= r;
  d[2] -= r;
  return d;
}

StepResult sde_step(const SimplexState& x, const ModelParams& p, double dt, RngStream& rng,
                    int max_halvings) {
  if (!(dt > 0.0)) throw std::invalid_argument("dt must be positive");
  const auto d = drift(x, p);
  double biggest = 0.0;
  for (double v : d) biggest = std::max(biggest, std::abs(v));
  StepResult out;
  double h = dt;
  while (biggest * h > 0.5) {
    if (out.halvings == max_halvings) throw std::runtime_error("step rejection cascade failed");
    h *= 0.5;
    ++out.halvings;
  }
  out.dt_used = h;

  SimplexState y = x;
  for (int i = 0; i < kNumTypes; ++i) y[i] += d[static_cast<std::size_t>(i)] * h;
  for (int k = 0; k < kNumTypes; ++k) {
    for (int l = k + 1; l < kNumTypes; ++l) {
      const double prod = x[k] * x[l];
      if (prod <= 0.0) continue;
      const double g = std::sqrt(prod * h) * rng.normal();
      y[k] += g;
      y[l] -= g;
    }
  }
  y.normalize();
  out.x = y;
  return out;
}

std::optional<int> fixed_type(const SimplexState& x, double eta) {
  for (int i = 0; i < kNumTypes; ++i) {
    if (x[i] <= 1.0 - eta) continue;
    bool others_small = true;
    for (int j = 0; j < kNumTypes; ++j) {
      if (j != i && x[j] >= eta) others_small = false;
    }
    if (others_small) return i;
  }
  return std::nullopt;
}

SdeRun simulate_sde(const SimplexState& x0, const ModelParams& p, const SdeConfig& cfg,
                    RngStream& rng) {
  validate(cfg);
  if (!x0.on_simplex(1e-9)) throw std::invalid_argument("initial state must lie on the simplex");
  const double dt = effective_dt(cfg, p);
  SdeRun run;
  SimplexState x = x0;
  x.normalize();
  double t = 0.0;
  std::size_t next = 0;
  auto vertex = [](int i) {
    SimplexState v;
    v.x = {0.0, 0.0, 0.0, 0.0};
    v[i] = 1.0;
    return v;
  };

  run.fixed = fixed_type(x, cfg.eta);
  double fixed_at = 0.0;
  while (!(run.fixed && cfg.stop_at_fixation) && t < cfg.t_max) {
    const double h = std::min(dt, cfg.t_max - t);
    const StepResult st = sde_step(x, p, h, rng, cfg.max_halvings);
    const double t_new = t + st.dt_used;
    // Report the state at sample times crossed by this step (left value).
    while (next < cfg.sample_times.size() && cfg.sample_times[next] < t_new) {
      run.samples.push_back(x);
      ++next;
    }
    x = st.x;
    t = t_new;
    ++run.steps;
    if (!run.fixed) {
      run.fixed = fixed_type(x, cfg.eta);
      if (run.fixed) fixed_at = t;
    }
  }
  if (run.fixed && cfg.stop_at_fixation) {
    run.time = t;
    const SimplexState v = vertex(*run.fixed);
    while (next < cfg.sample_times.size()) {
      run.samples.push_back(cfg.sample_times[next] < t ? x : v);
      ++next;
    }
  } else {
    run.time = run.fixed ? fixed_at : t;
    while (next < cfg.sample_times.size()) {
      run.samples.push_back(x);
      ++next;
    }
  }
  run.final_state = x;
  return run;
}

double one_locus_fixation_probability(double s, double x) {
  if (s == 0.0) return x;
  return std::expm1(-2.0 * s * x) / std::expm1(-2.0 * s);
}

}  // namespace sweepsim::diffusion
