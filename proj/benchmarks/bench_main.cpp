#include <benchmark/benchmark.h>

#include <cmath>

#include "sweepsim/asrg.h"
#include "sweepsim/birth_death.h"
#include "sweepsim/diffusion.h"
#include "sweepsim/jump_process.h"

namespace {

using namespace sweepsim;

void BM_LProcessRun(benchmark::State& state) {
  const double alpha = static_cast<double>(state.range(0));
  const ModelParams p = make_params(alpha, 0.4, 0.8, 1.0, 0.2);
  jumpsim::RunOptions opt;
  opt.t_max = jumpsim::default_t_max(p);
  std::uint64_t stream = 0;
  std::int64_t events = 0;
  for (auto _ : state) {
    RngStream rng(7, stream++);
    const auto run = jumpsim::simulate_L(p, rng, opt);
    events += run.trajectory.events;
    benchmark::DoNotOptimize(run.time);
  }
  state.counters["events/s"] =
      benchmark::Counter(static_cast<double>(events), benchmark::Counter::kIsRate);
}
BENCHMARK(BM_LProcessRun)->Arg(200)->Arg(1000)->Unit(benchmark::kMillisecond);

void BM_SdeStep(benchmark::State& state) {
  ModelParams p = make_params(10.0, 0.4, 0.8, 1.0, 0.2);
  RngStream rng(7, 0);
  SimplexState x = make_simplex(0.4, 0.3, 0.2, 0.1);
  const SimplexState x0 = x;
  for (auto _ : state) {
    x = diffusion::sde_step(x, p, 1e-5, rng).x;
    if (x[0] < 0.05 || x[1] < 0.05 || x[2] < 0.05 || x[3] < 0.05) x = x0;
    benchmark::DoNotOptimize(x);
  }
}
BENCHMARK(BM_SdeStep);

void BM_KendallLogistic(benchmark::State& state) {
  const double T = bd::logistic_window(0.4, 0.8, 1.0);
  const auto s = bd::logistic_schedule(bd::LogisticDrive{0.4, 0.8, 0.5}, 1.0, 1.0, T);
  for (auto _ : state) {
    benchmark::DoNotOptimize(bd::kendall_generating_function(s, 0, T, 0.0));
  }
}
BENCHMARK(BM_KendallLogistic)->Unit(benchmark::kMicrosecond);

void BM_SurvivalClosedForm(benchmark::State& state) {
  double rho = 0.5;
  for (auto _ : state) {
    benchmark::DoNotOptimize(bd::immigration_survival(0.4, 0.8, rho));
    rho = rho < 4.0 ? rho + 0.01 : 0.5;
  }
}
BENCHMARK(BM_SurvivalClosedForm);

void BM_AsrgBuild(benchmark::State& state) {
  const double alpha = static_cast<double>(state.range(0));
  ModelParams p;
  p.alpha = alpha;
  p.alpha1 = 0.4 * alpha;
  p.alpha2 = 0.8 * alpha;
  p.c1 = 0.4;
  p.c2 = 0.8;
  p.rho = 1.0;
  p.psi = 0.2;
  std::uint64_t stream = 0;
  for (auto _ : state) {
    RngStream rng(11, stream++);
    const auto g = asrg::build_asrg(2, p, 0.5, rng);
    benchmark::DoNotOptimize(g.top.size());
  }
}
BENCHMARK(BM_AsrgBuild)->Arg(5)->Arg(50);

}  // namespace

BENCHMARK_MAIN();
