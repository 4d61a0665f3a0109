// Serial reference kernels against their OpenMP versions.

#include <map>
#include <sstream>

#include <benchmark/benchmark.h>

#include "rbm/bench.hpp"
#include "rbm/dual_enum.hpp"
#include "rbm/engine.hpp"
#include "rbm/gen.hpp"
#include "rbm/rounding.hpp"

namespace {

using namespace rbm;

struct Fixture {
  Instance inst;
  pd::EngineResult res;
};

const Fixture& fixture(std::int64_t n) {
  static std::map<std::int64_t, Fixture> cache;
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;
  gen::GenSpec g;
  g.kind = gen::Kind::kZipf;
  g.n = n;
  g.num_colors = 8;
  g.seed = 3;
  Fixture f{gen::generate(g, 32), {}};
  auto cfg = pd::default_config(32, n);
  cfg.record_trace = false;
  f.res = pd::run(f.inst, cfg);
  return cache.emplace(n, std::move(f)).first->second;
}

void BM_DualEnumSerial(benchmark::State& state) {
  const auto& f = fixture(state.range(0));
  const auto d = f.res.duals.raw_dual();
  const auto axis = f.inst.with_k(f.res.duals.k_prime);
  for (auto _ : state) benchmark::DoNotOptimize(dual_max_violation_serial(d, axis).max_lhs);
}

void BM_DualEnumParallel(benchmark::State& state) {
  const auto& f = fixture(state.range(0));
  const auto d = f.res.duals.raw_dual();
  const auto axis = f.inst.with_k(f.res.duals.k_prime);
  for (auto _ : state) benchmark::DoNotOptimize(dual_max_violation(d, axis).max_lhs);
  state.counters["threads"] = enumeration_threads();
}

void BM_RoundSeedsSerial(benchmark::State& state) {
  const auto& f = fixture(state.range(0));
  const round::FractionalStream stream(f.inst, f.res.x);
  for (auto _ : state) benchmark::DoNotOptimize(round::round_seeds_serial(f.inst, stream, {}, 16).size());
}

void BM_RoundSeedsParallel(benchmark::State& state) {
  const auto& f = fixture(state.range(0));
  const round::FractionalStream stream(f.inst, f.res.x);
  for (auto _ : state) benchmark::DoNotOptimize(round::round_seeds(f.inst, stream, {}, 16).size());
}

bench::ExperimentConfig small_grid() {
  std::istringstream in(
      "families = uniform, zipf\nn = 60\ncolors = 4\ninstance_seeds = 1-2\nk = 12, 16\n"
      "rounding_seeds = 4\nverify = assert\noracle = off\n");
  return bench::parse_config(in);
}

void BM_ExperimentSerial(benchmark::State& state) {
  const auto cfg = small_grid();
  for (auto _ : state) benchmark::DoNotOptimize(bench::run_experiment_serial(cfg).size());
}

void BM_ExperimentParallel(benchmark::State& state) {
  const auto cfg = small_grid();
  for (auto _ : state) benchmark::DoNotOptimize(bench::run_experiment(cfg).size());
}

}  // namespace

BENCHMARK(BM_DualEnumSerial)->Arg(60)->Arg(120)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_DualEnumParallel)->Arg(60)->Arg(120)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_RoundSeedsSerial)->Arg(120)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_RoundSeedsParallel)->Arg(120)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ExperimentSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ExperimentParallel)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
