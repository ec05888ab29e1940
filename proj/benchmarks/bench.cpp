// Micro-benchmarks for the hot paths: exact FFN vs speculative folded
// inference, range search, and KDE fitting.

#include <benchmark/benchmark.h>

#include <random>

#include "ffnfold/density.hpp"
#include "ffnfold/pipeline.hpp"

namespace {

using namespace ffnfold;

struct Fixture {
  ToyModel model;
  CalibrationSet calib;
  FoldedModel folded;

  Fixture(std::size_t d, std::size_t h) {
    model = gen_synthetic(d, h, 1, 42, Activation::GeluErf);
    calib = gen_calibration(256, d, 43);
    FoldConfig cfg;
    folded = run_fold(model, calib, cfg);
  }
};

Fixture& fixture(std::size_t d) {
  static Fixture f64(64, 256);
  static Fixture f128(128, 512);
  return d == 64 ? f64 : f128;
}

void BM_matmul(benchmark::State& state) {
  const std::size_t d = static_cast<std::size_t>(state.range(0));
  const ToyModel m = gen_synthetic(d, 4 * d, 1, 1, Activation::GeluErf);
  const CalibrationSet calib = gen_calibration(64, d, 2);
  for (auto _ : state) {
    benchmark::DoNotOptimize(matmul(calib.x, m.layers[0].w1));
  }
}
BENCHMARK(BM_matmul)->Arg(64)->Arg(128);

void BM_ffn_exact(benchmark::State& state) {
  Fixture& f = fixture(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(ffn_exact(f.model.layers[0], f.calib.x));
  }
}
BENCHMARK(BM_ffn_exact)->Arg(64)->Arg(128);

void BM_infer_speculative(benchmark::State& state) {
  Fixture& f = fixture(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(infer_speculative(f.folded.layers[0], f.calib.x));
  }
}
BENCHMARK(BM_infer_speculative)->Arg(64)->Arg(128);

void BM_infer_with_fixing(benchmark::State& state) {
  Fixture& f = fixture(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        infer(f.folded.layers[0], f.calib.x, InferMode::OracleFlags));
  }
}
BENCHMARK(BM_infer_with_fixing)->Arg(64)->Arg(128);

std::vector<double> bench_samples(std::size_t k) {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> dist(0.0, 1.0);
  std::vector<double> s(k);
  for (auto& v : s) v = dist(rng);
  std::sort(s.begin(), s.end());
  return s;
}

void BM_kde_fit(benchmark::State& state) {
  const auto s = bench_samples(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(kde_fit(s));
  }
}
BENCHMARK(BM_kde_fit)->Arg(1000)->Arg(10000);

void BM_search_range(benchmark::State& state) {
  const auto s = bench_samples(static_cast<std::size_t>(state.range(0)));
  const double step = default_step(s);
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        search_range(s, 1.0, Activation::GeluErf, 0.85, step, 0.0));
  }
}
BENCHMARK(BM_search_range)->Arg(1000)->Arg(10000);

void BM_run_fold(benchmark::State& state) {
  Fixture& f = fixture(64);
  FoldConfig cfg;
  for (auto _ : state) {
    benchmark::DoNotOptimize(run_fold(f.model, f.calib, cfg));
  }
}
BENCHMARK(BM_run_fold);

}  // namespace

BENCHMARK_MAIN();
