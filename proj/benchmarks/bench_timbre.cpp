#include <benchmark/benchmark.h>

#include <cmath>
#include <complex>
#include <numbers>
#include <random>

#include "timbre/streaming.hpp"
#include "timbre/synth.hpp"

using namespace timbre;

namespace {

std::vector<double> noise(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  std::vector<double> x(n);
  for (auto& v : x) v = u(rng);
  return x;
}

void BM_Fft(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto x = noise(n, 1);
  std::vector<std::complex<double>> buf(n);
  for (auto _ : state) {
    for (std::size_t i = 0; i < n; ++i) buf[i] = x[i];
    fft_inplace(buf);
    benchmark::DoNotOptimize(buf.data());
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_Fft)->RangeMultiplier(4)->Range(256, 16384)->Complexity(benchmark::oNLogN);

void BM_Dct(benchmark::State& state) {
  const auto x = noise(static_cast<std::size_t>(state.range(0)), 2);
  for (auto _ : state) benchmark::DoNotOptimize(dct_ii(x));
}
BENCHMARK(BM_Dct)->Arg(26)->Arg(1025);

void BM_ExtractFeatures(benchmark::State& state) {
  const FeatureExtractor fx(FeatureConfig{}, 16000);
  const auto note = synth_note(default_profiles()[1], 294.0, 16000, 0.1, 3);
  for (auto _ : state) benchmark::DoNotOptimize(fx.extract(note.samples));
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_ExtractFeatures);

void BM_Lpc(benchmark::State& state) {
  const auto x = noise(1600, 4);
  for (auto _ : state) benchmark::DoNotOptimize(lpc_steepest_descent(x));
}
BENCHMARK(BM_Lpc);

TrainingSet blob_set(std::size_t per_class) {
  TrainingSet ts;
  std::mt19937_64 rng(5);
  std::normal_distribution<double> z(0.0, 1.0);
  for (std::size_t c = 0; c < 6; ++c) {
    ts.classes.push_back("c" + std::to_string(c));
    for (std::size_t i = 0; i < per_class; ++i) {
      std::vector<double> x(32);
      for (std::size_t d = 0; d < 32; ++d) x[d] = (d % 6 == c ? 1.5 : 0.0) + z(rng);
      ts.features.push_back(std::move(x));
      ts.labels.push_back(c);
    }
  }
  return ts;
}

void BM_TrainAllPairs(benchmark::State& state) {
  const auto ts = blob_set(static_cast<std::size_t>(state.range(0)));
  SvmParams p;
  p.threads = static_cast<unsigned>(state.range(1));
  for (auto _ : state) benchmark::DoNotOptimize(train_all_pairs(ts, p));
}
BENCHMARK(BM_TrainAllPairs)->Args({180, 1})->Args({180, 4})->Unit(benchmark::kMillisecond);

void BM_Predict(benchmark::State& state) {
  const auto model = train_all_pairs(blob_set(60), {});
  const auto x = noise(32, 6);
  for (auto _ : state) benchmark::DoNotOptimize(predict(model, x));
}
BENCHMARK(BM_Predict);

void BM_StreamSecond(benchmark::State& state) {
  auto model = std::make_shared<MulticlassModel>(train_all_pairs(blob_set(20), {}));
  model->config_hash = config_hash(FeatureConfig{});
  const auto second = synth_note(default_profiles()[2], 392.0, 16000, 1.0, 7).samples;
  for (auto _ : state) {
    StreamPredictor sp(model, FeatureConfig{}, 16000);
    benchmark::DoNotOptimize(sp.push_samples(second));
  }
}
BENCHMARK(BM_StreamSecond)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
