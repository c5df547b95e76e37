#include <benchmark/benchmark.h>

#include <cmath>

#include "tsaug/augment.hpp"
#include "tsaug/magnitude.hpp"
#include "tsaug/rand_augment.hpp"
#include "tsaug/spline.hpp"

using namespace tsaug;

namespace {

TimeSeries wave(std::size_t length, std::size_t channels) {
  std::vector<double> v(length * channels);
  for (std::size_t t = 0; t < length; ++t) {
    for (std::size_t c = 0; c < channels; ++c) v[t * channels + c] = std::sin(0.1 * t + c);
  }
  return TimeSeries(length, channels, std::move(v), 0);
}

void BM_Op(benchmark::State& state) {
  const auto kind = kAllOps[static_cast<std::size_t>(state.range(0))];
  const auto x = wave(static_cast<std::size_t>(state.range(1)), 3);
  const auto p = fit_to_length(kind, MagnitudeTable::builtin().default_params(kind), x.length());
  std::uint64_t i = 0;
  for (auto _ : state) benchmark::DoNotOptimize(apply_op(kind, x, p, RngStream(1, i++)));
  state.SetLabel(std::string(to_string(kind)));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(x.values().size()));
}
BENCHMARK(BM_Op)->ArgsProduct({{0, 1, 2, 3, 4, 5, 6, 7}, {128, 1024}});

void BM_RandAugment(benchmark::State& state) {
  const auto x = wave(256, 3);
  RandAugmentConfig cfg;
  cfg.num_ops = static_cast<int>(state.range(0));
  std::uint64_t i = 0;
  for (auto _ : state) benchmark::DoNotOptimize(rand_augment(x, cfg, RngStream(2, i++)));
}
BENCHMARK(BM_RandAugment)->DenseRange(0, 4);

void BM_SplineFitEval(benchmark::State& state) {
  const auto knots = static_cast<std::size_t>(state.range(0));
  std::vector<double> values(knots);
  for (std::size_t i = 0; i < knots; ++i) values[i] = std::cos(static_cast<double>(i));
  for (auto _ : state) benchmark::DoNotOptimize(smooth_curve(512, values));
}
BENCHMARK(BM_SplineFitEval)->Arg(4)->Arg(16)->Arg(64);

}  // namespace
