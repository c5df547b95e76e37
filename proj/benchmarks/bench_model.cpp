#include <benchmark/benchmark.h>

#include <cmath>

#include "tsaug/model.hpp"
#include "tsaug/train.hpp"

using namespace tsaug;

namespace {

Batch random_batch(const ModelSpec& spec, std::size_t size) {
  RngStream rng(3, 0);
  std::vector<TimeSeries> xs;
  for (std::size_t i = 0; i < size; ++i) {
    std::vector<double> v(spec.length * spec.channels);
    for (auto& x : v) x = rng.normal();
    xs.emplace_back(spec.length, spec.channels, std::move(v), static_cast<int>(i % spec.num_classes));
  }
  return make_batch(xs);
}

ModelSpec spec_for(std::int64_t kind) {
  return ModelSpec::make(kind == 0 ? ModelKind::Mlp : ModelKind::Conv1d, 128, 3, 4, 0.5);
}

void BM_Forward(benchmark::State& state) {
  const auto spec = spec_for(state.range(0));
  const auto model = Model::create(spec, RngStream(4, 0));
  const auto batch = random_batch(spec, 32);
  for (auto _ : state) benchmark::DoNotOptimize(forward(model, batch, Mode::Eval));
  state.SetLabel(std::string(to_string(spec.kind)));
}
BENCHMARK(BM_Forward)->Arg(0)->Arg(1)->Unit(benchmark::kMicrosecond);

void BM_ForwardBackward(benchmark::State& state) {
  const auto spec = spec_for(state.range(0));
  const auto model = Model::create(spec, RngStream(4, 0));
  const auto batch = random_batch(spec, 32);
  for (auto _ : state) {
    const auto fp = forward(model, batch, Mode::Train, RngStream(5, 0));
    const auto loss = softmax_cross_entropy(fp.logits, fp.classes, batch.labels);
    benchmark::DoNotOptimize(backward(model, fp.cache, loss.grad_logits));
  }
  state.SetLabel(std::string(to_string(spec.kind)));
}
BENCHMARK(BM_ForwardBackward)->Arg(0)->Arg(1)->Unit(benchmark::kMicrosecond);

void BM_TrainStep(benchmark::State& state) {
  const auto spec = spec_for(state.range(0));
  auto model = Model::create(spec, RngStream(4, 0));
  Adam opt(model.num_parameters());
  const auto batch = random_batch(spec, 32);
  std::uint64_t i = 0;
  for (auto _ : state) benchmark::DoNotOptimize(train_step(model, opt, batch, 1e-4, RngStream(6, i++)));
  state.SetLabel(std::string(to_string(spec.kind)));
}
BENCHMARK(BM_TrainStep)->Arg(0)->Arg(1)->Unit(benchmark::kMicrosecond);

}  // namespace
