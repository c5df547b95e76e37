#pragma once

#include <random>

#include "oracles.hpp"
#include "tsaug/model.hpp"

namespace gradcheck {

inline double train_loss(const tsaug::Model& m, const tsaug::Batch& b, tsaug::RngStream rng) {
  const auto fp = tsaug::forward(m, b, tsaug::Mode::Train, rng);
  return tsaug::softmax_cross_entropy(fp.logits, fp.classes, b.labels).loss;
}

// Largest relative error between backward() and central differences over
// every parameter, train mode with a fixed dropout stream.
inline double max_relative_error(tsaug::Model m, const tsaug::Batch& b, tsaug::RngStream rng, double h = 1e-5,
                                 double floor = 1e-6) {
  const auto fp = tsaug::forward(m, b, tsaug::Mode::Train, rng);
  const auto loss = tsaug::softmax_cross_entropy(fp.logits, fp.classes, b.labels);
  const auto grad = tsaug::backward(m, fp.cache, loss.grad_logits);
  double worst = 0.0;
  auto params = m.parameters();
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double saved = params[i];
    params[i] = saved + h;
    const double up = train_loss(m, b, rng);
    params[i] = saved - h;
    const double down = train_loss(m, b, rng);
    params[i] = saved;
    worst = std::max(worst, oracle::relative_error(grad[i], (up - down) / (2 * h), floor));
  }
  return worst;
}

// Random model (all parameters perturbed, including norm scales) and a
// random labeled batch.
inline std::pair<tsaug::Model, tsaug::Batch> random_instance(const tsaug::ModelSpec& spec, std::size_t batch_size,
                                                             std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> n(0.0, 1.0);
  auto m = tsaug::Model::create(spec, tsaug::RngStream(seed, 0));
  for (auto& p : m.parameters()) p += 0.3 * n(gen);
  std::vector<tsaug::TimeSeries> series;
  for (std::size_t i = 0; i < batch_size; ++i) {
    std::vector<double> v(spec.length * spec.channels);
    for (auto& x : v) x = n(gen);
    series.emplace_back(spec.length, spec.channels, std::move(v), static_cast<int>(gen() % spec.num_classes));
  }
  return {std::move(m), tsaug::make_batch(series)};
}

inline tsaug::ModelSpec small_mlp() {
  tsaug::ModelSpec s;
  s.kind = tsaug::ModelKind::Mlp;
  s.length = 6;
  s.channels = 2;
  s.num_classes = 3;
  s.hidden = {5, 4};
  return s;
}

inline tsaug::ModelSpec small_conv() {
  tsaug::ModelSpec s;
  s.kind = tsaug::ModelKind::Conv1d;
  s.length = 12;
  s.channels = 2;
  s.num_classes = 3;
  s.hidden = {3, 4};
  s.dropout = 0.0;
  return s;
}

}  // namespace gradcheck
