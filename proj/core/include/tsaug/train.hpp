#pragma once

#include <cstddef>
#include <functional>
#include <limits>
#include <span>
#include <vector>

#include "tsaug/model.hpp"
#include "tsaug/rng.hpp"
#include "tsaug/series.hpp"

namespace tsaug {

// Training recipe: Adam, lr0 decayed by `lr_decay` every `decay_every`
// epochs, mini-batches of `batch_size`, `epochs` passes.
struct TrainConfig {
  double lr0 = 1e-3;
  double lr_decay = 0.9;
  int decay_every = 5;
  std::size_t batch_size = 100;
  int epochs = 50;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_eps = 1e-8;

  void validate() const;
  // lr0 * lr_decay^floor(epoch / decay_every), epochs counted from 0.
  double learning_rate(int epoch) const;
};

class Adam {
 public:
  Adam(std::size_t num_params, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8);
  explicit Adam(std::size_t num_params, const TrainConfig& cfg) : Adam(num_params, cfg.beta1, cfg.beta2, cfg.adam_eps) {}

  void step(std::span<double> params, std::span<const double> grad, double lr);
  long steps() const { return t_; }

 private:
  double beta1_, beta2_, eps_;
  long t_ = 0;
  std::vector<double> m_, v_;
};

struct EpochRecord {
  int epoch = 0;
  double learning_rate = 0.0;
  double train_loss = 0.0;  // mean over the epoch's batches
  double train_accuracy = 0.0;
  double val_accuracy = 0.0;
  double test_accuracy = std::numeric_limits<double>::quiet_NaN();  // NaN without a test split

  friend bool operator==(const EpochRecord&, const EpochRecord&) = default;
};

struct TrainReport {
  std::vector<EpochRecord> epochs;
  double final_train_loss = 0.0;
  double wall_seconds = 0.0;  // not part of determinism comparisons

  bool same_numbers(const TrainReport& other) const;
};

// Per-sample augmentation applied to training batches. Receives a stream
// derived from (epoch, batch, position in batch).
using Augmenter = std::function<TimeSeries(const TimeSeries&, RngStream)>;

// One optimizer step on `batch`: train-mode forward, cross-entropy, backward,
// Adam update, running-statistics update. Throws NumericError (leaving model
// and optimizer untouched) if the loss or gradient is not finite.
LossResult train_step(Model& model, Adam& optimizer, const Batch& batch, double learning_rate, RngStream dropout_rng);

// Fully deterministic given `rng`. Epoch e shuffles with
// rng.derive(e).derive(0); batch b draws dropout from
// rng.derive(e).derive(1).derive(b) and augmentation from
// rng.derive(e).derive(2).derive(b).derive(i).
TrainReport train(Model& model, const Dataset& train_set, const Dataset& val_set, const TrainConfig& cfg,
                  RngStream rng, const Augmenter& augmenter = {}, const Dataset* test_set = nullptr);

std::vector<int> predict(const Model& model, const Dataset& d, std::size_t batch_size = 256);
// Fraction of labeled samples classified correctly (eval mode).
double accuracy(const Model& model, const Dataset& d);
// Mean eval-mode cross-entropy.
double mean_loss(const Model& model, const Dataset& d);

}  // namespace tsaug
