#include "tsaug/train.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <string>

#include "tsaug/error.hpp"

namespace tsaug {

void TrainConfig::validate() const {
  if (!(lr0 > 0.0) || !(lr_decay > 0.0) || decay_every < 1 || batch_size < 1 || epochs < 1) {
    throw ValidationError("training config needs positive lr0, lr_decay, decay_every, batch_size and epochs");
  }
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0) || !(adam_eps > 0.0)) {
    throw ValidationError("invalid Adam hyperparameters");
  }
}

double TrainConfig::learning_rate(int epoch) const { return lr0 * std::pow(lr_decay, epoch / decay_every); }

bool TrainReport::same_numbers(const TrainReport& other) const {
  if (epochs.size() != other.epochs.size() || final_train_loss != other.final_train_loss) return false;
  for (std::size_t i = 0; i < epochs.size(); ++i) {
    const auto& a = epochs[i];
    const auto& b = other.epochs[i];
    const bool test_same = (std::isnan(a.test_accuracy) && std::isnan(b.test_accuracy)) ||
                           a.test_accuracy == b.test_accuracy;
    if (a.epoch != b.epoch || a.learning_rate != b.learning_rate || a.train_loss != b.train_loss ||
        a.train_accuracy != b.train_accuracy || a.val_accuracy != b.val_accuracy || !test_same) {
      return false;
    }
  }
  return true;
}

Adam::Adam(std::size_t num_params, double beta1, double beta2, double eps)
    : beta1_(beta1), beta2_(beta2), eps_(eps), m_(num_params, 0.0), v_(num_params, 0.0) {}

void Adam::step(std::span<double> params, std::span<const double> grad, double lr) {
  ++t_;
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  for (std::size_t i = 0; i < params.size(); ++i) {
    m_[i] = beta1_ * m_[i] + (1.0 - beta1_) * grad[i];
    v_[i] = beta2_ * v_[i] + (1.0 - beta2_) * grad[i] * grad[i];
    params[i] -= lr * (m_[i] / c1) / (std::sqrt(v_[i] / c2) + eps_);
  }
}

LossResult train_step(Model& model, Adam& optimizer, const Batch& batch, double learning_rate, RngStream dropout_rng) {
  if (batch.labels.size() != batch.size) throw ValidationError("training batch must be labeled");
  auto pass = forward(model, batch, Mode::Train, dropout_rng);
  auto loss = softmax_cross_entropy(pass.logits, pass.classes, batch.labels);
  if (!std::isfinite(loss.loss)) {
    throw NumericError("non-finite training loss (" + std::to_string(loss.loss) + ")");
  }
  const auto grad = backward(model, pass.cache, loss.grad_logits);
  if (!std::all_of(grad.begin(), grad.end(), [](double g) { return std::isfinite(g); })) {
    throw NumericError("non-finite gradient");
  }
  optimizer.step(model.parameters(), grad, learning_rate);
  update_running_stats(model, pass.cache);
  return loss;
}

TrainReport train(Model& model, const Dataset& train_set, const Dataset& val_set, const TrainConfig& cfg,
                  RngStream rng, const Augmenter& augmenter, const Dataset* test_set) {
  cfg.validate();
  if (train_set.empty()) throw ValidationError("training set is empty");
  const auto start = std::chrono::steady_clock::now();
  Adam optimizer(model.num_parameters(), cfg);
  TrainReport report;
  std::vector<std::size_t> order(train_set.size());
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const RngStream epoch_rng = rng.derive(static_cast<std::uint64_t>(epoch));
    std::iota(order.begin(), order.end(), std::size_t{0});
    RngStream shuffle_rng = epoch_rng.derive(0);
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[shuffle_rng.uniform_index(i)]);

    const double lr = cfg.learning_rate(epoch);
    double loss_sum = 0.0;
    std::size_t correct = 0;
    std::size_t batches = 0;
    for (std::size_t begin = 0; begin < order.size(); begin += cfg.batch_size) {
      const std::size_t end = std::min(order.size(), begin + cfg.batch_size);
      std::vector<TimeSeries> samples;
      samples.reserve(end - begin);
      const RngStream aug_rng = epoch_rng.derive(2).derive(batches);
      for (std::size_t i = begin; i < end; ++i) {
        const auto& x = train_set[order[i]];
        samples.push_back(augmenter ? augmenter(x, aug_rng.derive(i - begin)) : x);
      }
      const auto loss = train_step(model, optimizer, make_batch(samples), lr, epoch_rng.derive(1).derive(batches));
      loss_sum += loss.loss;
      correct += loss.correct;
      ++batches;
    }
    EpochRecord rec;
    rec.epoch = epoch;
    rec.learning_rate = lr;
    rec.train_loss = loss_sum / static_cast<double>(batches);
    rec.train_accuracy = static_cast<double>(correct) / static_cast<double>(train_set.size());
    rec.val_accuracy = val_set.empty() ? 0.0 : accuracy(model, val_set);
    if (test_set != nullptr && !test_set->empty()) rec.test_accuracy = accuracy(model, *test_set);
    report.epochs.push_back(rec);
  }
  report.final_train_loss = report.epochs.back().train_loss;
  report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

namespace {

template <typename Fn>
void for_each_eval_batch(const Model& model, const Dataset& d, std::size_t batch_size, Fn&& fn) {
  std::vector<std::size_t> idx;
  for (std::size_t begin = 0; begin < d.size(); begin += batch_size) {
    const std::size_t end = std::min(d.size(), begin + batch_size);
    idx.resize(end - begin);
    std::iota(idx.begin(), idx.end(), begin);
    const auto batch = make_batch(d, idx);
    fn(batch, forward(model, batch, Mode::Eval));
  }
}

}  // namespace

std::vector<int> predict(const Model& model, const Dataset& d, std::size_t batch_size) {
  std::vector<int> out;
  out.reserve(d.size());
  for_each_eval_batch(model, d, batch_size, [&](const Batch&, const ForwardPass& pass) {
    for (std::size_t b = 0; b < pass.batch; ++b) {
      const auto row = std::span<const double>(pass.logits).subspan(b * pass.classes, pass.classes);
      out.push_back(static_cast<int>(std::max_element(row.begin(), row.end()) - row.begin()));
    }
  });
  return out;
}

double accuracy(const Model& model, const Dataset& d) {
  if (d.empty()) throw ValidationError("accuracy of an empty dataset is undefined");
  const auto pred = predict(model, d);
  std::size_t correct = 0;
  std::size_t labeled = 0;
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (!d[i].label()) continue;
    ++labeled;
    if (pred[i] == *d[i].label()) ++correct;
  }
  if (labeled == 0) throw ValidationError("accuracy needs labeled samples");
  return static_cast<double>(correct) / static_cast<double>(labeled);
}

double mean_loss(const Model& model, const Dataset& d) {
  if (d.empty()) throw ValidationError("loss of an empty dataset is undefined");
  double total = 0.0;
  for_each_eval_batch(model, d, 256, [&](const Batch& batch, const ForwardPass& pass) {
    total += softmax_cross_entropy(pass.logits, pass.classes, batch.labels).loss * static_cast<double>(batch.size);
  });
  return total / static_cast<double>(d.size());
}

}  // namespace tsaug
