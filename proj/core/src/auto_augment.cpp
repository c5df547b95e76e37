#include "tsaug/auto_augment.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <numeric>
#include <ostream>
#include <string>

#include "tsaug/error.hpp"

namespace tsaug {

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

std::vector<double> softmax(std::span<const double> logits) {
  std::vector<double> p(logits.size());
  if (logits.empty()) return p;
  const double top = *std::max_element(logits.begin(), logits.end());
  double sum = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    p[i] = std::exp(logits[i] - top);
    sum += p[i];
  }
  for (auto& v : p) v /= sum;
  return p;
}

namespace {

// log sigmoid(x) and log(1 - sigmoid(x)) without overflow.
double log_sigmoid(double x) { return x >= 0.0 ? -std::log1p(std::exp(-x)) : x - std::log1p(std::exp(x)); }
double log_one_minus_sigmoid(double x) { return log_sigmoid(-x); }

double log_softmax_at(std::span<const double> logits, std::size_t k) {
  const double top = *std::max_element(logits.begin(), logits.end());
  double sum = 0.0;
  for (double l : logits) sum += std::exp(l - top);
  return logits[k] - top - std::log(sum);
}

}  // namespace

void Policy::validate() const {
  if (subpolicies.empty()) throw ValidationError("policy has no sub-policies");
  if (weights.size() != subpolicies.size()) throw ValidationError("policy weight count does not match sub-policies");
  if (!(magnitude_noise >= 0.0) || !std::isfinite(magnitude_noise)) {
    throw ValidationError("policy magnitude noise must be finite and >= 0");
  }
  for (const auto& sp : subpolicies) {
    if (sp.ops.empty()) throw ValidationError("sub-policy has no ops");
    for (const auto& op : sp.ops) {
      if (!std::isfinite(op.p_logit) || !std::isfinite(op.m_logit)) throw ValidationError("non-finite policy logit");
    }
  }
  for (double w : weights) {
    if (!std::isfinite(w)) throw ValidationError("non-finite selection weight");
  }
  const auto p = selection_probabilities();
  const double total = std::accumulate(p.begin(), p.end(), 0.0);
  if (std::abs(total - 1.0) > 1e-12 || std::any_of(p.begin(), p.end(), [](double v) { return v < 0.0; })) {
    throw ValidationError("policy selection probabilities are not a simplex");
  }
}

nlohmann::json Policy::to_json() const {
  nlohmann::json subs = nlohmann::json::array();
  for (const auto& sp : subpolicies) {
    nlohmann::json ops = nlohmann::json::array();
    for (const auto& op : sp.ops) {
      ops.push_back({{"kind", std::string(to_string(op.kind))},
                     {"p_logit", op.p_logit},
                     {"m_logit", op.m_logit},
                     {"probability", op.probability()},
                     {"level", op.level()}});
    }
    subs.push_back({{"ops", ops}});
  }
  return {{"version", kJsonVersion},
          {"magnitude_noise", magnitude_noise},
          {"weights", weights},
          {"selection_probabilities", selection_probabilities()},
          {"subpolicies", subs}};
}

Policy Policy::from_json(const nlohmann::json& j) {
  Policy p;
  try {
    if (j.at("version").get<int>() != kJsonVersion) throw ValidationError("policy: unsupported version");
    p.magnitude_noise = j.at("magnitude_noise").get<double>();
    p.weights = j.at("weights").get<std::vector<double>>();
    for (const auto& sub : j.at("subpolicies")) {
      SubPolicy sp;
      for (const auto& op : sub.at("ops")) {
        const auto name = op.at("kind").get<std::string>();
        const auto kind = parse_op(name);
        if (!kind) throw ValidationError("policy: unknown op '" + name + "'");
        sp.ops.push_back({*kind, op.at("p_logit").get<double>(), op.at("m_logit").get<double>()});
      }
      p.subpolicies.push_back(std::move(sp));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("policy: ") + e.what());
  }
  p.validate();
  return p;
}

Policy init_policy(int ops_per_subpolicy, int num_subpolicies, std::span<const AugOpKind> pool, RngStream rng) {
  if (ops_per_subpolicy < 1 || num_subpolicies < 1) throw ValidationError("policy needs K >= 1 and J >= 1");
  if (pool.empty()) throw ValidationError("policy op pool is empty");
  Policy p;
  p.subpolicies.resize(static_cast<std::size_t>(num_subpolicies));
  for (auto& sp : p.subpolicies) {
    sp.ops.resize(static_cast<std::size_t>(ops_per_subpolicy));
    for (auto& op : sp.ops) op = PolicyOp{pool[rng.uniform_index(pool.size())], 0.0, 0.0};
  }
  p.weights.assign(p.subpolicies.size(), 0.0);
  return p;
}

PolicyTrace sample_trace(const Policy& policy, RngStream rng) {
  PolicyTrace trace;
  const auto probs = policy.selection_probabilities();
  const double u = rng.uniform();
  double cumulative = 0.0;
  trace.subpolicy = probs.size() - 1;
  for (std::size_t k = 0; k < probs.size(); ++k) {
    cumulative += probs[k];
    if (u < cumulative) {
      trace.subpolicy = k;
      break;
    }
  }
  const auto& ops = policy.subpolicies[trace.subpolicy].ops;
  trace.fired.resize(ops.size());
  trace.magnitude_logits.resize(ops.size());
  for (std::size_t i = 0; i < ops.size(); ++i) {
    trace.fired[i] = rng.bernoulli(ops[i].probability()) ? 1 : 0;
    trace.magnitude_logits[i] = ops[i].m_logit + policy.magnitude_noise * rng.normal();
  }
  return trace;
}

double traced_level(const PolicyTrace& trace, std::size_t op_index) {
  return kMaxMagnitudeLevel * sigmoid(trace.magnitude_logits.at(op_index));
}

TimeSeries apply_trace(const Policy& policy, const TimeSeries& x, const PolicyTrace& trace, RngStream rng,
                       const MagnitudeTable& table, const OpObserver& observer) {
  const auto& ops = policy.subpolicies.at(trace.subpolicy).ops;
  TimeSeries current = x;
  for (std::size_t i = 0; i < ops.size(); ++i) {
    if (!trace.fired[i]) continue;
    const auto kind = ops[i].kind;
    const auto params = fit_to_length(kind, table.params_for_level(kind, traced_level(trace, i)), x.length());
    current = apply_op(kind, current, params, rng.derive(i));
    if (observer) observer(kind);
  }
  return current;
}

PolicySample sample_and_apply(const Policy& policy, const TimeSeries& x, RngStream rng, const MagnitudeTable& table) {
  auto trace = sample_trace(policy, rng.derive(0));
  auto series = apply_trace(policy, x, trace, rng.derive(1), table);
  return {std::move(series), std::move(trace)};
}

PolicyGradient PolicyGradient::zeros_like(const Policy& policy) {
  PolicyGradient g;
  g.weights.assign(policy.size(), 0.0);
  for (const auto& sp : policy.subpolicies) {
    g.p_logit.emplace_back(sp.ops.size(), 0.0);
    g.m_logit.emplace_back(sp.ops.size(), 0.0);
  }
  return g;
}

void PolicyGradient::add_scaled(const PolicyGradient& other, double scale) {
  for (std::size_t k = 0; k < weights.size(); ++k) {
    weights[k] += scale * other.weights[k];
    for (std::size_t i = 0; i < p_logit[k].size(); ++i) {
      p_logit[k][i] += scale * other.p_logit[k][i];
      m_logit[k][i] += scale * other.m_logit[k][i];
    }
  }
}

double trace_log_prob(const Policy& policy, const PolicyTrace& trace) {
  double lp = log_softmax_at(policy.weights, trace.subpolicy);
  const auto& ops = policy.subpolicies[trace.subpolicy].ops;
  const double s = policy.magnitude_noise;
  for (std::size_t i = 0; i < ops.size(); ++i) {
    if (trace.fired[i]) {
      lp += log_sigmoid(ops[i].p_logit);
      if (s > 0.0) {
        const double r = (trace.magnitude_logits[i] - ops[i].m_logit) / s;
        lp += -0.5 * r * r;
      }
    } else {
      lp += log_one_minus_sigmoid(ops[i].p_logit);
    }
  }
  return lp;
}

PolicyGradient trace_log_prob_gradient(const Policy& policy, const PolicyTrace& trace) {
  auto g = PolicyGradient::zeros_like(policy);
  const auto probs = policy.selection_probabilities();
  for (std::size_t j = 0; j < probs.size(); ++j) g.weights[j] = (j == trace.subpolicy ? 1.0 : 0.0) - probs[j];
  const auto& ops = policy.subpolicies[trace.subpolicy].ops;
  const double s = policy.magnitude_noise;
  for (std::size_t i = 0; i < ops.size(); ++i) {
    const double p = ops[i].probability();
    if (trace.fired[i]) {
      g.p_logit[trace.subpolicy][i] = 1.0 - p;
      if (s > 0.0) g.m_logit[trace.subpolicy][i] = (trace.magnitude_logits[i] - ops[i].m_logit) / (s * s);
    } else {
      g.p_logit[trace.subpolicy][i] = -p;
    }
  }
  return g;
}

void apply_gradient(Policy& policy, const PolicyGradient& gradient, double scale) {
  for (std::size_t k = 0; k < policy.size(); ++k) {
    policy.weights[k] += scale * gradient.weights[k];
    auto& ops = policy.subpolicies[k].ops;
    for (std::size_t i = 0; i < ops.size(); ++i) {
      ops[i].p_logit += scale * gradient.p_logit[k][i];
      ops[i].m_logit += scale * gradient.m_logit[k][i];
    }
  }
}

PolicyStepStats policy_step(Policy& policy, Model& model, std::span<const TimeSeries> train_batch,
                            std::span<const TimeSeries> val_batch, PolicyOptimizerState& state, RngStream rng,
                            const MagnitudeTable& table) {
  if (train_batch.empty() || val_batch.empty()) throw ValidationError("policy step needs non-empty batches");
  std::vector<TimeSeries> augmented;
  std::vector<PolicyTrace> traces;
  augmented.reserve(train_batch.size());
  traces.reserve(train_batch.size());
  const RngStream trace_rng = rng.derive(0);
  const RngStream op_rng = rng.derive(1);
  for (std::size_t i = 0; i < train_batch.size(); ++i) {
    traces.push_back(sample_trace(policy, trace_rng.derive(i)));
    augmented.push_back(apply_trace(policy, train_batch[i], traces.back(), op_rng.derive(i), table));
  }

  // Work on copies so a numeric failure leaves everything untouched.
  Model next_model = model;
  Adam next_optimizer = state.model_optimizer;
  const auto loss = train_step(next_model, next_optimizer, make_batch(augmented), state.model_learning_rate,
                               rng.derive(2));

  const auto val = make_batch(val_batch);
  const auto pass = forward(next_model, val, Mode::Eval);
  const double val_loss = softmax_cross_entropy(pass.logits, pass.classes, val.labels).loss;
  if (!std::isfinite(val_loss)) throw NumericError("non-finite validation loss in policy step");

  const double baseline = state.baseline.value_or(val_loss);
  const double advantage = -(val_loss - baseline);
  Policy next_policy = policy;
  if (advantage != 0.0) {
    auto grad = PolicyGradient::zeros_like(policy);
    for (const auto& trace : traces) grad.add_scaled(trace_log_prob_gradient(policy, trace), 1.0);
    apply_gradient(next_policy, grad, state.policy_learning_rate * advantage);
    next_policy.validate();
  }

  model = std::move(next_model);
  state.model_optimizer = std::move(next_optimizer);
  state.baseline = state.baseline_decay * baseline + (1.0 - state.baseline_decay) * val_loss;
  policy = std::move(next_policy);
  return {loss.loss, loss.correct, val_loss, baseline, advantage};
}

void SearchConfig::validate() const {
  if (num_subpolicies < 1 || ops_per_subpolicy < 1) throw ValidationError("search needs K >= 1 and J >= 1");
  if (!(policy_lr >= 0.0) || !(baseline_decay >= 0.0 && baseline_decay < 1.0) || !(magnitude_noise >= 0.0)) {
    throw ValidationError("invalid search hyperparameters");
  }
  if (pool.empty()) throw ValidationError("search op pool is empty");
}

PolicySnapshot snapshot(const Policy& policy, int epoch) {
  PolicySnapshot s;
  s.epoch = epoch;
  s.probabilities = policy.selection_probabilities();
  for (const auto& sp : policy.subpolicies) {
    std::vector<double> prob, level;
    for (const auto& op : sp.ops) {
      prob.push_back(op.probability());
      level.push_back(op.level());
    }
    s.op_probability.push_back(std::move(prob));
    s.op_level.push_back(std::move(level));
  }
  return s;
}

SearchReport search_policy(Policy policy, Model& model, const Dataset& train_set, const Dataset& val_set,
                           const TrainConfig& cfg, const SearchConfig& search, RngStream rng,
                           const MagnitudeTable& table, const Dataset* test_set, const PolicyStepCallback& on_step) {
  cfg.validate();
  search.validate();
  policy.magnitude_noise = search.magnitude_noise;
  policy.validate();
  if (train_set.empty() || val_set.empty()) throw ValidationError("policy search needs train and val data");
  PolicyOptimizerState state(model, cfg, search.policy_lr, search.baseline_decay);

  SearchReport report;
  report.trajectory.snapshots.push_back(snapshot(policy, 0));
  std::vector<std::size_t> order(train_set.size());
  std::size_t val_cursor = 0;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const RngStream epoch_rng = rng.derive(static_cast<std::uint64_t>(epoch));
    std::iota(order.begin(), order.end(), std::size_t{0});
    RngStream shuffle_rng = epoch_rng.derive(0);
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[shuffle_rng.uniform_index(i)]);
    state.model_learning_rate = cfg.learning_rate(epoch);

    double loss_sum = 0.0;
    std::size_t correct = 0;
    std::size_t batches = 0;
    for (std::size_t begin = 0; begin < order.size(); begin += cfg.batch_size) {
      const std::size_t end = std::min(order.size(), begin + cfg.batch_size);
      std::vector<TimeSeries> train_batch;
      for (std::size_t i = begin; i < end; ++i) train_batch.push_back(train_set[order[i]]);
      std::vector<TimeSeries> val_batch;
      for (std::size_t n = 0; n < std::min(cfg.batch_size, val_set.size()); ++n) {
        val_batch.push_back(val_set[val_cursor]);
        val_cursor = (val_cursor + 1) % val_set.size();
      }
      const auto stats = policy_step(policy, model, train_batch, val_batch, state, epoch_rng.derive(1).derive(batches),
                                     table);
      if (on_step) on_step(policy, stats);
      loss_sum += stats.train_loss;
      correct += stats.train_correct;
      ++batches;
    }
    EpochRecord rec;
    rec.epoch = epoch;
    rec.learning_rate = state.model_learning_rate;
    rec.train_loss = loss_sum / static_cast<double>(batches);
    rec.train_accuracy = static_cast<double>(correct) / static_cast<double>(train_set.size());
    rec.val_accuracy = accuracy(model, val_set);
    if (test_set != nullptr && !test_set->empty()) rec.test_accuracy = accuracy(model, *test_set);
    report.training.epochs.push_back(rec);
    report.trajectory.snapshots.push_back(snapshot(policy, epoch + 1));
  }
  report.training.final_train_loss = report.training.epochs.back().train_loss;
  report.policy = std::move(policy);
  return report;
}

TrajectoryTable export_trajectory(const PolicyTrajectory& trajectory) {
  TrajectoryTable t;
  for (const auto& s : trajectory.snapshots) {
    t.epochs.push_back(s.epoch);
    t.probabilities.push_back(s.probabilities);
  }
  return t;
}

void write_trajectory_csv(const TrajectoryTable& table, std::ostream& out) {
  out << "epoch,subpolicy_id,probability\n";
  for (std::size_t r = 0; r < table.epochs.size(); ++r) {
    for (std::size_t k = 0; k < table.probabilities[r].size(); ++k) {
      std::array<char, 32> buf{};
      const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), table.probabilities[r][k]);
      out << table.epochs[r] << ',' << k << ',' << std::string_view(buf.data(), res.ptr - buf.data()) << '\n';
    }
  }
}

}  // namespace tsaug
