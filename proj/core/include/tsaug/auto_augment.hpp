#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "tsaug/augment.hpp"
#include "tsaug/magnitude.hpp"
#include "tsaug/model.hpp"
#include "tsaug/rng.hpp"
#include "tsaug/series.hpp"
#include "tsaug/train.hpp"

namespace tsaug {

double sigmoid(double x);
std::vector<double> softmax(std::span<const double> logits);

// One op inside a sub-policy. Application probability sigmoid(p_logit);
// magnitude level 30 * sigmoid(m_logit).
struct PolicyOp {
  AugOpKind kind = AugOpKind::Jitter;
  double p_logit = 0.0;
  double m_logit = 0.0;

  double probability() const { return sigmoid(p_logit); }
  double level() const { return kMaxMagnitudeLevel * sigmoid(m_logit); }

  friend bool operator==(const PolicyOp&, const PolicyOp&) = default;
};

struct SubPolicy {
  std::vector<PolicyOp> ops;
  friend bool operator==(const SubPolicy&, const SubPolicy&) = default;
};

// K sub-policies selected through softmax(weights).
//
// When an op fires, its magnitude logit is perturbed as
// z = m_logit + magnitude_noise * eps, eps ~ N(0, 1), and the op runs at
// level 30 * sigmoid(z). The perturbation gives the score-function estimator
// a density to differentiate; magnitude_noise = 0 freezes magnitudes.
struct Policy {
  static constexpr int kJsonVersion = 1;

  std::vector<SubPolicy> subpolicies;
  std::vector<double> weights;
  double magnitude_noise = 0.5;

  std::size_t size() const { return subpolicies.size(); }
  std::vector<double> selection_probabilities() const { return softmax(weights); }
  // Throws ValidationError on an empty policy, mismatched weights, empty
  // sub-policies, non-finite logits or a broken simplex.
  void validate() const;

  nlohmann::json to_json() const;
  static Policy from_json(const nlohmann::json& j);

  friend bool operator==(const Policy&, const Policy&) = default;
};

// K sub-policies of J ops drawn uniformly from `pool`; all weights 0,
// p = 0.5 and level 15 everywhere.
Policy init_policy(int ops_per_subpolicy, int num_subpolicies, std::span<const AugOpKind> pool, RngStream rng);

// The random choices made for one sample: which sub-policy, which of its ops
// fired, and the realized magnitude logit z of each op.
struct PolicyTrace {
  std::size_t subpolicy = 0;
  std::vector<std::uint8_t> fired;
  std::vector<double> magnitude_logits;

  friend bool operator==(const PolicyTrace&, const PolicyTrace&) = default;
};

PolicyTrace sample_trace(const Policy& policy, RngStream rng);
// Level an op runs at under a trace.
double traced_level(const PolicyTrace& trace, std::size_t op_index);
TimeSeries apply_trace(const Policy& policy, const TimeSeries& x, const PolicyTrace& trace, RngStream rng,
                       const MagnitudeTable& table = MagnitudeTable::builtin(), const OpObserver& observer = {});

struct PolicySample {
  TimeSeries series;
  PolicyTrace trace;
};

// Trace from rng.derive(0), transforms from rng.derive(1).
PolicySample sample_and_apply(const Policy& policy, const TimeSeries& x, RngStream rng,
                              const MagnitudeTable& table = MagnitudeTable::builtin());

// Gradient with respect to every policy logit.
struct PolicyGradient {
  std::vector<double> weights;
  std::vector<std::vector<double>> p_logit;
  std::vector<std::vector<double>> m_logit;

  static PolicyGradient zeros_like(const Policy& policy);
  void add_scaled(const PolicyGradient& other, double scale);
};

// log P(trace) = log softmax(w)_k + sum over ops of
//   fired:     log sigmoid(p) - (z - m)^2 / (2 s^2)   (density up to a constant)
//   not fired: log(1 - sigmoid(p))
// with s = magnitude_noise (the z term is dropped when s = 0).
double trace_log_prob(const Policy& policy, const PolicyTrace& trace);
PolicyGradient trace_log_prob_gradient(const Policy& policy, const PolicyTrace& trace);

// logits += scale * gradient.
void apply_gradient(Policy& policy, const PolicyGradient& gradient, double scale);

struct PolicyOptimizerState {
  explicit PolicyOptimizerState(const Model& model, const TrainConfig& cfg = {}, double policy_lr = 0.05,
                                double baseline_decay = 0.9)
      : model_optimizer(model.num_parameters(), cfg),
        model_learning_rate(cfg.lr0),
        policy_learning_rate(policy_lr),
        baseline_decay(baseline_decay) {}

  Adam model_optimizer;
  double model_learning_rate = 1e-3;
  double policy_learning_rate = 0.05;
  double baseline_decay = 0.9;
  std::optional<double> baseline;  // EMA of validation loss; seeded by the first step
};

struct PolicyStepStats {
  double train_loss = 0.0;
  std::size_t train_correct = 0;
  double val_loss = 0.0;
  double baseline = 0.0;  // baseline the advantage was measured against
  double advantage = 0.0;  // -(val_loss - baseline)
};

// Joint step: the model takes one optimizer step on the policy-augmented
// train batch, then the policy logits move by
//   policy_lr * advantage * sum_i grad log P(trace_i)
// where advantage = -(val_loss - baseline) and val_loss is the eval-mode loss
// on val_batch after the model step. The baseline then decays towards
// val_loss. Throws NumericError with all state unchanged on a non-finite loss.
PolicyStepStats policy_step(Policy& policy, Model& model, std::span<const TimeSeries> train_batch,
                            std::span<const TimeSeries> val_batch, PolicyOptimizerState& state, RngStream rng,
                            const MagnitudeTable& table = MagnitudeTable::builtin());

struct SearchConfig {
  int num_subpolicies = 14;   // K
  int ops_per_subpolicy = 2;  // J
  double policy_lr = 0.05;
  double baseline_decay = 0.9;
  double magnitude_noise = 0.5;
  std::vector<AugOpKind> pool{kAllOps.begin(), kAllOps.end()};

  void validate() const;
};

struct PolicySnapshot {
  int epoch = 0;
  std::vector<double> probabilities;                   // softmax(weights)
  std::vector<std::vector<double>> op_probability;     // per sub-policy, per op
  std::vector<std::vector<double>> op_level;
};

PolicySnapshot snapshot(const Policy& policy, int epoch);

struct PolicyTrajectory {
  std::vector<PolicySnapshot> snapshots;  // epoch 0 = initial policy, then one per completed epoch
};

struct SearchReport {
  Policy policy;
  PolicyTrajectory trajectory;
  TrainReport training;
};

using PolicyStepCallback = std::function<void(const Policy&, const PolicyStepStats&)>;

// Trains `model` and `policy` jointly for cfg.epochs; the policy's
// magnitude_noise is replaced by search.magnitude_noise. Validation batches cycle
// through `val_set` in order. Epoch e shuffles with rng.derive(e).derive(0)
// and runs batch b's policy_step on rng.derive(e).derive(1).derive(b).
SearchReport search_policy(Policy policy, Model& model, const Dataset& train_set, const Dataset& val_set,
                           const TrainConfig& cfg, const SearchConfig& search, RngStream rng,
                           const MagnitudeTable& table = MagnitudeTable::builtin(), const Dataset* test_set = nullptr,
                           const PolicyStepCallback& on_step = {});

// Epoch x K matrix of selection probabilities.
struct TrajectoryTable {
  std::vector<int> epochs;
  std::vector<std::vector<double>> probabilities;
};

TrajectoryTable export_trajectory(const PolicyTrajectory& trajectory);
// `epoch,subpolicy_id,probability` rows.
void write_trajectory_csv(const TrajectoryTable& table, std::ostream& out);

}  // namespace tsaug
