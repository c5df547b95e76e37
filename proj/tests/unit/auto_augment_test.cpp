#include <gtest/gtest.h>

#include <cmath>
#include <algorithm>
#include <set>
#include <random>
#include <sstream>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "tsaug/auto_augment.hpp"
#include "tsaug/data_io.hpp"
#include "tsaug/error.hpp"

using namespace tsaug;

namespace {

Policy two_op_policy() {
  Policy p;
  p.subpolicies = {SubPolicy{{PolicyOp{AugOpKind::Jitter, 0.3, -0.2}, PolicyOp{AugOpKind::Scale, -0.5, 0.4}}},
                   SubPolicy{{PolicyOp{AugOpKind::Rotate, 1.1, 0.0}, PolicyOp{AugOpKind::MagWarp, 0.0, 0.7}}},
                   SubPolicy{{PolicyOp{AugOpKind::Permute, -1.0, 1.5}, PolicyOp{AugOpKind::TimeWarp, 0.2, -1.0}}}};
  p.weights = {0.4, -0.3, 0.1};
  return p;
}

// Flattened view of a gradient: weights, then p and m logits.
std::vector<double> flatten(const PolicyGradient& g) {
  std::vector<double> v = g.weights;
  for (std::size_t k = 0; k < g.p_logit.size(); ++k) {
    v.insert(v.end(), g.p_logit[k].begin(), g.p_logit[k].end());
    v.insert(v.end(), g.m_logit[k].begin(), g.m_logit[k].end());
  }
  return v;
}

double& logit_at(Policy& p, std::size_t idx) {
  if (idx < p.weights.size()) return p.weights[idx];
  idx -= p.weights.size();
  for (auto& sp : p.subpolicies) {
    if (idx < sp.ops.size()) return sp.ops[idx].p_logit;
    idx -= sp.ops.size();
    if (idx < sp.ops.size()) return sp.ops[idx].m_logit;
    idx -= sp.ops.size();
  }
  throw std::out_of_range("logit index");
}

Dataset labeled_set(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::vector<TimeSeries> s;
  for (std::size_t i = 0; i < n; ++i) s.push_back(fixture::random_series(gen, 12, 1, static_cast<int>(i % 2)));
  return Dataset(s, 2);
}

}  // namespace

TEST(InitPolicy, UniformStart) {
  const auto p = init_policy(2, 14, kAllOps, RngStream(1, 0));
  ASSERT_EQ(p.size(), 14u);
  for (double w : p.selection_probabilities()) EXPECT_NEAR(w, 1.0 / 14, 1e-15);
  for (const auto& sp : p.subpolicies) {
    ASSERT_EQ(sp.ops.size(), 2u);
    for (const auto& op : sp.ops) {
      EXPECT_EQ(op.probability(), 0.5);
      EXPECT_EQ(op.level(), 15.0);
    }
  }
  EXPECT_EQ(init_policy(1, 1, kAllOps, RngStream(1, 0)).selection_probabilities(), std::vector<double>{1.0});
  EXPECT_EQ(init_policy(2, 14, kAllOps, RngStream(1, 0)), p);
  EXPECT_THROW(init_policy(0, 3, kAllOps, RngStream()), ValidationError);
}

TEST(InitPolicy, OpKindsCoverPool) {
  const auto p = init_policy(2, 200, kAllOps, RngStream(2, 0));
  std::set<AugOpKind> kinds;
  for (const auto& sp : p.subpolicies) {
    for (const auto& op : sp.ops) kinds.insert(op.kind);
  }
  EXPECT_EQ(kinds.size(), 8u);
}

TEST(SampleAndApply, NothingFiresWhenProbabilitiesVanish) {
  auto p = init_policy(3, 4, kAllOps, RngStream(3, 0));
  for (auto& sp : p.subpolicies) {
    for (auto& op : sp.ops) op.p_logit = -1000.0;
  }
  std::mt19937_64 gen(3);
  const auto x = fixture::random_series(gen, 20, 2);
  for (std::uint64_t s = 0; s < 50; ++s) EXPECT_EQ(sample_and_apply(p, x, RngStream(s, 0)).series, x);
}

TEST(SampleAndApply, ForcedRotate) {
  Policy p;
  p.subpolicies = {SubPolicy{{PolicyOp{AugOpKind::Rotate, 1000.0, 0.0}}}};
  p.weights = {0.0};
  const auto x = TimeSeries::univariate({1, -2, 3});
  const auto r = sample_and_apply(p, x, RngStream(4, 0));
  EXPECT_EQ(r.series, rotate_flip(x));
  EXPECT_EQ(r.trace.fired, std::vector<std::uint8_t>{1});
}

TEST(SampleAndApply, SelectionFrequenciesMatchSoftmax) {
  const auto p = two_op_policy();
  std::vector<double> counts(3, 0.0);
  const RngStream root(5, 0);
  for (std::uint64_t i = 0; i < 100000; ++i) counts[sample_trace(p, root.derive(i)).subpolicy] += 1.0;
  EXPECT_GT(oracle::chi_square_p_value(counts, p.selection_probabilities()), 0.001);
}

TEST(SampleAndApply, FiringFrequencyMatchesSigmoid) {
  const auto p = two_op_policy();
  double fired = 0.0, seen = 0.0;
  const RngStream root(6, 0);
  for (std::uint64_t i = 0; i < 50000; ++i) {
    const auto t = sample_trace(p, root.derive(i));
    if (t.subpolicy != 1) continue;
    seen += 1.0;
    fired += t.fired[0];
  }
  const double expected = sigmoid(1.1);
  EXPECT_NEAR(fired / seen, expected, 4.0 * std::sqrt(expected * (1 - expected) / seen));
}

TEST(LogProb, GradientMatchesFiniteDifferences) {
  const auto base = two_op_policy();
  const RngStream root(7, 0);
  for (std::uint64_t s = 0; s < 30; ++s) {
    const auto trace = sample_trace(base, root.derive(s));
    const auto analytic = flatten(trace_log_prob_gradient(base, trace));
    for (std::size_t i = 0; i < analytic.size(); ++i) {
      Policy p = base;
      const double h = 1e-5;
      logit_at(p, i) += h;
      const double up = trace_log_prob(p, trace);
      logit_at(p, i) -= 2 * h;
      const double down = trace_log_prob(p, trace);
      EXPECT_LT(oracle::relative_error(analytic[i], (up - down) / (2 * h)), 1e-4) << "logit " << i;
    }
  }
}

TEST(LogProb, HandValue) {
  Policy p;
  p.subpolicies = {SubPolicy{{PolicyOp{AugOpKind::Jitter, 0.0, 0.0}}}, SubPolicy{{PolicyOp{AugOpKind::Scale, 0.0, 0.0}}}};
  p.weights = {0.0, 0.0};
  p.magnitude_noise = 0.0;
  PolicyTrace t{1, {0}, {0.0}};
  EXPECT_NEAR(trace_log_prob(p, t), std::log(0.25), 1e-15);
}

TEST(Estimator, MatchesEnumeratedExpectation) {
  // K = 2 sub-policies with J = 1 op each. The reward depends only on the
  // discrete part of the trace, so its exact expected score-function gradient
  // is a finite sum over (k, fired).
  Policy p;
  p.subpolicies = {SubPolicy{{PolicyOp{AugOpKind::Jitter, 0.4, -0.3}}}, SubPolicy{{PolicyOp{AugOpKind::Rotate, -0.7, 0.2}}}};
  p.weights = {0.3, -0.2};
  const double reward[2][2] = {{1.0, -2.0}, {0.5, 3.0}};
  auto f = [&](const PolicyTrace& t) { return reward[t.subpolicy][t.fired[0]]; };

  const double w0 = std::exp(0.3), w1 = std::exp(-0.2);
  const double pk[2] = {w0 / (w0 + w1), w1 / (w0 + w1)};
  std::vector<double> exact(6, 0.0);  // w0, w1, p0, m0, p1, m1
  for (int k = 0; k < 2; ++k) {
    const double q = 1.0 / (1.0 + std::exp(-p.subpolicies[k].ops[0].p_logit));
    for (int b = 0; b < 2; ++b) {
      const double prob = pk[k] * (b ? q : 1 - q);
      const double r = reward[k][b];
      exact[0] += prob * r * ((k == 0) - pk[0]);
      exact[1] += prob * r * ((k == 1) - pk[1]);
      exact[2 + 2 * k] += prob * r * (b ? 1 - q : -q);
      // The magnitude term integrates to zero against a reward that ignores z.
    }
  }

  const std::size_t n = 100000;
  std::vector<double> sum(6, 0.0), sum2(6, 0.0);
  const RngStream root(8, 0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto t = sample_trace(p, root.derive(i));
    const auto g = flatten(trace_log_prob_gradient(p, t));
    for (std::size_t j = 0; j < 6; ++j) {
      const double v = f(t) * g[j];
      sum[j] += v;
      sum2[j] += v * v;
    }
  }
  for (std::size_t j = 0; j < 6; ++j) {
    const double mean = sum[j] / n;
    const double se = std::sqrt((sum2[j] / n - mean * mean) / n);
    EXPECT_LE(std::abs(mean - exact[j]), 3.0 * se) << "component " << j;
  }
}

TEST(PolicyJson, RoundTripPreservesSampling) {
  const auto p = two_op_policy();
  const auto back = Policy::from_json(nlohmann::json::parse(p.to_json().dump()));
  EXPECT_EQ(back, p);
  std::mt19937_64 gen(9);
  const auto x = fixture::random_series(gen, 16, 2);
  for (std::uint64_t s = 0; s < 20; ++s) {
    const auto a = sample_and_apply(p, x, RngStream(s, 1));
    const auto b = sample_and_apply(back, x, RngStream(s, 1));
    EXPECT_EQ(a.series, b.series);
    EXPECT_EQ(a.trace, b.trace);
  }
}

TEST(PolicyJson, RejectsBadInput) {
  auto j = two_op_policy().to_json();
  j["version"] = 7;
  EXPECT_THROW(Policy::from_json(j), ValidationError);
  j = two_op_policy().to_json();
  j["subpolicies"][0]["ops"][0]["kind"] = "shear";
  EXPECT_THROW(Policy::from_json(j), ValidationError);
  j = two_op_policy().to_json();
  j["weights"] = {1.0};
  EXPECT_THROW(Policy::from_json(j), ValidationError);
}

TEST(PolicyStep, FirstStepHasZeroAdvantage) {
  auto policy = two_op_policy();
  const auto before = policy;
  const auto data = labeled_set(16, 10);
  auto spec = ModelSpec::mlp(12, 1, 2, 0.02);
  Model model = Model::create(spec, RngStream(10, 0));
  const Model model_before = model;
  PolicyOptimizerState state(model);
  const auto stats = policy_step(policy, model, data.samples().subspan(0, 8), data.samples().subspan(8, 8), state,
                                 RngStream(10, 1));
  EXPECT_EQ(stats.advantage, 0.0);
  EXPECT_EQ(policy, before);
  EXPECT_FALSE(model == model_before);
  ASSERT_TRUE(state.baseline.has_value());
  EXPECT_DOUBLE_EQ(*state.baseline, stats.val_loss);
}

TEST(PolicyStep, LaterStepsMoveLogitsAndKeepSimplex) {
  auto policy = two_op_policy();
  const auto data = labeled_set(16, 11);
  Model model = Model::create(ModelSpec::mlp(12, 1, 2, 0.02), RngStream(11, 0));
  PolicyOptimizerState state(model, TrainConfig{}, 0.5);
  bool moved = false;
  for (std::uint64_t s = 0; s < 10; ++s) {
    const auto before = policy;
    const auto stats = policy_step(policy, model, data.samples().subspan(0, 8), data.samples().subspan(8, 8), state,
                                   RngStream(11, s));
    if (stats.advantage != 0.0) moved = moved || !(policy == before);
    const auto probs = policy.selection_probabilities();
    double total = 0.0;
    for (double v : probs) {
      EXPECT_GE(v, 0.0);
      total += v;
    }
    EXPECT_NEAR(total, 1.0, 1e-12);
  }
  EXPECT_TRUE(moved);
}

TEST(PolicyStep, NumericFailureLeavesStateUntouched) {
  auto policy = two_op_policy();
  const auto data = labeled_set(8, 12);
  Model model = Model::create(ModelSpec::mlp(12, 1, 2, 0.02), RngStream(12, 0));
  model.parameters()[0] = 1e308;
  model.parameters()[1] = -1e308;
  const auto policy_before = policy;
  const Model model_before = model;
  PolicyOptimizerState state(model);
  EXPECT_THROW(policy_step(policy, model, data.samples().subspan(0, 4), data.samples().subspan(4, 4), state,
                           RngStream(12, 1)),
               NumericError);
  EXPECT_EQ(policy, policy_before);
  EXPECT_TRUE(model == model_before);
  EXPECT_FALSE(state.baseline.has_value());
  EXPECT_EQ(state.model_optimizer.steps(), 0);
}

TEST(Search, TrajectoryShapeAndCsv) {
  SyntheticSpec s;
  s.length = 16;
  s.samples_per_class = 20;
  s.seed = 13;
  const auto data = generate_synthetic(s);
  Model model = Model::create(ModelSpec::mlp(16, 1, 2, 0.02), RngStream(13, 0));
  TrainConfig cfg;
  cfg.epochs = 4;
  cfg.batch_size = 8;
  SearchConfig sc;
  sc.num_subpolicies = 5;
  const auto policy = init_policy(sc.ops_per_subpolicy, sc.num_subpolicies, sc.pool, RngStream(13, 1));
  std::size_t steps = 0;
  const auto report = search_policy(policy, model, data.train, data.val, cfg, sc, RngStream(13, 2),
                                    MagnitudeTable::builtin(), &data.test,
                                    [&](const Policy& p, const PolicyStepStats&) {
                                      ++steps;
                                      EXPECT_NO_THROW(p.validate());
                                    });
  EXPECT_EQ(steps, 4u * 3u);
  const auto table = export_trajectory(report.trajectory);
  ASSERT_EQ(table.epochs.size(), 5u);
  for (double v : table.probabilities[0]) EXPECT_NEAR(v, 0.2, 1e-15);
  for (const auto& row : table.probabilities) {
    double total = 0.0;
    for (double v : row) total += v;
    EXPECT_NEAR(total, 1.0, 1e-9);
  }
  std::ostringstream csv;
  write_trajectory_csv(table, csv);
  const auto text = csv.str();
  EXPECT_EQ(text.substr(0, text.find('\n')), "epoch,subpolicy_id,probability");
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 1 + 5 * 5);
  EXPECT_NE(text.find("\n0,0,0.2\n"), std::string::npos);

  Model again = Model::create(ModelSpec::mlp(16, 1, 2, 0.02), RngStream(13, 0));
  const auto rerun = search_policy(policy, again, data.train, data.val, cfg, sc, RngStream(13, 2),
                                   MagnitudeTable::builtin(), &data.test);
  EXPECT_EQ(rerun.policy, report.policy);
  EXPECT_TRUE(rerun.training.same_numbers(report.training));
}
