#include <gtest/gtest.h>

#include <random>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "tsaug/error.hpp"
#include "tsaug/rand_augment.hpp"

using namespace tsaug;

TEST(RandAugment, ConfigValidation) {
  RandAugmentConfig c;
  EXPECT_NO_THROW(c.validate());
  EXPECT_EQ(c.num_ops, 2);
  EXPECT_EQ(c.magnitude, 12);
  EXPECT_EQ(c.pool.size(), 8u);
  c.num_ops = 11;
  EXPECT_THROW(c.validate(), ValidationError);
  c = {};
  c.magnitude = 31;
  EXPECT_THROW(c.validate(), ValidationError);
  c = {};
  c.pool.clear();
  EXPECT_THROW(c.validate(), ValidationError);
}

TEST(RandAugment, ZeroOpsIsIdentity) {
  std::mt19937_64 gen(1);
  const auto x = fixture::random_series(gen, 30, 2);
  RandAugmentConfig c;
  c.num_ops = 0;
  EXPECT_EQ(rand_augment(x, c, RngStream(1, 0)), x);
}

TEST(RandAugment, ChainFollowsLinearMapping) {
  RandAugmentConfig c;
  const std::vector<AugOpKind> ops{AugOpKind::Jitter, AugOpKind::Scale};
  const auto chain = rand_augment_chain(c, ops, 50);
  ASSERT_EQ(chain.size(), 2u);
  EXPECT_EQ(chain[0].kind, AugOpKind::Jitter);
  EXPECT_NEAR(chain[0].params.sigma, 0.08, 1e-15);
  EXPECT_EQ(chain[1].kind, AugOpKind::Scale);
  EXPECT_NEAR(chain[1].params.sigma, 0.2, 1e-15);
}

TEST(RandAugment, AppliesDrawnChain) {
  std::mt19937_64 gen(2);
  const auto x = fixture::random_series(gen, 40, 3);
  RandAugmentConfig c;
  c.num_ops = 3;
  const RngStream rng(2, 0);
  const auto ops = draw_ops(c, rng.derive(0));
  const auto chain = rand_augment_chain(c, ops, x.length());
  EXPECT_EQ(rand_augment(x, c, rng), apply_chain(x, chain, rng.derive(1)));
}

TEST(RandAugment, ExactlyJOpsPerSample) {
  std::mt19937_64 gen(3);
  const auto x = fixture::random_series(gen, 16, 1);
  for (int j = 0; j <= 4; ++j) {
    RandAugmentConfig c;
    c.num_ops = j;
    for (std::uint64_t s = 0; s < 200; ++s) {
      int count = 0;
      rand_augment(x, c, RngStream(s, 0), MagnitudeTable::builtin(), [&](AugOpKind) { ++count; });
      ASSERT_EQ(count, j);
    }
  }
}

TEST(RandAugment, UniformSelection) {
  RandAugmentConfig c;
  c.num_ops = 1;
  std::vector<double> counts(8, 0.0);
  const RngStream root(4, 0);
  for (std::uint64_t i = 0; i < 10000; ++i) counts[static_cast<std::size_t>(draw_ops(c, root.derive(i))[0])] += 1.0;
  EXPECT_GT(oracle::chi_square_p_value(counts, std::vector<double>(8, 0.125)), 0.001);
}

TEST(RandAugment, RestrictedPool) {
  RandAugmentConfig c;
  c.num_ops = 5;
  c.pool = {AugOpKind::Rotate};
  const auto ops = draw_ops(c, RngStream(5, 0));
  EXPECT_EQ(ops, std::vector<AugOpKind>(5, AugOpKind::Rotate));
}

TEST(RandAugmentDataset, DeterministicAndThreadIndependent) {
  std::mt19937_64 gen(6);
  std::vector<TimeSeries> samples;
  for (int i = 0; i < 40; ++i) samples.push_back(fixture::random_series(gen, 24, 2, i % 2));
  const Dataset d(samples, 2);
  RandAugmentConfig c;
  const auto a = rand_augment_dataset(d, c, RngStream(6, 0), 1);
  const auto b = rand_augment_dataset(d, c, RngStream(6, 0), 1);
  const auto p = rand_augment_dataset(d, c, RngStream(6, 0), 4);
  EXPECT_EQ(a, b);
  EXPECT_EQ(a, p);
  EXPECT_NE(a, d);
  for (std::size_t i = 0; i < d.size(); ++i) EXPECT_EQ(a[i], rand_augment(d[i], c, RngStream(6, 0).derive(i)));
  c.num_ops = 0;
  EXPECT_EQ(rand_augment_dataset(d, c, RngStream(6, 0), 3), d);
}
