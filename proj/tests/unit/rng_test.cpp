#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "oracles.hpp"
#include "tsaug/rng.hpp"

using tsaug::RngStream;

TEST(Rng, SameSeedAndStreamReplay) {
  RngStream a(42, 7), b(42, 7);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(a.next_u64(), b.next_u64());
}

TEST(Rng, DistinctStreamsDiffer) {
  RngStream a(42, 0), b(42, 1), c(43, 0);
  const auto va = a.next_u64();
  EXPECT_NE(va, b.next_u64());
  EXPECT_NE(va, c.next_u64());
}

TEST(Rng, DeriveIgnoresParentConsumption) {
  RngStream parent(9, 3);
  const auto before = parent.derive(5);
  for (int i = 0; i < 17; ++i) parent.next_u64();
  auto after = parent.derive(5);
  auto copy = before;
  EXPECT_EQ(copy.next_u64(), after.next_u64());
  EXPECT_EQ(tsaug::derive_stream(parent, 5).stream_id(), before.stream_id());
}

TEST(Rng, DerivedChildrenAreDistinct) {
  RngStream root(1, 0);
  std::set<std::uint64_t> ids;
  for (std::uint64_t i = 0; i < 1000; ++i) ids.insert(root.derive(i).stream_id());
  EXPECT_EQ(ids.size(), 1000u);
  EXPECT_NE(root.derive(0).derive(1).stream_id(), root.derive(1).derive(0).stream_id());
}

TEST(Rng, UniformInUnitInterval) {
  RngStream r(5, 0);
  double sum = 0.0;
  for (int i = 0; i < 100000; ++i) {
    const double u = r.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    sum += u;
  }
  EXPECT_NEAR(sum / 100000, 0.5, 0.005);
}

TEST(Rng, UniformIndexIsUniform) {
  RngStream r(11, 0);
  std::vector<double> counts(7, 0.0);
  for (int i = 0; i < 70000; ++i) counts[r.uniform_index(7)] += 1.0;
  EXPECT_GT(oracle::chi_square_p_value(counts, std::vector<double>(7, 1.0 / 7)), 0.001);
}

TEST(Rng, NormalMoments) {
  RngStream r(3, 0);
  const int n = 200000;
  double s = 0.0, s2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = r.normal(2.0, 0.5);
    s += x;
    s2 += x * x;
  }
  const double mean = s / n;
  EXPECT_NEAR(mean, 2.0, 0.01);
  EXPECT_NEAR(std::sqrt(s2 / n - mean * mean), 0.5, 0.005);
}

TEST(Rng, ZeroStddevIsExact) {
  RngStream r(3, 0);
  for (int i = 0; i < 10; ++i) EXPECT_EQ(r.normal(1.0, 0.0), 1.0);
}
