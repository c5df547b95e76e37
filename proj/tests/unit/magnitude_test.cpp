#include <gtest/gtest.h>

#include "tsaug/error.hpp"
#include "tsaug/magnitude.hpp"

using namespace tsaug;

TEST(MagnitudeTable, BuiltinRanges) {
  const auto& t = MagnitudeTable::builtin();
  struct Row {
    AugOpKind kind;
    double lo, hi, def;
  };
  const Row rows[] = {{AugOpKind::Jitter, 0.0, 0.2, 0.03},     {AugOpKind::Scale, 0.0, 0.5, 0.1},
                      {AugOpKind::Permute, 0.0, 8.0, 5.0},     {AugOpKind::MagWarp, 0.0, 0.5, 0.2},
                      {AugOpKind::TimeWarp, 0.0, 0.5, 0.2},    {AugOpKind::WindowSlice, 0.5, 1.0, 0.9},
                      {AugOpKind::WindowWarp, 0.0, 0.3, 0.1}};
  for (const auto& r : rows) {
    EXPECT_TRUE(t.range(r.kind).has_magnitude);
    EXPECT_EQ(t.range(r.kind).lo, r.lo);
    EXPECT_EQ(t.range(r.kind).hi, r.hi);
    EXPECT_EQ(t.range(r.kind).default_value, r.def);
  }
  EXPECT_FALSE(t.range(AugOpKind::Rotate).has_magnitude);
}

TEST(MagnitudeTable, LinearLevelMapping) {
  const auto& t = MagnitudeTable::builtin();
  EXPECT_NEAR(t.params_for_level(AugOpKind::Jitter, 12).sigma, 0.08, 1e-15);
  EXPECT_NEAR(t.params_for_level(AugOpKind::Scale, 12).sigma, 0.2, 1e-15);
  EXPECT_EQ(t.params_for_level(AugOpKind::WindowSlice, 0).window_frac, 0.5);
  EXPECT_EQ(t.params_for_level(AugOpKind::WindowSlice, 30).window_frac, 1.0);
  EXPECT_EQ(t.params_for_level(AugOpKind::Permute, 0).num_segments, 1);
  EXPECT_EQ(t.params_for_level(AugOpKind::Permute, 30).num_segments, 8);
  EXPECT_EQ(t.params_for_level(AugOpKind::Permute, 12).num_segments, 3);  // 3.2 rounds to 3
  EXPECT_EQ(t.params_for_level(AugOpKind::WindowWarp, 30).stretch, 2.0);
  EXPECT_THROW(t.value_for_level(AugOpKind::Jitter, 31), ValidationError);
  EXPECT_THROW(t.value_for_level(AugOpKind::Jitter, -1), ValidationError);
}

TEST(MagnitudeTable, DefaultParams) {
  const auto& t = MagnitudeTable::builtin();
  EXPECT_EQ(t.default_params(AugOpKind::WindowSlice).window_frac, 0.9);
  EXPECT_EQ(t.default_params(AugOpKind::Permute).num_segments, 5);
  EXPECT_EQ(t.default_params(AugOpKind::WindowWarp).stretch, 2.0);
}

TEST(MagnitudeTable, JsonRoundTripAndShippedFile) {
  const auto& t = MagnitudeTable::builtin();
  const auto back = MagnitudeTable::from_json(t.to_json());
  for (auto k : kAllOps) {
    EXPECT_EQ(back.range(k).lo, t.range(k).lo);
    EXPECT_EQ(back.range(k).hi, t.range(k).hi);
    EXPECT_EQ(back.range(k).default_value, t.range(k).default_value);
    EXPECT_EQ(back.range(k).has_magnitude, t.range(k).has_magnitude);
  }
  const auto shipped = MagnitudeTable::load(TSAUG_SOURCE_DIR "/configs/magnitude_table.json");
  EXPECT_EQ(shipped.to_json(), t.to_json());
}

TEST(MagnitudeTable, RejectsBadJson) {
  auto j = MagnitudeTable::builtin().to_json();
  j["version"] = 2;
  EXPECT_THROW(MagnitudeTable::from_json(j), ValidationError);
  j = MagnitudeTable::builtin().to_json();
  j["ops"].erase("scale");
  EXPECT_THROW(MagnitudeTable::from_json(j), ValidationError);
  j = MagnitudeTable::builtin().to_json();
  j["ops"]["scale"]["default"] = 5.0;
  EXPECT_THROW(MagnitudeTable::from_json(j), ValidationError);
}

TEST(FitToLength, ClampsPermuteSegments) {
  OpParams p;
  p.num_segments = 8;
  EXPECT_EQ(fit_to_length(AugOpKind::Permute, p, 5).num_segments, 5);
  EXPECT_EQ(fit_to_length(AugOpKind::Permute, p, 50).num_segments, 8);
}
