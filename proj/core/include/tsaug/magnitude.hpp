#pragma once

#include <array>
#include <filesystem>
#include <string>

#include <nlohmann/json.hpp>

#include "tsaug/augment.hpp"

namespace tsaug {

inline constexpr double kMaxMagnitudeLevel = 30.0;

struct MagnitudeRange {
  bool has_magnitude = true;  // false for rotate
  double lo = 0.0;
  double hi = 0.0;
  double default_value = 0.0;
};

// Per-op magnitude ranges and defaults. A level m in [0, 30] maps linearly to
// lo + (m / 30) * (hi - lo) and is written into the op's controlling field:
// sigma (jitter, scale, magwarp, timewarp), num_segments (permute, rounded,
// at least 1) or window_frac (window_slice, window_warp with K fixed at 2).
class MagnitudeTable {
 public:
  static constexpr int kSchemaVersion = 1;

  static const MagnitudeTable& builtin();
  // Schema: {"version": 1, "ops": {"jitter": {"range_lo":0,"range_hi":0.2,"default":0.03}, ..., "rotate": null}}
  static MagnitudeTable from_json(const nlohmann::json& j);
  static MagnitudeTable load(const std::filesystem::path& path);
  nlohmann::json to_json() const;

  const MagnitudeRange& range(AugOpKind kind) const { return ranges_[static_cast<std::size_t>(kind)]; }

  double value_for_level(AugOpKind kind, double level) const;
  OpParams params_for_level(AugOpKind kind, double level) const;
  OpParams default_params(AugOpKind kind) const;

 private:
  std::array<MagnitudeRange, kAllOps.size()> ranges_{};
};

// Clamps level-derived params to what a series of `length` steps supports
// (permute N <= T).
OpParams fit_to_length(AugOpKind kind, OpParams params, std::size_t length);

}  // namespace tsaug
