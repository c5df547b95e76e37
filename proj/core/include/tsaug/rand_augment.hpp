#pragma once

#include <cstddef>
#include <vector>

#include "tsaug/augment.hpp"
#include "tsaug/magnitude.hpp"
#include "tsaug/rng.hpp"
#include "tsaug/series.hpp"

namespace tsaug {

// randaugment(J, M): J ops drawn uniformly with replacement from `pool`, all
// at the shared magnitude level M.
struct RandAugmentConfig {
  int num_ops = 2;     // J
  int magnitude = 12;  // M, in [0, 30]
  std::vector<AugOpKind> pool{kAllOps.begin(), kAllOps.end()};

  // Throws ValidationError unless 0 <= J <= 10, 0 <= M <= 30 and the pool is
  // non-empty.
  void validate() const;

  friend bool operator==(const RandAugmentConfig&, const RandAugmentConfig&) = default;
};

inline constexpr int kMaxRandAugmentOps = 10;

std::vector<AugOpKind> draw_ops(const RandAugmentConfig& cfg, RngStream rng);

// The chain rand_augment applies to a series of `length` steps for the given
// op draws.
std::vector<ChainStep> rand_augment_chain(const RandAugmentConfig& cfg, std::span<const AugOpKind> ops,
                                          std::size_t length, const MagnitudeTable& table = MagnitudeTable::builtin());

// Ops are drawn from rng.derive(0); the chain runs on rng.derive(1).
TimeSeries rand_augment(const TimeSeries& x, const RandAugmentConfig& cfg, RngStream rng,
                        const MagnitudeTable& table = MagnitudeTable::builtin(), const OpObserver& observer = {});

// Sample i uses rng.derive(i); output does not depend on `threads`.
Dataset rand_augment_dataset(const Dataset& d, const RandAugmentConfig& cfg, RngStream rng, std::size_t threads = 1,
                             const MagnitudeTable& table = MagnitudeTable::builtin());

}  // namespace tsaug
