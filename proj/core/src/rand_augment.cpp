#include "tsaug/rand_augment.hpp"

#include <string>

#include "tsaug/error.hpp"
#include "tsaug/parallel.hpp"

namespace tsaug {

void RandAugmentConfig::validate() const {
  if (num_ops < 0 || num_ops > kMaxRandAugmentOps) {
    throw ValidationError("randaugment: J must lie in [0, 10], got " + std::to_string(num_ops));
  }
  if (magnitude < 0 || magnitude > static_cast<int>(kMaxMagnitudeLevel)) {
    throw ValidationError("randaugment: M must lie in [0, 30], got " + std::to_string(magnitude));
  }
  if (pool.empty()) throw ValidationError("randaugment: op pool is empty");
}

std::vector<AugOpKind> draw_ops(const RandAugmentConfig& cfg, RngStream rng) {
  cfg.validate();
  std::vector<AugOpKind> ops(static_cast<std::size_t>(cfg.num_ops));
  for (auto& op : ops) op = cfg.pool[rng.uniform_index(cfg.pool.size())];
  return ops;
}

std::vector<ChainStep> rand_augment_chain(const RandAugmentConfig& cfg, std::span<const AugOpKind> ops,
                                          std::size_t length, const MagnitudeTable& table) {
  std::vector<ChainStep> chain;
  chain.reserve(ops.size());
  for (auto kind : ops) {
    chain.push_back({kind, fit_to_length(kind, table.params_for_level(kind, cfg.magnitude), length)});
  }
  return chain;
}

TimeSeries rand_augment(const TimeSeries& x, const RandAugmentConfig& cfg, RngStream rng, const MagnitudeTable& table,
                        const OpObserver& observer) {
  const auto ops = draw_ops(cfg, rng.derive(0));
  const auto chain = rand_augment_chain(cfg, ops, x.length(), table);
  return apply_chain(x, chain, rng.derive(1), observer);
}

Dataset rand_augment_dataset(const Dataset& d, const RandAugmentConfig& cfg, RngStream rng, std::size_t threads,
                             const MagnitudeTable& table) {
  cfg.validate();
  std::vector<std::optional<TimeSeries>> slots(d.size());
  parallel_for(d.size(), threads, [&](std::size_t i) { slots[i] = rand_augment(d[i], cfg, rng.derive(i), table); });
  std::vector<TimeSeries> out;
  out.reserve(d.size());
  for (auto& s : slots) out.push_back(std::move(*s));
  return d.with_samples(std::move(out));
}

}  // namespace tsaug
