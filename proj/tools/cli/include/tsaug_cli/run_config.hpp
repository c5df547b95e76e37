#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "tsaug/auto_augment.hpp"
#include "tsaug/data_io.hpp"
#include "tsaug/magnitude.hpp"
#include "tsaug/metrics.hpp"
#include "tsaug/model.hpp"
#include "tsaug/rand_augment.hpp"
#include "tsaug/train.hpp"

namespace tsaug::cli {

// Where the experiment data comes from: a manifest on disk or a generator.
struct DatasetSource {
  std::optional<std::filesystem::path> manifest;
  SyntheticSpec synthetic;
};

struct PolicySettings {
  SearchConfig search;
  // Explicit op kinds per sub-policy; empty means init_policy draws them.
  std::vector<std::vector<AugOpKind>> subpolicies;
};

struct SweepSettings {
  std::vector<int> j_values{0, 1, 2, 3, 4, 5, 6};
  std::vector<int> m_values{0, 6, 12, 18, 24, 30};
  int fixed_magnitude = 12;  // M used by the J sweep
  int fixed_ops = 2;         // J used by the M sweep
};

// One experiment run. Schema version 1; unknown keys are rejected.
//
//   {"version": 1, "seed": 0, "repeats": 3,
//    "dataset": {"manifest": "data/x.json"} | {"synthetic": {"kind", "length", "channels",
//                "samples_per_class", "noise", "seed"}},
//    "train": {"lr0", "lr_decay", "decay_every", "batch_size", "epochs"},
//    "backbones": ["mlp", "conv1d"], "width_multiplier": 1.0,
//    "magnitude_table": "path",
//    "grid": {"augmentations": ["none", "jitter", ..., "identity", "randaugment", "auto"]},
//    "randaugment": {"J": 2, "M": 12, "pool": [...]},
//    "policy": {"K": 14, "J": 2, "policy_lr": 0.05, "baseline_decay": 0.9,
//               "magnitude_noise": 0.5, "pool": [...], "subpolicies": [["rotate"], ["jitter"]]},
//    "sweep": {"J_values": [...], "M_values": [...], "fixed_M": 12, "fixed_J": 2},
//    "metrics": {"augmentations": "default" | "identity" |
//                [{"op": "jitter", "level": 6} | {"op": "jitter", "params": {"sigma": 2.0}} | {"op": "identity"}]},
//    "out": "results", "threads": 1}
struct RunConfig {
  static constexpr int kVersion = 1;

  std::uint64_t seed = 0;
  int repeats = 3;
  DatasetSource dataset;
  TrainConfig train;
  std::vector<ModelKind> backbones{ModelKind::Mlp, ModelKind::Conv1d};
  double width_multiplier = 1.0;
  std::optional<std::filesystem::path> magnitude_table;
  std::vector<std::string> grid_augmentations;
  RandAugmentConfig randaugment;
  PolicySettings policy;
  SweepSettings sweep;
  nlohmann::json metrics_augmentations = "default";
  std::filesystem::path out = "results";
  std::size_t threads = 1;

  // Relative input paths (manifest, magnitude table) resolve against
  // `base_dir`; `out` stays relative to the working directory.
  static RunConfig from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {});
  static RunConfig load(const std::filesystem::path& path);

  // Every setting that influences results, with defaults filled in.
  nlohmann::json canonical() const;
  // FNV-1a 64 of canonical().dump(), as 16 hex digits. Ignores out/threads.
  std::string hash() const;
  // seed, seed + 1, ..., seed + repeats - 1.
  std::vector<std::uint64_t> seeds() const;

  MagnitudeTable load_magnitude_table() const;
  DatasetSplits load_data() const;
  ModelSpec model_spec(ModelKind kind, const DatasetSplits& data) const;
  std::vector<AugmentationRef> metric_augmentations(const MagnitudeTable& table) const;
};

// Default grid rows: no augmentation plus each of the eight ops at its
// default magnitude.
std::vector<std::string> default_grid_augmentations();

std::uint64_t fnv1a64(std::string_view bytes);
// 16 lowercase hex digits.
std::string hex64(std::uint64_t v);

}  // namespace tsaug::cli
