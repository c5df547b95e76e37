#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "tsaug/augment.hpp"
#include "tsaug/data_io.hpp"
#include "tsaug/magnitude.hpp"
#include "tsaug/model.hpp"
#include "tsaug/rand_augment.hpp"
#include "tsaug/rng.hpp"
#include "tsaug/train.hpp"

namespace tsaug {

// One augmentation tau: a fixed op chain (empty = identity) or randaugment.
struct AugmentationRef {
  std::string name;
  std::string params;  // display form, e.g. "sigma=0.03"
  std::variant<std::vector<ChainStep>, RandAugmentConfig> transform;

  static AugmentationRef identity();
  static AugmentationRef op(AugOpKind kind, const OpParams& params);
  // Op at a magnitude level, labelled "level=<m>".
  static AugmentationRef op_at_level(AugOpKind kind, double level,
                                     const MagnitudeTable& table = MagnitudeTable::builtin());
  static AugmentationRef chain(std::string name, std::vector<ChainStep> steps);
  static AugmentationRef rand_augment(const RandAugmentConfig& cfg);

  bool is_identity() const;
  TimeSeries apply(const TimeSeries& x, RngStream rng, const MagnitudeTable& table = MagnitudeTable::builtin()) const;
  Augmenter as_augmenter(const MagnitudeTable& table = MagnitudeTable::builtin()) const;
};

// Display form of the fields an op reads, e.g. "sigma=0.2 knots=4". Never
// contains a comma.
std::string describe_params(AugOpKind kind, const OpParams& params);

// Applies tau once per sample (sample i on rng.derive(i)); labels kept.
Dataset augment_dataset(const Dataset& d, const AugmentationRef& tau, RngStream rng,
                        const MagnitudeTable& table = MagnitudeTable::builtin());

// Acc(model, tau(val)) / Acc(model, val). Throws NumericError when the clean
// accuracy is 0.
double affinity(const Model& clean_model, const Dataset& val, const AugmentationRef& tau, RngStream rng,
                const MagnitudeTable& table = MagnitudeTable::builtin());

struct DiversityRun {
  double diversity = 0.0;
  TrainReport clean;
  TrainReport augmented;
};

// Trains a model from `spec` on clean data and another on tau-augmented data
// (re-augmented every epoch) from the same initialization and stream
// (init rng.derive(0), training rng.derive(1)); returns the ratio of final
// training losses. Throws NumericError if the clean loss is below 1e-12.
DiversityRun diversity_run(const ModelSpec& spec, const Dataset& train_set, const Dataset& val_set,
                           const TrainConfig& cfg, const AugmentationRef& tau, RngStream rng,
                           const MagnitudeTable& table = MagnitudeTable::builtin());
double diversity(const ModelSpec& spec, const Dataset& train_set, const Dataset& val_set, const TrainConfig& cfg,
                 const AugmentationRef& tau, RngStream rng, const MagnitudeTable& table = MagnitudeTable::builtin());

struct MetricReport {
  std::string aug_name;
  std::string params;
  double affinity = 0.0;
  double diversity = 0.0;
  double test_acc_delta = 0.0;  // augmented-model test accuracy minus clean baseline
  std::vector<std::uint64_t> seeds;
};

// For each seed: one clean model (shared by all tau), then per tau the
// affinity on val, the diversity ratio and the test-accuracy delta. Rows are
// averaged over seeds, one per tau in input order. Seed s uses
// RngStream(s, 0); results do not depend on `threads`.
std::vector<MetricReport> scatter_sweep(const DatasetSplits& data, const ModelSpec& spec,
                                        const std::vector<AugmentationRef>& augmentations, const TrainConfig& cfg,
                                        const std::vector<std::uint64_t>& seeds, std::size_t threads = 1,
                                        const MagnitudeTable& table = MagnitudeTable::builtin());

// 8 ops x 8 magnitude levels (2, 6, ..., 30) plus identity = 65 entries.
std::vector<AugmentationRef> default_sweep(const MagnitudeTable& table = MagnitudeTable::builtin());

}  // namespace tsaug
