#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "tsaug/auto_augment.hpp"
#include "tsaug/metrics.hpp"
#include "tsaug_cli/run_config.hpp"

namespace tsaug::cli {

// Every grid/sweep cell for (seed s, backbone b) runs on
// RngStream(s, kGridStream).derive(b): model init from derive(0), training
// from derive(1), auto-policy init from derive(2). All augmentations of a
// cell therefore see the same initialization and batch order.
inline constexpr std::uint64_t kGridStream = 1;
// Policy search for seed s runs on RngStream(s, kSearchStream).
inline constexpr std::uint64_t kSearchStream = 2;

struct GridRow {
  std::string backbone;
  std::string augmentation;
  double mean_acc = 0.0;
  double std_acc = 0.0;  // sample standard deviation over seeds; 0 for one seed
  std::vector<std::uint64_t> seeds;  // seeds that completed
};

struct CellFailure {
  std::string backbone;
  std::string augmentation;
  std::uint64_t seed = 0;
  std::string message;
};

struct GridResult {
  std::vector<GridRow> rows;
  std::vector<CellFailure> failures;
};

using ProgressFn = std::function<void(const std::string&)>;

// Test accuracy of one cell. `augmentation` is a grid entry name.
double run_grid_cell(const RunConfig& cfg, const DatasetSplits& data, const MagnitudeTable& table,
                     std::size_t backbone_index, const std::string& augmentation, std::uint64_t seed);

// Rows ordered by backbone, then augmentation as configured. A cell that
// throws NumericError is recorded as a failure and left out of its row.
GridResult run_grid(const RunConfig& cfg, const DatasetSplits& data, std::size_t threads,
                    const ProgressFn& progress = {});

struct SweepRow {
  std::string sweep;  // "J" or "M"
  std::string backbone;
  int num_ops = 0;
  int magnitude = 0;
  double mean_acc = 0.0;
  double std_acc = 0.0;
  std::vector<std::uint64_t> seeds;
};

struct SweepResult {
  std::vector<SweepRow> rows;
  std::vector<CellFailure> failures;
};

// randaugment over J_values at fixed_M, then M_values at fixed_J, per
// backbone, on the grid cell streams.
SweepResult run_sweep(const RunConfig& cfg, const DatasetSplits& data, std::size_t threads,
                      const ProgressFn& progress = {});

// Policy to start a search from: explicit sub-policies (every weight 0,
// p = 0.5, level 15) or init_policy over the configured pool.
Policy initial_policy(const RunConfig& cfg, RngStream rng);

struct SearchOutcome {
  std::uint64_t seed = 0;
  SearchReport report;
  double test_accuracy = 0.0;
};

// Joint policy/model search on backbones[0]. Stream RngStream(seed,
// kSearchStream): policy init derive(0), model init derive(1), search
// derive(2).
SearchOutcome run_search(const RunConfig& cfg, const DatasetSplits& data, std::uint64_t seed);

// scatter_sweep on backbones[0] over the configured metric augmentations.
std::vector<MetricReport> run_metrics(const RunConfig& cfg, const DatasetSplits& data, std::size_t threads);

}  // namespace tsaug::cli
