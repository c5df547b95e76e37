#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>

#include "tsaug/series.hpp"

namespace tsaug {

// Long-form CSV: header `series_id,label,t,ch0,...,ch{C-1}`, one row per
// time step, rows sorted by (series_id, t) with t = 0..T-1. An empty label
// field marks an unlabeled series. Doubles are written in shortest
// round-trip form. Blank lines and lines starting with '#' are skipped on
// read.
void write_csv(const Dataset& d, std::ostream& out);
void save_csv(const Dataset& d, const std::filesystem::path& path);

struct CsvOptions {
  std::optional<std::size_t> length;    // reject series of any other length
  std::optional<std::size_t> channels;  // reject other channel counts
  std::size_t num_classes = 0;          // 0: infer as max label + 1
  Split split = Split::Train;
};

// Errors carry `<source>:<line>` or the offending series id.
Dataset read_csv(std::istream& in, const CsvOptions& options, std::string_view source = "<csv>");
Dataset load_csv(const std::filesystem::path& path, const CsvOptions& options);

struct DatasetSplits {
  Dataset train;
  Dataset val;
  Dataset test;
};

// JSON manifest, schema version 1:
//   {"version": 1, "name": str, "T": int, "C": int, "num_classes": int,
//    "train": path, "val": path, "test": path, "normalize": bool}
// Relative paths resolve against the manifest's directory.
struct DatasetManifest {
  static constexpr int kVersion = 1;
  std::string name;
  std::size_t length = 0;
  std::size_t channels = 0;
  std::size_t num_classes = 0;
  std::filesystem::path train_path;
  std::filesystem::path val_path;
  std::filesystem::path test_path;
  bool normalize = true;

  static DatasetManifest load(const std::filesystem::path& path);
  void save(const std::filesystem::path& path) const;
};

// When normalize is set, z-score statistics are fitted on train only and
// applied to all three splits.
DatasetSplits load_dataset(const DatasetManifest& manifest);

enum class SyntheticKind { SineVsFrequency, TrendVsFlat, SignOfMean };

std::string_view to_string(SyntheticKind kind);
std::optional<SyntheticKind> parse_synthetic_kind(std::string_view name);

// Two-class generators:
//   sine-vs-frequency  class k: sin(2*pi*f_k*t/T) + noise, f_0 = 2, f_1 = 5
//   trend-vs-flat      class 0: noise; class 1: ramp from -1 to 1 + noise
//   sign-of-mean       -0.5 or +0.5 plus noise; label = [mean > 0]
// Each class is split 60/20/20 into train/val/test.
struct SyntheticSpec {
  SyntheticKind kind = SyntheticKind::SineVsFrequency;
  std::size_t length = 64;
  std::size_t channels = 1;
  std::size_t samples_per_class = 100;
  double noise = 0.1;
  std::uint64_t seed = 0;

  void validate() const;
};

DatasetSplits generate_synthetic(const SyntheticSpec& spec);

// Writes <dir>/<name>_{train,val,test}.csv and <dir>/<name>.json; returns the
// manifest path.
std::filesystem::path save_dataset(const DatasetSplits& splits, const std::filesystem::path& dir,
                                   const std::string& name, bool normalize);

}  // namespace tsaug
