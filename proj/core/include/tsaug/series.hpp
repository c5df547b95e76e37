#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace tsaug {

// One sample: a T x C grid stored time-major (row t holds all channels at
// step t). Immutable after construction.
class TimeSeries {
 public:
  // Throws ValidationError unless T >= 2, C >= 1, values.size() == T*C, all
  // values finite and label (if any) non-negative.
  TimeSeries(std::size_t length, std::size_t channels, std::vector<double> values,
             std::optional<int> label = std::nullopt);

  // Single-channel convenience.
  static TimeSeries univariate(std::vector<double> values, std::optional<int> label = std::nullopt);

  std::size_t length() const { return length_; }
  std::size_t channels() const { return channels_; }
  std::span<const double> values() const { return values_; }
  std::span<const double> row(std::size_t t) const {
    return std::span<const double>(values_).subspan(t * channels_, channels_);
  }
  double at(std::size_t t, std::size_t c) const { return values_[t * channels_ + c]; }
  std::vector<double> channel(std::size_t c) const;
  const std::optional<int>& label() const { return label_; }

  // Same label, new grid.
  TimeSeries with_values(std::size_t length, std::vector<double> values) const;
  TimeSeries with_values(std::vector<double> values) const { return with_values(length_, std::move(values)); }
  TimeSeries with_label(std::optional<int> label) const;

  friend bool operator==(const TimeSeries&, const TimeSeries&) = default;

 private:
  std::size_t length_;
  std::size_t channels_;
  std::vector<double> values_;
  std::optional<int> label_;
};

enum class Split { Train, Val, Test };

std::string_view to_string(Split split);

// Ordered, shape-homogeneous collection of series. Immutable after
// construction.
class Dataset {
 public:
  // Throws ValidationError on mixed shapes, num_classes == 0, or a label
  // outside [0, num_classes).
  Dataset(std::vector<TimeSeries> samples, std::size_t num_classes, Split split = Split::Train);

  std::size_t size() const { return samples_.size(); }
  bool empty() const { return samples_.empty(); }
  const TimeSeries& operator[](std::size_t i) const { return samples_[i]; }
  std::span<const TimeSeries> samples() const { return samples_; }
  std::size_t num_classes() const { return num_classes_; }
  Split split() const { return split_; }
  // Shape of every sample; 0 for an empty dataset.
  std::size_t length() const { return samples_.empty() ? 0 : samples_.front().length(); }
  std::size_t channels() const { return samples_.empty() ? 0 : samples_.front().channels(); }

  Dataset with_samples(std::vector<TimeSeries> samples) const;
  Dataset with_split(Split split) const;

  friend bool operator==(const Dataset&, const Dataset&) = default;

 private:
  std::vector<TimeSeries> samples_;
  std::size_t num_classes_;
  Split split_;
};

// Per-channel moments used for z-score normalization. A channel whose
// standard deviation is (numerically) zero is treated as constant and maps
// to 0.
struct ChannelStats {
  std::vector<double> mean;
  std::vector<double> stddev;
};

ChannelStats fit_zscore(const Dataset& d);
Dataset apply_zscore(const Dataset& d, const ChannelStats& stats);
// fit + apply on the same dataset: each channel ends with mean 0, population
// std 1.
Dataset normalize_zscore(const Dataset& d);

}  // namespace tsaug
