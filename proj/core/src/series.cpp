#include "tsaug/series.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "tsaug/error.hpp"

namespace tsaug {

TimeSeries::TimeSeries(std::size_t length, std::size_t channels, std::vector<double> values,
                       std::optional<int> label)
    : length_(length), channels_(channels), values_(std::move(values)), label_(label) {
  if (length_ < 2) throw ValidationError("time series needs at least 2 steps, got " + std::to_string(length_));
  if (channels_ < 1) throw ValidationError("time series needs at least 1 channel");
  if (values_.size() != length_ * channels_) {
    throw ValidationError("time series value count " + std::to_string(values_.size()) + " does not match " +
                          std::to_string(length_) + "x" + std::to_string(channels_));
  }
  for (double v : values_) {
    if (!std::isfinite(v)) throw ValidationError("time series contains a non-finite value");
  }
  if (label_ && *label_ < 0) throw ValidationError("negative class label");
}

TimeSeries TimeSeries::univariate(std::vector<double> values, std::optional<int> label) {
  const std::size_t n = values.size();
  return TimeSeries(n, 1, std::move(values), label);
}

std::vector<double> TimeSeries::channel(std::size_t c) const {
  std::vector<double> out(length_);
  for (std::size_t t = 0; t < length_; ++t) out[t] = at(t, c);
  return out;
}

TimeSeries TimeSeries::with_values(std::size_t length, std::vector<double> values) const {
  return TimeSeries(length, channels_, std::move(values), label_);
}

TimeSeries TimeSeries::with_label(std::optional<int> label) const {
  return TimeSeries(length_, channels_, values_, label);
}

std::string_view to_string(Split split) {
  switch (split) {
    case Split::Train: return "train";
    case Split::Val: return "val";
    case Split::Test: return "test";
  }
  return "unknown";
}

Dataset::Dataset(std::vector<TimeSeries> samples, std::size_t num_classes, Split split)
    : samples_(std::move(samples)), num_classes_(num_classes), split_(split) {
  if (num_classes_ == 0) throw ValidationError("dataset needs at least one class");
  for (std::size_t i = 0; i < samples_.size(); ++i) {
    const auto& s = samples_[i];
    if (s.length() != samples_.front().length() || s.channels() != samples_.front().channels()) {
      throw ValidationError("dataset sample " + std::to_string(i) + " has shape " + std::to_string(s.length()) +
                            "x" + std::to_string(s.channels()) + ", expected " +
                            std::to_string(samples_.front().length()) + "x" +
                            std::to_string(samples_.front().channels()));
    }
    if (s.label() && static_cast<std::size_t>(*s.label()) >= num_classes_) {
      throw ValidationError("dataset sample " + std::to_string(i) + " has label " + std::to_string(*s.label()) +
                            " outside [0, " + std::to_string(num_classes_) + ")");
    }
  }
}

Dataset Dataset::with_samples(std::vector<TimeSeries> samples) const {
  return Dataset(std::move(samples), num_classes_, split_);
}

Dataset Dataset::with_split(Split split) const { return Dataset(samples_, num_classes_, split); }

ChannelStats fit_zscore(const Dataset& d) {
  const std::size_t channels = d.channels();
  ChannelStats stats{std::vector<double>(channels, 0.0), std::vector<double>(channels, 0.0)};
  if (d.empty()) return stats;
  const double count = static_cast<double>(d.size() * d.length());
  for (const auto& s : d.samples()) {
    for (std::size_t t = 0; t < s.length(); ++t) {
      for (std::size_t c = 0; c < channels; ++c) stats.mean[c] += s.at(t, c);
    }
  }
  for (auto& m : stats.mean) m /= count;
  // Second pass for numerical stability.
  for (const auto& s : d.samples()) {
    for (std::size_t t = 0; t < s.length(); ++t) {
      for (std::size_t c = 0; c < channels; ++c) {
        const double dev = s.at(t, c) - stats.mean[c];
        stats.stddev[c] += dev * dev;
      }
    }
  }
  for (std::size_t c = 0; c < channels; ++c) {
    stats.stddev[c] = std::sqrt(stats.stddev[c] / count);
    if (stats.stddev[c] <= 1e-12 * std::max(1.0, std::abs(stats.mean[c]))) stats.stddev[c] = 0.0;
  }
  return stats;
}

Dataset apply_zscore(const Dataset& d, const ChannelStats& stats) {
  if (!d.empty() && (stats.mean.size() != d.channels() || stats.stddev.size() != d.channels())) {
    throw ValidationError("normalization statistics cover " + std::to_string(stats.mean.size()) +
                          " channels, dataset has " + std::to_string(d.channels()));
  }
  std::vector<TimeSeries> out;
  out.reserve(d.size());
  for (const auto& s : d.samples()) {
    std::vector<double> values(s.values().begin(), s.values().end());
    for (std::size_t i = 0; i < values.size(); ++i) {
      const std::size_t c = i % s.channels();
      values[i] = stats.stddev[c] == 0.0 ? 0.0 : (values[i] - stats.mean[c]) / stats.stddev[c];
    }
    out.push_back(s.with_values(std::move(values)));
  }
  return d.with_samples(std::move(out));
}

Dataset normalize_zscore(const Dataset& d) { return apply_zscore(d, fit_zscore(d)); }

}  // namespace tsaug
