#pragma once

#include <cstddef>
#include <random>
#include <vector>

#include "tsaug/series.hpp"

namespace fixture {

// Test-side randomness is deliberately independent of tsaug::RngStream.
inline tsaug::TimeSeries random_series(std::mt19937_64& gen, std::size_t length, std::size_t channels,
                                       std::optional<int> label = 0) {
  std::normal_distribution<double> n(0.0, 1.0);
  std::vector<double> v(length * channels);
  for (auto& x : v) x = n(gen);
  return tsaug::TimeSeries(length, channels, std::move(v), label);
}

inline tsaug::TimeSeries random_shape_series(std::mt19937_64& gen, std::size_t min_len = 8, std::size_t max_len = 256,
                                             std::size_t max_channels = 8) {
  std::uniform_int_distribution<std::size_t> len(min_len, max_len);
  std::uniform_int_distribution<std::size_t> ch(1, max_channels);
  const auto t = len(gen);
  const auto c = ch(gen);
  return random_series(gen, t, c, static_cast<int>(gen() % 3));
}

inline tsaug::TimeSeries ramp(std::size_t length, double slope = 1.0, double offset = 0.0) {
  std::vector<double> v(length);
  for (std::size_t t = 0; t < length; ++t) v[t] = offset + slope * static_cast<double>(t);
  return tsaug::TimeSeries::univariate(std::move(v), 0);
}

inline double max_abs_diff(std::span<const double> a, std::span<const double> b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace fixture
