#include "tsaug/spline.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "tsaug/error.hpp"

namespace tsaug {

CubicSpline CubicSpline::fit_natural(std::span<const double> xs, std::span<const double> ys) {
  const std::size_t n = xs.size();
  if (n != ys.size()) {
    throw ValidationError("spline knot count mismatch: " + std::to_string(n) + " positions, " +
                          std::to_string(ys.size()) + " values");
  }
  if (n < 2) throw ValidationError("spline needs at least 2 knots");
  std::vector<double> h(n - 1);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    h[i] = xs[i + 1] - xs[i];
    if (!(h[i] > 0.0)) throw ValidationError("spline knot positions must be strictly increasing");
  }

  // Second derivatives at the knots; natural ends pin m[0] = m[n-1] = 0 and
  // the interior solves a symmetric tridiagonal system (Thomas algorithm).
  std::vector<double> m(n, 0.0);
  if (n > 2) {
    const std::size_t k = n - 2;
    std::vector<double> diag(k), upper(k), rhs(k);
    for (std::size_t j = 0; j < k; ++j) {
      const std::size_t i = j + 1;
      diag[j] = 2.0 * (h[i - 1] + h[i]);
      upper[j] = h[i];
      rhs[j] = 6.0 * ((ys[i + 1] - ys[i]) / h[i] - (ys[i] - ys[i - 1]) / h[i - 1]);
    }
    for (std::size_t j = 1; j < k; ++j) {
      const double w = h[j] / diag[j - 1];  // sub-diagonal entry is h[j]
      diag[j] -= w * upper[j - 1];
      rhs[j] -= w * rhs[j - 1];
    }
    m[k] = rhs[k - 1] / diag[k - 1];
    for (std::size_t j = k - 1; j-- > 0;) m[j + 1] = (rhs[j] - upper[j] * m[j + 2]) / diag[j];
  }

  std::vector<Segment> segments(n - 1);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    segments[i].a = ys[i];
    segments[i].b = (ys[i + 1] - ys[i]) / h[i] - h[i] * (2.0 * m[i] + m[i + 1]) / 6.0;
    segments[i].c = m[i] / 2.0;
    segments[i].d = (m[i + 1] - m[i]) / (6.0 * h[i]);
  }
  return CubicSpline(std::vector<double>(xs.begin(), xs.end()), std::move(segments));
}

std::size_t CubicSpline::segment_index(double x) const {
  const auto it = std::upper_bound(knots_.begin(), knots_.end(), x);
  const auto idx = static_cast<std::ptrdiff_t>(it - knots_.begin()) - 1;
  return static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(idx, 0, static_cast<std::ptrdiff_t>(segments_.size()) - 1));
}

double CubicSpline::operator()(double x) const {
  const std::size_t i = segment_index(x);
  const double dx = x - knots_[i];
  const auto& s = segments_[i];
  return s.a + dx * (s.b + dx * (s.c + dx * s.d));
}

double CubicSpline::derivative(double x) const {
  const std::size_t i = segment_index(x);
  const double dx = x - knots_[i];
  const auto& s = segments_[i];
  return s.b + dx * (2.0 * s.c + 3.0 * s.d * dx);
}

double CubicSpline::second_derivative(double x) const {
  const std::size_t i = segment_index(x);
  const double dx = x - knots_[i];
  const auto& s = segments_[i];
  return 2.0 * s.c + 6.0 * s.d * dx;
}

std::vector<double> uniform_knot_positions(std::size_t length, std::size_t num_knots) {
  std::vector<double> positions(num_knots);
  const double span = static_cast<double>(length - 1);
  for (std::size_t i = 0; i < num_knots; ++i) {
    positions[i] = span * static_cast<double>(i) / static_cast<double>(num_knots - 1);
  }
  return positions;
}

std::vector<double> smooth_curve(std::size_t length, std::span<const double> knot_values) {
  const auto positions = uniform_knot_positions(length, knot_values.size());
  const auto spline = CubicSpline::fit_natural(positions, knot_values);
  std::vector<double> curve(length);
  for (std::size_t t = 0; t < length; ++t) curve[t] = spline(static_cast<double>(t));
  return curve;
}

void interpolate_row(std::span<const double> values, std::size_t length, std::size_t channels, double position,
                     std::span<double> out) {
  const double last = static_cast<double>(length - 1);
  position = std::clamp(position, 0.0, last);
  auto lo = static_cast<std::size_t>(std::floor(position));
  if (lo >= length - 1) {
    std::copy_n(values.begin() + static_cast<std::ptrdiff_t>((length - 1) * channels), channels, out.begin());
    return;
  }
  const double frac = position - static_cast<double>(lo);
  for (std::size_t c = 0; c < channels; ++c) {
    const double a = values[lo * channels + c];
    const double b = values[(lo + 1) * channels + c];
    out[c] = a + frac * (b - a);
  }
}

std::vector<double> resample_grid(std::span<const double> values, std::size_t length, std::size_t channels,
                                  std::size_t new_length) {
  if (new_length < 2) throw ValidationError("resample length must be at least 2");
  std::vector<double> out(new_length * channels);
  const double scale = static_cast<double>(length - 1);
  const double denom = static_cast<double>(new_length - 1);
  for (std::size_t j = 0; j < new_length; ++j) {
    const double position = static_cast<double>(j) * scale / denom;
    interpolate_row(values, length, channels, position, std::span<double>(out).subspan(j * channels, channels));
  }
  return out;
}

TimeSeries resample_linear(const TimeSeries& x, std::size_t new_length) {
  return x.with_values(new_length, resample_grid(x.values(), x.length(), x.channels(), new_length));
}

}  // namespace tsaug
