#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "tsaug/series.hpp"

namespace tsaug {

// Piecewise cubic interpolant through (x_i, y_i) with natural boundary
// conditions (S'' = 0 at both ends). Outside [x_0, x_{n-1}] the first or last
// segment's cubic is extended.
class CubicSpline {
 public:
  struct Segment {
    double a, b, c, d;  // S(x) = a + b*dx + c*dx^2 + d*dx^3, dx = x - knot
  };

  // Throws ValidationError if sizes differ, fewer than 2 knots, or xs is not
  // strictly increasing.
  static CubicSpline fit_natural(std::span<const double> xs, std::span<const double> ys);

  double operator()(double x) const;
  double derivative(double x) const;
  double second_derivative(double x) const;

  std::span<const double> knots() const { return knots_; }
  std::span<const Segment> segments() const { return segments_; }

 private:
  CubicSpline(std::vector<double> knots, std::vector<Segment> segments)
      : knots_(std::move(knots)), segments_(std::move(segments)) {}
  std::size_t segment_index(double x) const;

  std::vector<double> knots_;
  std::vector<Segment> segments_;
};

inline CubicSpline fit_natural_cubic(std::span<const double> xs, std::span<const double> ys) {
  return CubicSpline::fit_natural(xs, ys);
}
inline double eval(const CubicSpline& s, double x) { return s(x); }

// Knot positions 0, (T-1)/(I-1), ..., T-1.
std::vector<double> uniform_knot_positions(std::size_t length, std::size_t num_knots);

// Evaluates the natural spline through `knot_values` (placed by
// uniform_knot_positions) at t = 0..length-1.
std::vector<double> smooth_curve(std::size_t length, std::span<const double> knot_values);

// Linear interpolation of a time-major grid at fractional time `position`
// (clamped to [0, T-1]); writes C values into `out`.
void interpolate_row(std::span<const double> values, std::size_t length, std::size_t channels, double position,
                     std::span<double> out);

// Resamples a time-major grid to `new_length` uniformly spaced positions
// spanning the same [0, T-1] interval. Endpoints are copied exactly.
std::vector<double> resample_grid(std::span<const double> values, std::size_t length, std::size_t channels,
                                  std::size_t new_length);

// Throws ValidationError if new_length < 2. Label preserved.
TimeSeries resample_linear(const TimeSeries& x, std::size_t new_length);

}  // namespace tsaug
