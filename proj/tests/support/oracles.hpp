#pragma once

// Independent reference computations used as test oracles. Nothing here calls
// into the library under test.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace oracle {

// Gaussian elimination with partial pivoting on a dense system.
inline std::vector<double> solve_dense(std::vector<std::vector<double>> a, std::vector<double> b) {
  const std::size_t n = b.size();
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    for (std::size_t r = col + 1; r < n; ++r) {
      if (std::abs(a[r][col]) > std::abs(a[pivot][col])) pivot = r;
    }
    std::swap(a[col], a[pivot]);
    std::swap(b[col], b[pivot]);
    if (a[col][col] == 0.0) throw std::runtime_error("singular system");
    for (std::size_t r = col + 1; r < n; ++r) {
      const double f = a[r][col] / a[col][col];
      for (std::size_t k = col; k < n; ++k) a[r][k] -= f * a[col][k];
      b[r] -= f * b[col];
    }
  }
  std::vector<double> x(n);
  for (std::size_t i = n; i-- > 0;) {
    double s = b[i];
    for (std::size_t k = i + 1; k < n; ++k) s -= a[i][k] * x[k];
    x[i] = s / a[i][i];
  }
  return x;
}

// Natural cubic spline through (xs, ys) evaluated at x, using second
// derivatives M from the full dense moment system. Extrapolates with the
// boundary interval's cubic.
inline double natural_spline(const std::vector<double>& xs, const std::vector<double>& ys, double x) {
  const std::size_t n = xs.size();
  if (n == 2) return ys[0] + (ys[1] - ys[0]) * (x - xs[0]) / (xs[1] - xs[0]);
  std::vector<std::vector<double>> a(n, std::vector<double>(n, 0.0));
  std::vector<double> rhs(n, 0.0);
  a[0][0] = 1.0;
  a[n - 1][n - 1] = 1.0;
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const double h0 = xs[i] - xs[i - 1];
    const double h1 = xs[i + 1] - xs[i];
    a[i][i - 1] = h0 / 6.0;
    a[i][i] = (h0 + h1) / 3.0;
    a[i][i + 1] = h1 / 6.0;
    rhs[i] = (ys[i + 1] - ys[i]) / h1 - (ys[i] - ys[i - 1]) / h0;
  }
  const auto m = solve_dense(a, rhs);
  std::size_t k = 0;
  while (k + 2 < n && x > xs[k + 1]) ++k;
  const double h = xs[k + 1] - xs[k];
  const double A = (xs[k + 1] - x) / h;
  const double B = (x - xs[k]) / h;
  return A * ys[k] + B * ys[k + 1] + ((A * A * A - A) * m[k] + (B * B * B - B) * m[k + 1]) * h * h / 6.0;
}

// Piecewise-linear interpolation of samples at integer positions 0..n-1.
inline double linear_at(const std::vector<double>& v, double pos) {
  pos = std::clamp(pos, 0.0, static_cast<double>(v.size() - 1));
  const auto i = static_cast<std::size_t>(std::floor(pos));
  if (i + 1 >= v.size()) return v.back();
  const double f = pos - static_cast<double>(i);
  return v[i] * (1.0 - f) + v[i + 1] * f;
}

// Resamples v onto n points spanning [0, v.size()-1].
inline std::vector<double> linear_resample(const std::vector<double>& v, std::size_t n) {
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = linear_at(v, static_cast<double>(i) * static_cast<double>(v.size() - 1) / static_cast<double>(n - 1));
  }
  return out;
}

// Regularized upper incomplete gamma Q(a, x).
inline double gamma_q(double a, double x) {
  if (x <= 0.0) return 1.0;
  const double log_prefix = -x + a * std::log(x) - std::lgamma(a);
  if (x < a + 1.0) {
    double term = 1.0 / a, sum = term;
    for (int n = 1; n < 1000; ++n) {
      term *= x / (a + n);
      sum += term;
      if (std::abs(term) < std::abs(sum) * 1e-16) break;
    }
    return 1.0 - sum * std::exp(log_prefix);
  }
  // Lentz continued fraction.
  double b = x + 1.0 - a, c = 1e300, d = 1.0 / b, h = d;
  for (int i = 1; i < 1000; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < 1e-300) d = 1e-300;
    c = b + an / c;
    if (std::abs(c) < 1e-300) c = 1e-300;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < 1e-16) break;
  }
  return std::exp(log_prefix) * h;
}

// Pearson chi-square p-value of observed counts against expected
// probabilities.
inline double chi_square_p_value(const std::vector<double>& observed, const std::vector<double>& expected_prob) {
  double total = 0.0;
  for (double o : observed) total += o;
  double stat = 0.0;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    const double e = total * expected_prob[i];
    stat += (observed[i] - e) * (observed[i] - e) / e;
  }
  return gamma_q(0.5 * static_cast<double>(observed.size() - 1), 0.5 * stat);
}

inline double relative_error(double a, double b, double floor = 1e-6) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), floor});
}

}  // namespace oracle
