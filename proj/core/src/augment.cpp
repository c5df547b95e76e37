#include "tsaug/augment.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "tsaug/error.hpp"
#include "tsaug/spline.hpp"

namespace tsaug {

std::string_view to_string(AugOpKind kind) {
  switch (kind) {
    case AugOpKind::Jitter: return "jitter";
    case AugOpKind::Scale: return "scale";
    case AugOpKind::Rotate: return "rotate";
    case AugOpKind::Permute: return "permute";
    case AugOpKind::MagWarp: return "magwarp";
    case AugOpKind::TimeWarp: return "timewarp";
    case AugOpKind::WindowSlice: return "window_slice";
    case AugOpKind::WindowWarp: return "window_warp";
  }
  return "unknown";
}

std::optional<AugOpKind> parse_op(std::string_view name) {
  for (auto kind : kAllOps) {
    if (to_string(kind) == name) return kind;
  }
  return std::nullopt;
}

namespace {

void require_sigma(const OpParams& p, std::string_view op) {
  if (!std::isfinite(p.sigma) || p.sigma < 0.0) {
    throw ValidationError(std::string(op) + ": sigma must be finite and >= 0, got " + std::to_string(p.sigma));
  }
}

void require_knots(const OpParams& p, std::string_view op) {
  if (p.num_knots < 2) {
    throw ValidationError(std::string(op) + ": need at least 2 knots, got " + std::to_string(p.num_knots));
  }
}

}  // namespace

void validate_params(AugOpKind kind, const OpParams& p, std::size_t length) {
  const auto name = to_string(kind);
  switch (kind) {
    case AugOpKind::Jitter:
    case AugOpKind::Scale:
      require_sigma(p, name);
      break;
    case AugOpKind::Rotate:
      break;
    case AugOpKind::Permute:
      if (p.num_segments < 1 || static_cast<std::size_t>(p.num_segments) > length) {
        throw ValidationError("permute: segment count " + std::to_string(p.num_segments) + " outside [1, " +
                              std::to_string(length) + "]");
      }
      break;
    case AugOpKind::MagWarp:
    case AugOpKind::TimeWarp:
      require_sigma(p, name);
      require_knots(p, name);
      break;
    case AugOpKind::WindowSlice:
      if (!(p.window_frac > 0.0 && p.window_frac <= 1.0)) {
        throw ValidationError("window_slice: window fraction must lie in (0, 1], got " +
                              std::to_string(p.window_frac));
      }
      break;
    case AugOpKind::WindowWarp:
      if (!(p.window_frac >= 0.0 && p.window_frac <= 1.0)) {
        throw ValidationError("window_warp: window fraction must lie in [0, 1], got " +
                              std::to_string(p.window_frac));
      }
      if (!(std::isfinite(p.stretch) && p.stretch > 0.0)) {
        throw ValidationError("window_warp: stretch factor must be > 0, got " + std::to_string(p.stretch));
      }
      break;
  }
}

std::size_t window_length(std::size_t length, double window_frac) {
  const auto w = static_cast<std::size_t>(std::llround(window_frac * static_cast<double>(length)));
  return std::clamp<std::size_t>(w, 2, length);
}

// --- deterministic kernels

TimeSeries add_noise(const TimeSeries& x, std::span<const double> noise) {
  if (noise.size() != x.values().size()) throw ValidationError("noise size does not match series");
  std::vector<double> out(x.values().begin(), x.values().end());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += noise[i];
  return x.with_values(std::move(out));
}

TimeSeries scale_channels(const TimeSeries& x, std::span<const double> factors) {
  if (factors.size() != x.channels()) throw ValidationError("need one scale factor per channel");
  std::vector<double> out(x.values().begin(), x.values().end());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= factors[i % x.channels()];
  return x.with_values(std::move(out));
}

TimeSeries rotate_flip(const TimeSeries& x) {
  std::vector<double> out(x.values().begin(), x.values().end());
  for (auto& v : out) v = -v;
  return x.with_values(std::move(out));
}

std::vector<std::size_t> equal_segment_starts(std::size_t length, std::size_t num_segments) {
  std::vector<std::size_t> starts(num_segments);
  const std::size_t base = length / num_segments;
  const std::size_t extra = length % num_segments;
  std::size_t pos = 0;
  for (std::size_t i = 0; i < num_segments; ++i) {
    starts[i] = pos;
    pos += base + (i < extra ? 1 : 0);
  }
  return starts;
}

TimeSeries permute_segments(const TimeSeries& x, std::span<const std::size_t> starts,
                            std::span<const std::size_t> order) {
  const std::size_t n = starts.size();
  if (n == 0 || order.size() != n || starts.front() != 0) throw ValidationError("invalid segment layout");
  const std::size_t c = x.channels();
  std::vector<double> out;
  out.reserve(x.values().size());
  for (std::size_t idx : order) {
    if (idx >= n) throw ValidationError("segment order index out of range");
    const std::size_t begin = starts[idx];
    const std::size_t end = idx + 1 < n ? starts[idx + 1] : x.length();
    const auto values = x.values();
    out.insert(out.end(), values.begin() + static_cast<std::ptrdiff_t>(begin * c),
               values.begin() + static_cast<std::ptrdiff_t>(end * c));
  }
  if (out.size() != x.values().size()) throw ValidationError("segment order is not a permutation");
  return x.with_values(std::move(out));
}

TimeSeries warp_magnitude(const TimeSeries& x, std::span<const std::vector<double>> channel_knots) {
  if (channel_knots.size() != x.channels()) throw ValidationError("need one knot vector per channel");
  std::vector<double> out(x.values().begin(), x.values().end());
  for (std::size_t c = 0; c < x.channels(); ++c) {
    const auto curve = smooth_curve(x.length(), channel_knots[c]);
    for (std::size_t t = 0; t < x.length(); ++t) out[t * x.channels() + c] *= curve[t];
  }
  return x.with_values(std::move(out));
}

std::vector<double> time_warp_path(std::span<const double> speed) {
  const std::size_t n = speed.size();
  std::vector<double> path(n, 0.0);
  for (std::size_t t = 1; t < n; ++t) path[t] = path[t - 1] + std::max(speed[t], kMinWarpSpeed);
  const double total = path[n - 1];
  const double last = static_cast<double>(n - 1);
  for (std::size_t t = 1; t + 1 < n; ++t) path[t] = path[t] / total * last;
  path[n - 1] = last;
  return path;
}

TimeSeries resample_along(const TimeSeries& x, std::span<const double> path) {
  const std::size_t c = x.channels();
  std::vector<double> out(path.size() * c);
  for (std::size_t t = 0; t < path.size(); ++t) {
    interpolate_row(x.values(), x.length(), c, path[t], std::span<double>(out).subspan(t * c, c));
  }
  return x.with_values(path.size(), std::move(out));
}

TimeSeries slice_window(const TimeSeries& x, std::size_t window, std::size_t start) {
  if (window < 2 || window > x.length() || start + window > x.length()) {
    throw ValidationError("window [" + std::to_string(start) + ", " + std::to_string(start + window) +
                          ") does not fit a series of length " + std::to_string(x.length()));
  }
  const std::size_t c = x.channels();
  const auto slice = x.values().subspan(start * c, window * c);
  return x.with_values(resample_grid(slice, window, c, x.length()));
}

TimeSeries warp_window(const TimeSeries& x, std::size_t window, std::size_t start, double factor, bool stretch) {
  if (window < 2 || start + window > x.length()) throw ValidationError("warp window does not fit the series");
  const std::size_t c = x.channels();
  const double w = static_cast<double>(window);
  const std::size_t warped_len =
      stretch ? std::max<std::size_t>(2, static_cast<std::size_t>(std::llround(factor * w)))
              : std::max<std::size_t>(2, static_cast<std::size_t>(std::llround(w / factor)));
  const auto values = x.values();
  const auto warped = resample_grid(values.subspan(start * c, window * c), window, c, warped_len);

  std::vector<double> joined;
  joined.reserve((x.length() - window + warped_len) * c);
  joined.insert(joined.end(), values.begin(), values.begin() + static_cast<std::ptrdiff_t>(start * c));
  joined.insert(joined.end(), warped.begin(), warped.end());
  joined.insert(joined.end(), values.begin() + static_cast<std::ptrdiff_t>((start + window) * c), values.end());
  const std::size_t joined_len = joined.size() / c;
  return x.with_values(resample_grid(joined, joined_len, c, x.length()));
}

// --- randomized transforms

TimeSeries jitter(const TimeSeries& x, const OpParams& params, RngStream rng) {
  validate_params(AugOpKind::Jitter, params, x.length());
  std::vector<double> noise(x.values().size());
  for (auto& e : noise) e = rng.normal(0.0, params.sigma);
  return add_noise(x, noise);
}

TimeSeries scale(const TimeSeries& x, const OpParams& params, RngStream rng) {
  validate_params(AugOpKind::Scale, params, x.length());
  std::vector<double> factors(x.channels());
  for (auto& f : factors) f = rng.normal(1.0, params.sigma);
  return scale_channels(x, factors);
}

TimeSeries permute(const TimeSeries& x, const OpParams& params, RngStream rng) {
  validate_params(AugOpKind::Permute, params, x.length());
  const auto n = static_cast<std::size_t>(params.num_segments);
  std::vector<std::size_t> starts;
  if (params.equal_sized) {
    starts = equal_segment_starts(x.length(), n);
  } else {
    // N-1 distinct cut points from {1, ..., T-1} via partial Fisher-Yates.
    std::vector<std::size_t> cuts(x.length() - 1);
    std::iota(cuts.begin(), cuts.end(), std::size_t{1});
    for (std::size_t i = 0; i + 1 < n; ++i) {
      const std::size_t j = i + rng.uniform_index(cuts.size() - i);
      std::swap(cuts[i], cuts[j]);
    }
    starts.assign(1, 0);
    starts.insert(starts.end(), cuts.begin(), cuts.begin() + static_cast<std::ptrdiff_t>(n - 1));
    std::sort(starts.begin(), starts.end());
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[rng.uniform_index(i)]);
  return permute_segments(x, starts, order);
}

TimeSeries magnitude_warp(const TimeSeries& x, const OpParams& params, RngStream rng) {
  validate_params(AugOpKind::MagWarp, params, x.length());
  std::vector<std::vector<double>> knots(x.channels(), std::vector<double>(static_cast<std::size_t>(params.num_knots)));
  for (auto& channel : knots) {
    for (auto& k : channel) k = rng.normal(1.0, params.sigma);
  }
  return warp_magnitude(x, knots);
}

TimeSeries time_warp(const TimeSeries& x, const OpParams& params, RngStream rng) {
  validate_params(AugOpKind::TimeWarp, params, x.length());
  std::vector<double> knots(static_cast<std::size_t>(params.num_knots));
  for (auto& k : knots) k = rng.normal(1.0, params.sigma);
  const auto speed = smooth_curve(x.length(), knots);
  return resample_along(x, time_warp_path(speed));
}

TimeSeries window_slice(const TimeSeries& x, const OpParams& params, RngStream rng) {
  validate_params(AugOpKind::WindowSlice, params, x.length());
  const std::size_t w = window_length(x.length(), params.window_frac);
  const std::size_t start = rng.uniform_index(x.length() - w + 1);
  return slice_window(x, w, start);
}

TimeSeries window_warp(const TimeSeries& x, const OpParams& params, RngStream rng) {
  validate_params(AugOpKind::WindowWarp, params, x.length());
  const std::size_t w = window_length(x.length(), params.window_frac);
  const std::size_t start = rng.uniform_index(x.length() - w + 1);
  const bool stretch = rng.bernoulli(0.5);
  return warp_window(x, w, start, params.stretch, stretch);
}

TimeSeries apply_op(AugOpKind kind, const TimeSeries& x, const OpParams& params, RngStream rng) {
  switch (kind) {
    case AugOpKind::Jitter: return jitter(x, params, rng);
    case AugOpKind::Scale: return scale(x, params, rng);
    case AugOpKind::Rotate: return rotate_flip(x);
    case AugOpKind::Permute: return permute(x, params, rng);
    case AugOpKind::MagWarp: return magnitude_warp(x, params, rng);
    case AugOpKind::TimeWarp: return time_warp(x, params, rng);
    case AugOpKind::WindowSlice: return window_slice(x, params, rng);
    case AugOpKind::WindowWarp: return window_warp(x, params, rng);
  }
  throw ValidationError("unknown augmentation kind");
}

TimeSeries apply_chain(const TimeSeries& x, std::span<const ChainStep> steps, RngStream rng,
                       const OpObserver& observer) {
  TimeSeries current = x;
  for (std::size_t i = 0; i < steps.size(); ++i) {
    current = apply_op(steps[i].kind, current, steps[i].params, rng.derive(i));
    if (observer) observer(steps[i].kind);
  }
  return current;
}

}  // namespace tsaug
