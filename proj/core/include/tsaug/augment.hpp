#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "tsaug/rng.hpp"
#include "tsaug/series.hpp"

namespace tsaug {

enum class AugOpKind { Jitter, Scale, Rotate, Permute, MagWarp, TimeWarp, WindowSlice, WindowWarp };

inline constexpr std::array<AugOpKind, 8> kAllOps = {
    AugOpKind::Jitter,  AugOpKind::Scale,    AugOpKind::Rotate,      AugOpKind::Permute,
    AugOpKind::MagWarp, AugOpKind::TimeWarp, AugOpKind::WindowSlice, AugOpKind::WindowWarp};

// Stable lower-case identifiers used in files and on the command line:
// jitter, scale, rotate, permute, magwarp, timewarp, window_slice, window_warp.
std::string_view to_string(AugOpKind kind);
std::optional<AugOpKind> parse_op(std::string_view name);

// Magnitude parameters shared by all eight transforms; each op reads only the
// fields it needs.
struct OpParams {
  double sigma = 0.0;        // jitter noise std; scale / magwarp / timewarp curve std
  int num_segments = 1;      // permute N
  bool equal_sized = true;   // permute segment mode
  int num_knots = 4;         // magwarp / timewarp I
  double window_frac = 1.0;  // window_slice / window_warp, W = round(frac * T)
  double stretch = 2.0;      // window_warp K

  friend bool operator==(const OpParams&, const OpParams&) = default;
};

// Throws ValidationError if a field this op reads is out of range for a
// series of `length` steps.
void validate_params(AugOpKind kind, const OpParams& params, std::size_t length);

// Window length used by the window ops: clamp(round(frac * T), 2, T).
std::size_t window_length(std::size_t length, double window_frac);

// --- Randomized transforms. Each takes its stream by value, so repeated calls
// with the same stream produce the same output.

TimeSeries jitter(const TimeSeries& x, const OpParams& params, RngStream rng);
TimeSeries scale(const TimeSeries& x, const OpParams& params, RngStream rng);
TimeSeries rotate_flip(const TimeSeries& x);
TimeSeries permute(const TimeSeries& x, const OpParams& params, RngStream rng);
TimeSeries magnitude_warp(const TimeSeries& x, const OpParams& params, RngStream rng);
TimeSeries time_warp(const TimeSeries& x, const OpParams& params, RngStream rng);
TimeSeries window_slice(const TimeSeries& x, const OpParams& params, RngStream rng);
TimeSeries window_warp(const TimeSeries& x, const OpParams& params, RngStream rng);

TimeSeries apply_op(AugOpKind kind, const TimeSeries& x, const OpParams& params, RngStream rng);

// --- The same transforms with their random draws supplied explicitly.

// noise holds T*C values, time-major.
TimeSeries add_noise(const TimeSeries& x, std::span<const double> noise);
// One factor per channel.
TimeSeries scale_channels(const TimeSeries& x, std::span<const double> factors);
// Segment start offsets (first is 0, strictly increasing); N equal-sized
// segments give lengths differing by at most one, longer ones first.
std::vector<std::size_t> equal_segment_starts(std::size_t length, std::size_t num_segments);
// Concatenates segments in `order` (a permutation of segment indices).
TimeSeries permute_segments(const TimeSeries& x, std::span<const std::size_t> starts,
                            std::span<const std::size_t> order);
// One knot vector per channel; out[t,c] = curve_c(t) * x[t,c].
TimeSeries warp_magnitude(const TimeSeries& x, std::span<const std::vector<double>> channel_knots);
// Warp path from a speed curve: speeds clamped at kMinWarpSpeed, cumulated
// and rescaled to span [0, T-1]. Strictly increasing.
inline constexpr double kMinWarpSpeed = 0.01;
std::vector<double> time_warp_path(std::span<const double> speed);
// out[t] = x interpolated at path[t].
TimeSeries resample_along(const TimeSeries& x, std::span<const double> path);
// x[start .. start+window-1] resampled back to T.
TimeSeries slice_window(const TimeSeries& x, std::size_t window, std::size_t start);
// Window [start, start+window) stretched to round(K*W) (or contracted to
// max(2, round(W/K))), spliced between prefix and suffix, resampled to T.
TimeSeries warp_window(const TimeSeries& x, std::size_t window, std::size_t start, double factor, bool stretch);

// --- Composition.

struct ChainStep {
  AugOpKind kind;
  OpParams params;

  friend bool operator==(const ChainStep&, const ChainStep&) = default;
};

// Called once per op actually executed.
using OpObserver = std::function<void(AugOpKind)>;

// Applies steps left to right; step i draws from rng.derive(i). An empty
// chain returns the input.
TimeSeries apply_chain(const TimeSeries& x, std::span<const ChainStep> steps, RngStream rng,
                       const OpObserver& observer = {});

}  // namespace tsaug
