#pragma once

#include <array>
#include <cstddef>
#include <cstdint>

namespace tsaug {

// Deterministic random stream identified by (seed, stream_id).
//
// Generator: xoshiro256** 1.0, state filled by SplitMix64 from a key mixed out
// of (seed, stream_id). Child streams are derived by hashing the parent's
// stream id with the child index, so a child never depends on how many draws
// the parent has already produced. Uniform doubles use the top 53 bits;
// normals use the Marsaglia polar method. None of the samplers go through
// <random> distributions, whose outputs differ between standard libraries.
class RngStream {
 public:
  static constexpr int kAlgorithmVersion = 1;

  RngStream() : RngStream(0, 0) {}
  RngStream(std::uint64_t seed, std::uint64_t stream_id);

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_id() const { return stream_id_; }

  // Pure function of (seed, stream_id, child_index).
  RngStream derive(std::uint64_t child_index) const;

  std::uint64_t next_u64();
  // Uniform in [0, 1).
  double uniform();
  // Uniform integer in [0, n). n must be positive.
  std::uint64_t uniform_index(std::uint64_t n);
  double normal(double mean = 0.0, double stddev = 1.0);
  bool bernoulli(double p) { return uniform() < p; }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::array<std::uint64_t, 4> state_{};
  double cached_normal_ = 0.0;
  bool has_cached_normal_ = false;
};

inline RngStream derive_stream(const RngStream& parent, std::uint64_t child_index) {
  return parent.derive(child_index);
}

// SplitMix64 finalizer; exposed for hashing seeds and config digests.
std::uint64_t mix64(std::uint64_t x);

// Seed from OS entropy. Only used when a user supplies no seed at all.
std::uint64_t entropy_seed();

}  // namespace tsaug
