#pragma once

#include <cstdint>

namespace nonclip {

/// Counter-based splittable generator.
///
/// The stream for key `k` is out_i = mix(k + (i + 1) * 0x9E3779B97F4A7C15) for i = 0, 1, ...
/// where `mix` is the SplitMix64 finalizer. With key = seed this is exactly the
/// SplitMix64 sequence, so any language can reproduce it from docs/rng.md.
/// `split(stream)` derives an independent child key as mix(key ^ mix(stream + 1)).
///
/// Normals use the cosine branch of Box-Muller on two consecutive outputs
/// (no caching), so every draw is a pure function of (key, counter).
class Rng {
 public:
  explicit Rng(std::uint64_t key) : key_(key) {}

  static std::uint64_t mix(std::uint64_t z);

  std::uint64_t next_u64();
  /// Uniform in [0, 1) with 53 random bits.
  double uniform();
  /// Uniform in (0, 1], safe for log().
  double uniform_open();
  double normal();
  /// Uniform integer in [0, n) by 128-bit multiply-high.
  std::uint64_t below(std::uint64_t n);

  Rng split(std::uint64_t stream) const;

  std::uint64_t key() const { return key_; }
  std::uint64_t counter() const { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace nonclip
