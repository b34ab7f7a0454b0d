#pragma once

// Counter-based uniforms: every tree node draws its own value from a hash of
// (master seed, replicate, level, node index). Draws are therefore independent
// of traversal order and of how replicates are split across threads.

#include <bit>
#include <cstdint>

namespace fracperc {

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

class NodeUniforms {
 public:
  constexpr NodeUniforms(std::uint64_t seed, std::uint64_t sample_index)
      : key_(mix64(mix64(seed) ^ (sample_index * 0xd1b54a32d192ed03ULL))) {}

  /// Decorrelates the stream from other streams sharing the same seed, e.g.
  /// one per value of p when curves are sampled independently.
  [[nodiscard]] constexpr NodeUniforms with_stream(std::uint64_t stream) const {
    NodeUniforms out = *this;
    out.key_ = mix64(key_ ^ mix64(stream + 0x632be59bd9b4e019ULL));
    return out;
  }

  [[nodiscard]] constexpr std::uint64_t bits(int level, std::uint64_t node) const {
    const std::uint64_t counter = (static_cast<std::uint64_t>(level) << 58) ^ node;
    return mix64(key_ ^ mix64(counter));
  }

  /// Uniform on [0, 1) with 53 random bits.
  [[nodiscard]] constexpr double uniform(int level, std::uint64_t node) const {
    return static_cast<double>(bits(level, node) >> 11) * 0x1.0p-53;
  }

  [[nodiscard]] constexpr std::uint64_t key() const { return key_; }

 private:
  std::uint64_t key_;
};

}  // namespace fracperc
