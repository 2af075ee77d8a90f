#pragma once

#include <cstdint>

namespace dai {

// Splittable generator in the splitmix64 family. A stream is a single 64-bit
// state; derive() spawns a statistically independent child stream keyed by an
// integer, so any draw can be addressed as (seed, sequence, point, shot)
// without shared mutable state. Draw counts never come close to the 2^64
// period of one stream.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : state_(mix(seed + kGamma)) {}

  // Child stream keyed by `key`; equal (parent state, key) pairs always give
  // the same child.
  RngStream derive(std::uint64_t key) const {
    RngStream child = *this;
    child.state_ = mix(state_ ^ mix(key + kGamma));
    return child;
  }

  std::uint64_t next_u64() {
    state_ += kGamma;
    return mix(state_);
  }

  // Uniform in [0, 1), 53 random bits.
  double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  std::uint64_t state() const { return state_; }

 private:
  static constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ull;

  static std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  std::uint64_t state_;
};

}  // namespace dai
