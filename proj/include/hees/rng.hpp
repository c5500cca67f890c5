#pragma once

// Counter-based pseudo-random stream with explicit splitting. The uniform
// integer stream is a strong 64-bit hash of (seed, counter), so equal seeds
// reproduce the stream exactly and split(index) yields substreams that are a
// pure function of (seed, index), independent of how much of the parent
// stream was consumed.

#include <cmath>
#include <cstdint>

namespace hees {

class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : seed_(seed), state_(seed) {}

  std::uint64_t seed() const { return seed_; }

  std::uint64_t next_u64() {
    state_ += 0x9E3779B97F4A7C15ull;
    return mix64(state_);
  }

  /// Uniform double in [0, 1) with 53 random bits.
  double next_uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  /// Standard normal variate, Marsaglia polar method. The second variate of
  /// each accepted pair is cached in the stream state.
  double next_gaussian() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u, v, s;
    do {
      u = 2.0 * next_uniform() - 1.0;
      v = 2.0 * next_uniform() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double r = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * r;
    has_spare_ = true;
    return u * r;
  }

  /// Independent child stream, deterministic in (seed, index).
  RngStream split(std::uint64_t index) const {
    return RngStream(mix64(seed_ + 0x9E3779B97F4A7C15ull * mix64(index + 0x632BE59BD9B4E019ull)));
  }

 private:
  static std::uint64_t mix64(std::uint64_t z) {
    z ^= z >> 30;
    z *= 0xBF58476D1CE4E5B9ull;
    z ^= z >> 27;
    z *= 0x94D049BB133111EBull;
    z ^= z >> 31;
    return z;
  }

  std::uint64_t seed_;
  std::uint64_t state_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace hees
