#pragma once

#include <cstdint>
#include <random>

namespace qfb {

/// Seeded, caller-owned random stream.  Not thread-safe: give each worker its
/// own substream.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) : seed_(seed) { reseed(0, false); }

  std::uint64_t seed() const noexcept { return seed_; }

  /// Independent stream derived deterministically from (seed, index).
  RandomStream substream(std::uint64_t index) const { return RandomStream(seed_, index); }

  double uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(engine_); }

  bool bernoulli(double p) { return uniform() < p; }

  std::int64_t poisson(double mean) {
    if (!(mean > 0.0)) return 0;
    return std::poisson_distribution<std::int64_t>(mean)(engine_);
  }

  std::mt19937_64& engine() noexcept { return engine_; }

 private:
  RandomStream(std::uint64_t seed, std::uint64_t index) : seed_(seed) { reseed(index, true); }

  void reseed(std::uint64_t index, bool derived) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed_), static_cast<std::uint32_t>(seed_ >> 32),
                      static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32),
                      derived ? 0x5eedu : 0u};
    engine_.seed(seq);
  }

  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

}  // namespace qfb
