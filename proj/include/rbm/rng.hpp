#pragma once

#include <cstdint>
#include <random>
#include <span>

namespace rbm {

// Seedable 64-bit generator with draws defined only in terms of the raw
// mt19937_64 output, so sequences match across standard libraries.
class Rng {
 public:
  static constexpr const char* kAlgorithm = "mt19937_64";

  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  // Uniform integer in [0, bound) by rejection; bound > 0.
  std::uint64_t below(std::uint64_t bound) {
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
    std::uint64_t x;
    do x = engine_(); while (x >= limit);
    return x % bound;
  }

  // Index drawn with probability proportional to weights (all >= 0, sum > 0).
  // Returns the draw alongside the index for logging.
  std::size_t weighted(std::span<const double> weights, double* draw = nullptr) {
    double total = 0.0;
    for (double w : weights) total += w;
    const double u = uniform();
    if (draw) *draw = u;
    double acc = 0.0;
    const double target = u * total;
    std::size_t last_positive = 0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
      if (weights[i] <= 0.0) continue;
      acc += weights[i];
      last_positive = i;
      if (target < acc) return i;
    }
    return last_positive;
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace rbm
