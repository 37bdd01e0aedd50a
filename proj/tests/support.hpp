// Helpers shared by the unit and acceptance tests.

#pragma once

#include <cmath>
#include <random>

#include "qfb/qubit.hpp"

namespace testing {

class Sampler {
 public:
  explicit Sampler(std::uint64_t seed) : engine_(seed) {}

  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(engine_); }

  /// Uniform in the Bloch ball.
  qfb::QubitState mixed_state() {
    double x, y, z;
    do {
      x = uniform(-1, 1);
      y = uniform(-1, 1);
      z = uniform(-1, 1);
    } while (x * x + y * y + z * z > 1.0);
    return qfb::density_from_bloch({x, y, z});
  }

  qfb::PureQubit pure_state() {
    const double t = std::acos(uniform(-1, 1));
    const double f = uniform(0, 2 * std::numbers::pi);
    return qfb::PureQubit{std::cos(t / 2), std::polar(std::sin(t / 2), f)};
  }

 private:
  std::mt19937_64 engine_;
};

inline double max_abs_diff(const auto& a, const auto& b) { return (a - b).cwiseAbs().maxCoeff(); }

}  // namespace testing
