#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "longcode/tensor.hpp"

namespace longcode {

// Seeded parameter initializer. Draws in double and narrows, so f32 and f64
// models built from the same seed hold the same values up to rounding.
class ParamInit {
 public:
  explicit ParamInit(std::uint64_t seed) : rng_(seed) {}

  // Normal(0, stddev) resampled outside +-2 stddev.
  template <typename T>
  Tensor<T> truncated_normal(Shape shape, double stddev) {
    std::normal_distribution<double> dist(0.0, stddev);
    std::vector<T> values(shape_numel(shape));
    for (auto& v : values) {
      double x = dist(rng_);
      while (std::abs(x) > 2.0 * stddev) x = dist(rng_);
      v = static_cast<T>(x);
    }
    return Tensor<T>(std::move(shape), std::move(values)).set_requires_grad(true);
  }

  // Uniform(-bound, bound).
  template <typename T>
  Tensor<T> uniform(Shape shape, double bound) {
    std::uniform_real_distribution<double> dist(-bound, bound);
    std::vector<T> values(shape_numel(shape));
    for (auto& v : values) v = static_cast<T>(dist(rng_));
    return Tensor<T>(std::move(shape), std::move(values)).set_requires_grad(true);
  }

  template <typename T>
  Tensor<T> constant(Shape shape, double value) {
    return Tensor<T>(std::move(shape), static_cast<T>(value)).set_requires_grad(true);
  }

 private:
  std::mt19937_64 rng_;
};

inline constexpr double kInitStddev = 0.02;

}  // namespace longcode
