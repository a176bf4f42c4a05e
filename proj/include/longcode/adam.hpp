#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "longcode/tensor.hpp"

namespace longcode {

struct AdamOptions {
  double lr = 2e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// First/second moment buffers, one pair per parameter, created on the first
// step.
template <typename T>
struct AdamState {
  AdamOptions options;
  std::int64_t step = 0;
  std::vector<std::vector<T>> m;
  std::vector<std::vector<T>> v;
};

// Bias-corrected Adam update of one parameter buffer at (1-based) step `t`.
template <typename T>
void adam_update(std::span<T> param, std::span<const T> grad, std::span<T> m, std::span<T> v,
                 std::int64_t t, const AdamOptions& options);

// One optimizer step over `params`, reading each tensor's accumulated grad
// (absent grad counts as zero). Increments state.step.
template <typename T>
void adam_step(std::span<Tensor<T>> params, AdamState<T>& state);

}  // namespace longcode
