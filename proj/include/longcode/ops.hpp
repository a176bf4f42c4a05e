#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "longcode/tensor.hpp"

namespace longcode {

using TokenId = std::int32_t;

// Additive-mask surrogate for -inf; exp() of it underflows to exactly 0 in f32.
inline constexpr double kMaskValue = -1e9;

// [m x k] . [k x n] -> [m x n]
template <typename T>
Tensor<T> matmul(const Tensor<T>& a, const Tensor<T>& b);

// [m x k] . [n x k]^T -> [m x n]
template <typename T>
Tensor<T> matmul_bt(const Tensor<T>& a, const Tensor<T>& b);

template <typename T>
Tensor<T> add(const Tensor<T>& a, const Tensor<T>& b);

// [... x n] + bias[n], broadcast over leading dims.
template <typename T>
Tensor<T> add_bias(const Tensor<T>& x, const Tensor<T>& bias);

template <typename T>
Tensor<T> mul(const Tensor<T>& a, const Tensor<T>& b);

template <typename T>
Tensor<T> scale(const Tensor<T>& x, T factor);

template <typename T>
Tensor<T> sigmoid(const Tensor<T>& x);

template <typename T>
Tensor<T> tanh(const Tensor<T>& x);

// Exact (erf) GELU.
template <typename T>
Tensor<T> gelu(const Tensor<T>& x);

// Max-subtracted softmax along `axis` (negative counts from the back).
template <typename T>
Tensor<T> softmax(const Tensor<T>& x, int axis = -1);

// Normalizes over the last dim, then applies gamma/beta of that size.
template <typename T>
Tensor<T> layer_norm(const Tensor<T>& x, const Tensor<T>& gamma, const Tensor<T>& beta,
                     T eps);

// Rows of `table` [V x d] selected by `ids` -> [len(ids) x d]. Duplicate ids
// sum their gradients. Throws IndexError for ids outside [0, V).
template <typename T>
Tensor<T> embedding_gather(const Tensor<T>& table, std::span<const TokenId> ids);

template <typename T>
Tensor<T> gather_rows(const Tensor<T>& x, std::span<const std::size_t> rows);

template <typename T>
Tensor<T> concat_rows(const std::vector<Tensor<T>>& parts);

template <typename T>
Tensor<T> concat_cols(const std::vector<Tensor<T>>& parts);

// Columns [begin, end) of a rank-2 tensor.
template <typename T>
Tensor<T> slice_cols(const Tensor<T>& x, std::size_t begin, std::size_t end);

// Replaces entries whose last-axis index is masked with `fill`; masked
// entries receive no gradient.
template <typename T>
Tensor<T> mask_fill(const Tensor<T>& x, const std::vector<bool>& last_axis_mask,
                    T fill = static_cast<T>(kMaskValue));

// Per-row inner product of two [m x n] tensors -> [m].
template <typename T>
Tensor<T> rowwise_dot(const Tensor<T>& a, const Tensor<T>& b);

// Same values under a new shape with equal element count.
template <typename T>
Tensor<T> reshape(const Tensor<T>& x, Shape shape);

template <typename T>
Tensor<T> sum(const Tensor<T>& x);

template <typename T>
Tensor<T> mean(const Tensor<T>& x);

// Same-padded sliding windows over rows: [n x c] -> [n x width*c], where
// output row i holds input rows i-width/2 .. i+width/2 (zeros outside).
// `width` must be odd.
template <typename T>
Tensor<T> unfold_rows(const Tensor<T>& x, std::size_t width);

// Sum over classes of -y ln p - (1-y) ln(1-p), p clamped to [clamp, 1-clamp].
// `positives` lists the classes with y = 1. Clamped entries pass no gradient.
template <typename T>
Tensor<T> binary_cross_entropy(const Tensor<T>& probs,
                               std::span<const std::uint32_t> positives,
                               T clamp = static_cast<T>(1e-7));

}  // namespace longcode
