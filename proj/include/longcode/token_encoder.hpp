#pragma once

#include <span>

#include "longcode/ops.hpp"

namespace longcode {

// Maps the real (unpadded) token ids of one document to per-token
// representations [s x output_dim()]. Both the segmented transformer and
// the convolutional baseline implement it, so the label head is shared.
template <typename T>
class TokenEncoder {
 public:
  virtual ~TokenEncoder() = default;
  virtual Tensor<T> encode(std::span<const TokenId> ids) const = 0;
  virtual std::size_t output_dim() const = 0;
  virtual ParameterList<T> parameters() const = 0;
};

}  // namespace longcode
