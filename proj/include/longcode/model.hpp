#pragma once

#include <memory>
#include <span>
#include <string_view>

#include "longcode/label_attention.hpp"
#include "longcode/token_encoder.hpp"

namespace longcode {

enum class EncoderKind { kTransformer, kCnn };

std::string_view encoder_kind_name(EncoderKind kind);
EncoderKind parse_encoder_kind(std::string_view name);

// Token encoder followed by the per-class attention/classifier head.
template <typename T>
class Classifier {
 public:
  Classifier(std::unique_ptr<TokenEncoder<T>> encoder, LabelHead<T> head);

  // [K] probabilities for one document's (already truncated) token ids.
  Tensor<T> forward(std::span<const TokenId> ids) const;

  // Encoder tensors prefixed "encoder.", then the head's.
  ParameterList<T> parameters() const;

  const TokenEncoder<T>& encoder() const { return *encoder_; }
  const LabelHead<T>& head() const { return head_; }
  LabelHead<T>& head() { return head_; }
  std::size_t num_classes() const { return head_.num_classes(); }

 private:
  std::unique_ptr<TokenEncoder<T>> encoder_;
  LabelHead<T> head_;
};

extern template class Classifier<float>;
extern template class Classifier<double>;

}  // namespace longcode
