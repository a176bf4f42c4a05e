#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "longcode/encoder_transformer.hpp"
#include "longcode/token_encoder.hpp"
#include "longcode/tokenizer.hpp"

namespace longcode {

struct Segment {
  std::size_t begin = 0;
  std::size_t end = 0;  // exclusive

  friend bool operator==(const Segment&, const Segment&) = default;
};

// Windows over a padded sequence plus, per position, the index of the window
// whose representation is kept for that position.
struct SegmentPlan {
  std::size_t seg_len = 0;
  std::size_t stride = 0;  // overlap between consecutive windows; 0 = disjoint
  std::vector<Segment> segments;
  std::vector<std::size_t> owner;

  std::size_t padded_length() const { return owner.size(); }
};

// Length a sequence of s real tokens is padded to before planning: tau*seg_len
// for disjoint windows, otherwise the shortest length tiled by windows that
// advance by seg_len - stride.
std::size_t padded_length(std::size_t length, std::size_t seg_len, std::size_t stride);

// Disjoint windows for stride 0; otherwise windows start every
// seg_len - stride tokens, the last one ending at padded_len. A position is
// owned by the window whose center is nearest (ties go to the earlier one).
SegmentPlan plan_segments(std::size_t padded_len, std::size_t seg_len, std::size_t stride);

// Encodes every window of `plan` in order and assembles one row per real
// token of `seq` (seq.ids may carry padding; rows past seq.length are
// dropped). The encoder's seg_len must equal plan.seg_len.
template <typename T>
Tensor<T> encode_long(const TransformerEncoder<T>& encoder, const TokenSequence& seq,
                      const SegmentPlan& plan);

struct SpecialTokens {
  TokenId cls = 0;
  TokenId sep = 0;
};

// TokenEncoder over arbitrarily long inputs: pad, plan, encode_long. With
// special tokens set, each window carries [CLS] + (seg_len - 2) content
// tokens + [SEP], and the two markers are dropped with the padding.
template <typename T>
class SegmentedTransformer : public TokenEncoder<T> {
 public:
  SegmentedTransformer(TransformerEncoder<T> encoder, std::size_t stride,
                       std::optional<SpecialTokens> special = std::nullopt);

  Tensor<T> encode(std::span<const TokenId> ids) const override;
  std::size_t output_dim() const override { return encoder_.config().hidden; }
  ParameterList<T> parameters() const override { return encoder_.parameters(); }

  const TransformerEncoder<T>& encoder() const { return encoder_; }
  std::size_t stride() const { return stride_; }

 private:
  TransformerEncoder<T> encoder_;
  std::size_t stride_;
  std::optional<SpecialTokens> special_;
};

extern template class SegmentedTransformer<float>;
extern template class SegmentedTransformer<double>;

}  // namespace longcode
