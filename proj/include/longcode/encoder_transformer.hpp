#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "longcode/init.hpp"
#include "longcode/ops.hpp"

namespace longcode {

// Defaults are the small BERT checkpoint size (2 blocks, 256 hidden, 4 heads).
struct EncoderConfig {
  std::size_t num_blocks = 2;
  std::size_t hidden = 256;
  std::size_t heads = 4;
  std::size_t intermediate = 1024;
  std::size_t vocab_size = 30522;
  std::size_t max_positions = 512;
  std::size_t type_vocab = 2;
  std::size_t seg_len = 512;
  bool include_pooler = true;

  void validate() const;
};

// Exact scalar count of every tensor the encoder allocates.
std::uint64_t count_parameters(const EncoderConfig& config);

template <typename T>
struct TransformerBlock {
  Tensor<T> q_weight, q_bias, k_weight, k_bias, v_weight, v_bias, o_weight, o_bias;
  Tensor<T> attn_ln_gamma, attn_ln_beta;
  Tensor<T> ffn_in_weight, ffn_in_bias, ffn_out_weight, ffn_out_bias;
  Tensor<T> ffn_ln_gamma, ffn_ln_beta;
};

// Post-LN BERT-style encoder over one fixed-length segment.
template <typename T>
class TransformerEncoder {
 public:
  static constexpr double kLayerNormEps = 1e-12;

  TransformerEncoder(const EncoderConfig& config, ParamInit& init);

  // [seg_len x hidden] token representations. Keys flagged in `pad_mask`
  // are excluded from every self-attention softmax. When `attention_maps`
  // is given, each head's [seg_len x seg_len] probabilities are appended
  // (block-major).
  Tensor<T> encode_segment(std::span<const TokenId> ids, const std::vector<bool>& pad_mask,
                           std::vector<Tensor<T>>* attention_maps = nullptr) const;

  ParameterList<T> parameters() const;
  const EncoderConfig& config() const { return config_; }

 private:
  EncoderConfig config_;
  Tensor<T> token_embedding_, position_embedding_, type_embedding_;
  Tensor<T> embedding_ln_gamma_, embedding_ln_beta_;
  std::vector<TransformerBlock<T>> blocks_;
  Tensor<T> pooler_weight_, pooler_bias_;  // allocated, unused in forward
};

extern template class TransformerEncoder<float>;
extern template class TransformerEncoder<double>;

}  // namespace longcode
