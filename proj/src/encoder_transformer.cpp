#include "longcode/encoder_transformer.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include "longcode/error.hpp"

namespace longcode {

void EncoderConfig::validate() const {
  if (hidden == 0 || heads == 0 || hidden % heads != 0) {
    throw ConfigError("hidden (" + std::to_string(hidden) + ") must be a positive multiple of heads (" +
                      std::to_string(heads) + ")");
  }
  if (seg_len == 0 || seg_len > max_positions) {
    throw ConfigError("seg_len (" + std::to_string(seg_len) + ") must be in [1, max_positions=" +
                      std::to_string(max_positions) + "]");
  }
  if (vocab_size == 0) throw ConfigError("vocab_size must be >= 1");
  if (type_vocab == 0) throw ConfigError("type_vocab must be >= 1");
  if (num_blocks > 0 && intermediate == 0) throw ConfigError("intermediate must be >= 1");
}

std::uint64_t count_parameters(const EncoderConfig& c) {
  const std::uint64_t d = c.hidden;
  const std::uint64_t i = c.intermediate;
  const std::uint64_t embeddings = c.vocab_size * d + c.max_positions * d + c.type_vocab * d + 2 * d;
  const std::uint64_t attention = 4 * (d * d + d) + 2 * d;
  const std::uint64_t ffn = (d * i + i) + (i * d + d) + 2 * d;
  const std::uint64_t pooler = c.include_pooler ? d * d + d : 0;
  return embeddings + c.num_blocks * (attention + ffn) + pooler;
}

template <typename T>
TransformerEncoder<T>::TransformerEncoder(const EncoderConfig& config, ParamInit& init)
    : config_(config) {
  config_.validate();
  const std::size_t d = config_.hidden;
  const std::size_t ff = config_.intermediate;
  token_embedding_ = init.truncated_normal<T>({config_.vocab_size, d}, kInitStddev);
  position_embedding_ = init.truncated_normal<T>({config_.max_positions, d}, kInitStddev);
  type_embedding_ = init.truncated_normal<T>({config_.type_vocab, d}, kInitStddev);
  embedding_ln_gamma_ = init.constant<T>({d}, 1.0);
  embedding_ln_beta_ = init.constant<T>({d}, 0.0);
  for (std::size_t b = 0; b < config_.num_blocks; ++b) {
    TransformerBlock<T> blk;
    blk.q_weight = init.truncated_normal<T>({d, d}, kInitStddev);
    blk.q_bias = init.constant<T>({d}, 0.0);
    blk.k_weight = init.truncated_normal<T>({d, d}, kInitStddev);
    blk.k_bias = init.constant<T>({d}, 0.0);
    blk.v_weight = init.truncated_normal<T>({d, d}, kInitStddev);
    blk.v_bias = init.constant<T>({d}, 0.0);
    blk.o_weight = init.truncated_normal<T>({d, d}, kInitStddev);
    blk.o_bias = init.constant<T>({d}, 0.0);
    blk.attn_ln_gamma = init.constant<T>({d}, 1.0);
    blk.attn_ln_beta = init.constant<T>({d}, 0.0);
    blk.ffn_in_weight = init.truncated_normal<T>({d, ff}, kInitStddev);
    blk.ffn_in_bias = init.constant<T>({ff}, 0.0);
    blk.ffn_out_weight = init.truncated_normal<T>({ff, d}, kInitStddev);
    blk.ffn_out_bias = init.constant<T>({d}, 0.0);
    blk.ffn_ln_gamma = init.constant<T>({d}, 1.0);
    blk.ffn_ln_beta = init.constant<T>({d}, 0.0);
    blocks_.push_back(std::move(blk));
  }
  if (config_.include_pooler) {
    pooler_weight_ = init.truncated_normal<T>({d, d}, kInitStddev);
    pooler_bias_ = init.constant<T>({d}, 0.0);
  }
}

template <typename T>
Tensor<T> TransformerEncoder<T>::encode_segment(std::span<const TokenId> ids,
                                                const std::vector<bool>& pad_mask,
                                                std::vector<Tensor<T>>* attention_maps) const {
  const std::size_t n = ids.size();
  if (n != config_.seg_len) {
    throw ShapeError("encode_segment: got " + std::to_string(n) + " ids, seg_len is " +
                     std::to_string(config_.seg_len));
  }
  if (pad_mask.size() != n) {
    throw ShapeError("encode_segment: pad mask has " + std::to_string(pad_mask.size()) +
                     " entries for " + std::to_string(n) + " ids");
  }
  const T eps = static_cast<T>(kLayerNormEps);

  std::vector<std::size_t> positions(n);
  std::iota(positions.begin(), positions.end(), std::size_t{0});
  const std::vector<std::size_t> types(n, 0);
  Tensor<T> x = add(add(embedding_gather(token_embedding_, ids),
                        gather_rows(position_embedding_, positions)),
                    gather_rows(type_embedding_, types));
  x = layer_norm(x, embedding_ln_gamma_, embedding_ln_beta_, eps);

  const std::size_t dh = config_.hidden / config_.heads;
  const T inv_sqrt_dh = static_cast<T>(1.0 / std::sqrt(static_cast<double>(dh)));
  for (const auto& blk : blocks_) {
    const Tensor<T> q = add_bias(matmul(x, blk.q_weight), blk.q_bias);
    const Tensor<T> k = add_bias(matmul(x, blk.k_weight), blk.k_bias);
    const Tensor<T> v = add_bias(matmul(x, blk.v_weight), blk.v_bias);
    std::vector<Tensor<T>> contexts;
    contexts.reserve(config_.heads);
    for (std::size_t h = 0; h < config_.heads; ++h) {
      const auto qh = slice_cols(q, h * dh, (h + 1) * dh);
      const auto kh = slice_cols(k, h * dh, (h + 1) * dh);
      const auto vh = slice_cols(v, h * dh, (h + 1) * dh);
      const auto scores = mask_fill(scale(matmul_bt(qh, kh), inv_sqrt_dh), pad_mask);
      const auto probs = softmax(scores, -1);
      if (attention_maps) attention_maps->push_back(probs);
      contexts.push_back(matmul(probs, vh));
    }
    const Tensor<T> context = contexts.size() == 1 ? contexts[0] : concat_cols(contexts);
    const Tensor<T> attn_out = add_bias(matmul(context, blk.o_weight), blk.o_bias);
    x = layer_norm(add(x, attn_out), blk.attn_ln_gamma, blk.attn_ln_beta, eps);

    const Tensor<T> hidden = gelu(add_bias(matmul(x, blk.ffn_in_weight), blk.ffn_in_bias));
    const Tensor<T> ffn_out = add_bias(matmul(hidden, blk.ffn_out_weight), blk.ffn_out_bias);
    x = layer_norm(add(x, ffn_out), blk.ffn_ln_gamma, blk.ffn_ln_beta, eps);
  }
  return x;
}

template <typename T>
ParameterList<T> TransformerEncoder<T>::parameters() const {
  ParameterList<T> out{
      {"embeddings.token", token_embedding_},
      {"embeddings.position", position_embedding_},
      {"embeddings.type", type_embedding_},
      {"embeddings.ln.gamma", embedding_ln_gamma_},
      {"embeddings.ln.beta", embedding_ln_beta_},
  };
  for (std::size_t b = 0; b < blocks_.size(); ++b) {
    const std::string p = "blocks." + std::to_string(b) + ".";
    const auto& blk = blocks_[b];
    out.push_back({p + "attention.query.weight", blk.q_weight});
    out.push_back({p + "attention.query.bias", blk.q_bias});
    out.push_back({p + "attention.key.weight", blk.k_weight});
    out.push_back({p + "attention.key.bias", blk.k_bias});
    out.push_back({p + "attention.value.weight", blk.v_weight});
    out.push_back({p + "attention.value.bias", blk.v_bias});
    out.push_back({p + "attention.output.weight", blk.o_weight});
    out.push_back({p + "attention.output.bias", blk.o_bias});
    out.push_back({p + "attention.ln.gamma", blk.attn_ln_gamma});
    out.push_back({p + "attention.ln.beta", blk.attn_ln_beta});
    out.push_back({p + "ffn.in.weight", blk.ffn_in_weight});
    out.push_back({p + "ffn.in.bias", blk.ffn_in_bias});
    out.push_back({p + "ffn.out.weight", blk.ffn_out_weight});
    out.push_back({p + "ffn.out.bias", blk.ffn_out_bias});
    out.push_back({p + "ffn.ln.gamma", blk.ffn_ln_gamma});
    out.push_back({p + "ffn.ln.beta", blk.ffn_ln_beta});
  }
  if (config_.include_pooler) {
    out.push_back({"pooler.weight", pooler_weight_});
    out.push_back({"pooler.bias", pooler_bias_});
  }
  return out;
}

template class TransformerEncoder<float>;
template class TransformerEncoder<double>;

}  // namespace longcode
