#pragma once

#include <cstddef>

#include "longcode/init.hpp"
#include "longcode/token_encoder.hpp"

namespace longcode {

// Word embeddings followed by one same-padded 1-D convolution and tanh.
struct CnnConfig {
  std::size_t embed = 100;
  std::size_t filters = 50;
  std::size_t kernel = 9;  // odd
  std::size_t max_words = 2500;
  std::size_t vocab_size = 0;

  void validate() const;
};

std::uint64_t count_parameters(const CnnConfig& config);

template <typename T>
class CnnEncoder : public TokenEncoder<T> {
 public:
  CnnEncoder(const CnnConfig& config, ParamInit& init);

  // [n x filters]; throws on empty input or ids outside the vocabulary.
  Tensor<T> encode(std::span<const TokenId> word_ids) const override;
  std::size_t output_dim() const override { return config_.filters; }
  ParameterList<T> parameters() const override;

  const CnnConfig& config() const { return config_; }

 private:
  CnnConfig config_;
  Tensor<T> embedding_;    // [V x embed]
  Tensor<T> conv_weight_;  // [kernel*embed x filters]
  Tensor<T> conv_bias_;    // [filters]
};

extern template class CnnEncoder<float>;
extern template class CnnEncoder<double>;

}  // namespace longcode
