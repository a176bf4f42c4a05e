#include "longcode/encoder_cnn.hpp"

#include <cmath>
#include <string>

#include "longcode/error.hpp"

namespace longcode {

void CnnConfig::validate() const {
  if (kernel == 0 || kernel % 2 == 0) {
    throw ConfigError("cnn_kernel must be odd, got " + std::to_string(kernel));
  }
  if (embed == 0 || filters == 0) throw ConfigError("cnn_embed and cnn_filters must be >= 1");
  if (vocab_size == 0) throw ConfigError("CNN word vocabulary is empty");
  if (max_words == 0) throw ConfigError("cnn_max_words must be >= 1");
}

std::uint64_t count_parameters(const CnnConfig& c) {
  return static_cast<std::uint64_t>(c.vocab_size) * c.embed +
         static_cast<std::uint64_t>(c.kernel) * c.embed * c.filters + c.filters;
}

template <typename T>
CnnEncoder<T>::CnnEncoder(const CnnConfig& config, ParamInit& init) : config_(config) {
  config_.validate();
  // Unit-scale embeddings and Glorot-uniform filters, as in CAML.
  embedding_ = init.truncated_normal<T>({config_.vocab_size, config_.embed}, 1.0);
  const double fan_in = static_cast<double>(config_.kernel * config_.embed);
  conv_weight_ = init.uniform<T>({config_.kernel * config_.embed, config_.filters},
                                 std::sqrt(6.0 / (fan_in + static_cast<double>(config_.filters))));
  conv_bias_ = init.constant<T>({config_.filters}, 0.0);
}

template <typename T>
Tensor<T> CnnEncoder<T>::encode(std::span<const TokenId> word_ids) const {
  if (word_ids.empty()) throw ShapeError("encode_cnn: empty input");
  const Tensor<T> words = embedding_gather(embedding_, word_ids);
  const Tensor<T> windows = unfold_rows(words, config_.kernel);
  return tanh(add_bias(matmul(windows, conv_weight_), conv_bias_));
}

template <typename T>
ParameterList<T> CnnEncoder<T>::parameters() const {
  return {{"cnn.embedding", embedding_}, {"cnn.conv.weight", conv_weight_},
          {"cnn.conv.bias", conv_bias_}};
}

template class CnnEncoder<float>;
template class CnnEncoder<double>;

}  // namespace longcode
