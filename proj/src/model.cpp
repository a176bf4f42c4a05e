#include "longcode/model.hpp"

#include <string>

#include "longcode/error.hpp"

namespace longcode {

std::string_view encoder_kind_name(EncoderKind kind) {
  return kind == EncoderKind::kTransformer ? "transformer" : "cnn";
}

EncoderKind parse_encoder_kind(std::string_view name) {
  if (name == "transformer") return EncoderKind::kTransformer;
  if (name == "cnn") return EncoderKind::kCnn;
  throw ConfigError("encoder must be 'transformer' or 'cnn', got '" + std::string(name) + "'");
}

template <typename T>
Classifier<T>::Classifier(std::unique_ptr<TokenEncoder<T>> encoder, LabelHead<T> head)
    : encoder_(std::move(encoder)), head_(std::move(head)) {
  if (!encoder_) throw ConfigError("classifier needs an encoder");
  if (encoder_->output_dim() != head_.hidden()) {
    throw ShapeError("encoder width " + std::to_string(encoder_->output_dim()) +
                     " differs from label head width " + std::to_string(head_.hidden()));
  }
}

template <typename T>
Tensor<T> Classifier<T>::forward(std::span<const TokenId> ids) const {
  return head_.predict(encoder_->encode(ids));
}

template <typename T>
ParameterList<T> Classifier<T>::parameters() const {
  ParameterList<T> out;
  for (auto& p : encoder_->parameters()) out.push_back({"encoder." + p.name, p.tensor});
  for (auto& p : head_.parameters()) out.push_back(std::move(p));
  return out;
}

template class Classifier<float>;
template class Classifier<double>;

}  // namespace longcode
