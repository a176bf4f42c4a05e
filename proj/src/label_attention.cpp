#include "longcode/label_attention.hpp"

#include <string>

#include "longcode/error.hpp"

namespace longcode {
namespace {

template <typename T>
void check_document(const Tensor<T>& token_reprs, std::size_t hidden) {
  if (token_reprs.rank() != 2 || token_reprs.dim(0) == 0) {
    throw ShapeError("label attention needs a non-empty [s x d] document, got " +
                     shape_string(token_reprs.shape()));
  }
  if (token_reprs.dim(1) != hidden) {
    throw ShapeError("token representations " + shape_string(token_reprs.shape()) +
                     " do not match attention width " + std::to_string(hidden));
  }
}

template <typename T>
Tensor<T> as_row(const Tensor<T>& v) {
  if (v.rank() != 1) throw ShapeError("expected a vector, got " + shape_string(v.shape()));
  return reshape(v, {1, v.dim(0)});
}

}  // namespace

template <typename T>
Tensor<T> attention_weights(const Tensor<T>& token_reprs, const Tensor<T>& query) {
  const Tensor<T> q = as_row(query);
  check_document(token_reprs, query.dim(0));
  const Tensor<T> alpha = softmax(matmul_bt(q, token_reprs), -1);
  return reshape(alpha, {token_reprs.dim(0)});
}

template <typename T>
Tensor<T> pool_document(const Tensor<T>& token_reprs, const Tensor<T>& query) {
  const Tensor<T> alpha = attention_weights(token_reprs, query);
  return reshape(matmul(as_row(alpha), token_reprs), {token_reprs.dim(1)});
}

std::uint64_t attention_parameter_count(std::uint64_t hidden, std::uint64_t num_classes) {
  return hidden * num_classes;
}

std::uint64_t classifier_parameter_count(std::uint64_t hidden, std::uint64_t num_classes) {
  return (hidden + 1) * num_classes;
}

template <typename T>
LabelHead<T>::LabelHead(std::size_t num_classes, std::size_t hidden, ParamInit& init) {
  if (num_classes == 0) throw ConfigError("label head needs at least one class");
  if (hidden == 0) throw ConfigError("label head needs a positive width");
  queries_ = init.truncated_normal<T>({num_classes, hidden}, kInitStddev);
  weights_ = init.truncated_normal<T>({num_classes, hidden}, kInitStddev);
  offsets_ = init.constant<T>({num_classes}, 0.0);
}

template <typename T>
Tensor<T> LabelHead<T>::attention(const Tensor<T>& token_reprs) const {
  check_document(token_reprs, hidden());
  // All K score rows in one product, then a softmax over tokens per class.
  return softmax(matmul_bt(queries_, token_reprs), -1);
}

template <typename T>
Tensor<T> LabelHead<T>::predict(const Tensor<T>& token_reprs) const {
  const Tensor<T> alpha = attention(token_reprs);
  const Tensor<T> pooled = matmul(alpha, token_reprs);  // [K x d]
  return sigmoid(add(rowwise_dot(pooled, weights_), offsets_));
}

template <typename T>
ParameterList<T> LabelHead<T>::parameters() const {
  return {{"head.attention", queries_}, {"head.classifier.weight", weights_},
          {"head.classifier.bias", offsets_}};
}

#define LONGCODE_INSTANTIATE_HEAD(T)                                             \
  template Tensor<T> attention_weights(const Tensor<T>&, const Tensor<T>&);       \
  template Tensor<T> pool_document(const Tensor<T>&, const Tensor<T>&);           \
  template class LabelHead<T>;

LONGCODE_INSTANTIATE_HEAD(float)
LONGCODE_INSTANTIATE_HEAD(double)

}  // namespace longcode
