#pragma once

#include <cstdint>

#include "longcode/init.hpp"
#include "longcode/ops.hpp"

namespace longcode {

// alpha_i = softmax_i(<e_i, q>) over the rows of E [s x d]; q is [d].
template <typename T>
Tensor<T> attention_weights(const Tensor<T>& token_reprs, const Tensor<T>& query);

// z = sum_i alpha_i e_i, a [d] vector in the convex hull of E's rows.
template <typename T>
Tensor<T> pool_document(const Tensor<T>& token_reprs, const Tensor<T>& query);

std::uint64_t attention_parameter_count(std::uint64_t hidden, std::uint64_t num_classes);
std::uint64_t classifier_parameter_count(std::uint64_t hidden, std::uint64_t num_classes);

// Per-class attention vectors (rows of Q), classifier weights (rows of W)
// and offsets b. Class c's probability is
//   sigmoid(<sum_i alpha_{c,i} e_i, w_c> + b_c).
template <typename T>
class LabelHead {
 public:
  LabelHead(std::size_t num_classes, std::size_t hidden, ParamInit& init);

  // [K x s] attention coefficients for every class.
  Tensor<T> attention(const Tensor<T>& token_reprs) const;
  // [K] class probabilities.
  Tensor<T> predict(const Tensor<T>& token_reprs) const;

  ParameterList<T> parameters() const;
  std::size_t num_classes() const { return queries_.dim(0); }
  std::size_t hidden() const { return queries_.dim(1); }

  Tensor<T>& queries() { return queries_; }
  Tensor<T>& weights() { return weights_; }
  Tensor<T>& offsets() { return offsets_; }

 private:
  Tensor<T> queries_;  // [K x d]
  Tensor<T> weights_;  // [K x d]
  Tensor<T> offsets_;  // [K]
};

extern template class LabelHead<float>;
extern template class LabelHead<double>;

}  // namespace longcode
