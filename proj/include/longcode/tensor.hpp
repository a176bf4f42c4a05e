#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace longcode {

using Shape = std::vector<std::size_t>;

std::size_t shape_numel(const Shape& shape);
std::string shape_string(const Shape& shape);

template <typename T>
class Tensor;

namespace detail {

// One vertex of the reverse-mode graph. `backward` reads `grad` of this node
// and accumulates into the grads of `inputs`.
template <typename T>
struct Node {
  Shape shape;
  std::vector<T> value;
  std::vector<T> grad;  // empty until something is accumulated
  bool requires_grad = false;
  std::vector<std::shared_ptr<Node>> inputs;
  std::function<void(Node&)> backward;

  T* grad_buffer() {
    if (grad.empty()) grad.assign(value.size(), T(0));
    return grad.data();
  }
};

}  // namespace detail

// Dense row-major tensor handle. Copies share storage and graph position, so
// a parameter tensor held by a module and by the optimizer is the same
// object.
template <typename T>
class Tensor {
 public:
  using value_type = T;

  Tensor() = default;
  explicit Tensor(Shape shape, T fill = T(0));
  Tensor(Shape shape, std::vector<T> values);

  static Tensor scalar(T value) { return Tensor(Shape{1}, std::vector<T>{value}); }
  static Tensor from_node(std::shared_ptr<detail::Node<T>> node) {
    Tensor t;
    t.node_ = std::move(node);
    return t;
  }

  bool defined() const noexcept { return node_ != nullptr; }
  const Shape& shape() const { return node_->shape; }
  std::size_t rank() const { return node_->shape.size(); }
  std::size_t dim(std::size_t axis) const { return node_->shape.at(axis); }
  std::size_t numel() const { return node_->value.size(); }

  std::span<const T> values() const { return node_->value; }
  // Writes bypass the graph; only meant for leaves (parameters, inputs).
  std::span<T> mutable_values() { return node_->value; }

  T item() const;
  T at(std::size_t i) const { return node_->value.at(i); }
  T at(std::size_t row, std::size_t col) const;

  bool requires_grad() const { return node_->requires_grad; }
  Tensor& set_requires_grad(bool on) {
    node_->requires_grad = on;
    return *this;
  }

  bool has_grad() const { return !node_->grad.empty(); }
  // Zero-filled view when nothing has been accumulated yet.
  std::span<const T> grad() const;
  std::span<T> mutable_grad() { return {node_->grad_buffer(), node_->value.size()}; }
  void zero_grad() { node_->grad.clear(); }

  // Reverse pass from this tensor; it must hold a single element unless a
  // seed of matching size is given.
  void backward() const { backward(T(1)); }
  void backward(T seed) const;
  void backward(std::span<const T> seed) const;

  // Same values, no graph history, no grad requirement.
  Tensor detach() const { return Tensor(shape(), node_->value); }

  const std::shared_ptr<detail::Node<T>>& node() const { return node_; }

 private:
  std::shared_ptr<detail::Node<T>> node_;
};

template <typename T>
struct NamedParameter {
  std::string name;
  Tensor<T> tensor;
};

template <typename T>
using ParameterList = std::vector<NamedParameter<T>>;

template <typename T>
std::size_t total_size(const ParameterList<T>& params) {
  std::size_t n = 0;
  for (const auto& p : params) n += p.tensor.numel();
  return n;
}

extern template class Tensor<float>;
extern template class Tensor<double>;

}  // namespace longcode
