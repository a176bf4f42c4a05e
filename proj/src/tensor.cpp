#include "longcode/tensor.hpp"

#include <algorithm>
#include <unordered_set>

#include "longcode/error.hpp"

namespace longcode {

std::size_t shape_numel(const Shape& shape) {
  std::size_t n = 1;
  for (std::size_t d : shape) n *= d;
  return n;
}

std::string shape_string(const Shape& shape) {
  std::string out = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) out += "x";
    out += std::to_string(shape[i]);
  }
  return out + "]";
}

template <typename T>
Tensor<T>::Tensor(Shape shape, T fill) : node_(std::make_shared<detail::Node<T>>()) {
  node_->value.assign(shape_numel(shape), fill);
  node_->shape = std::move(shape);
}

template <typename T>
Tensor<T>::Tensor(Shape shape, std::vector<T> values)
    : node_(std::make_shared<detail::Node<T>>()) {
  if (shape_numel(shape) != values.size()) {
    throw ShapeError("tensor shape " + shape_string(shape) + " holds " +
                     std::to_string(shape_numel(shape)) + " elements, got " +
                     std::to_string(values.size()));
  }
  node_->shape = std::move(shape);
  node_->value = std::move(values);
}

template <typename T>
T Tensor<T>::item() const {
  if (numel() != 1) {
    throw ShapeError("item() on tensor of shape " + shape_string(shape()));
  }
  return node_->value[0];
}

template <typename T>
T Tensor<T>::at(std::size_t row, std::size_t col) const {
  if (rank() != 2 || row >= dim(0) || col >= dim(1)) {
    throw IndexError("index (" + std::to_string(row) + "," + std::to_string(col) +
                     ") out of range for " + shape_string(shape()));
  }
  return node_->value[row * dim(1) + col];
}

template <typename T>
std::span<const T> Tensor<T>::grad() const {
  return {node_->grad_buffer(), node_->value.size()};
}

template <typename T>
void Tensor<T>::backward(T seed) const {
  if (numel() != 1) {
    throw ShapeError("backward() without seed needs a single-element tensor, got " +
                     shape_string(shape()));
  }
  const T s[1] = {seed};
  backward(std::span<const T>(s, 1));
}

template <typename T>
void Tensor<T>::backward(std::span<const T> seed) const {
  if (seed.size() != numel()) {
    throw ShapeError("backward seed has " + std::to_string(seed.size()) +
                     " elements, tensor has " + std::to_string(numel()));
  }
  if (!node_->requires_grad) return;

  // Iterative post-order DFS gives a topological order (inputs first).
  using NodePtr = detail::Node<T>*;
  std::vector<NodePtr> order;
  std::unordered_set<NodePtr> visited;
  std::vector<std::pair<NodePtr, std::size_t>> stack;
  stack.emplace_back(node_.get(), 0);
  visited.insert(node_.get());
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->inputs.size()) {
      NodePtr child = node->inputs[next++].get();
      if (child->requires_grad && visited.insert(child).second) {
        stack.emplace_back(child, 0);
      }
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }

  T* g = node_->grad_buffer();
  for (std::size_t i = 0; i < seed.size(); ++i) g[i] += seed[i];

  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    NodePtr node = *it;
    if (!node->backward) continue;
    if (!node->grad.empty()) node->backward(*node);
    // Interior grads are consumed; a second pass over the same graph then
    // accumulates into leaves exactly once more.
    node->grad.clear();
  }
}

template class Tensor<float>;
template class Tensor<double>;

}  // namespace longcode
