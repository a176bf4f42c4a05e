#include "longcode/ops.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "kernels.hpp"
#include "longcode/error.hpp"

namespace longcode {
namespace {

template <typename T>
using NodePtr = std::shared_ptr<detail::Node<T>>;

template <typename T>
using BackwardFn = std::function<void(detail::Node<T>&)>;

template <typename T>
Tensor<T> finish(const char* op, Shape shape, std::vector<T> value,
                 std::vector<NodePtr<T>> inputs, BackwardFn<T> backward) {
#ifndef NDEBUG
  for (const T v : value) {
    if (!std::isfinite(v)) throw NumericError(std::string(op) + " produced a non-finite value");
  }
#else
  (void)op;
#endif
  auto node = std::make_shared<detail::Node<T>>();
  node->shape = std::move(shape);
  node->value = std::move(value);
  const bool needs_grad =
      std::any_of(inputs.begin(), inputs.end(), [](const auto& n) { return n->requires_grad; });
  if (needs_grad) {
    node->requires_grad = true;
    node->inputs = std::move(inputs);
    node->backward = std::move(backward);
  }
  return Tensor<T>::from_node(std::move(node));
}

template <typename T>
void require_rank(const Tensor<T>& t, std::size_t rank, const char* op) {
  if (t.rank() != rank) {
    throw ShapeError(std::string(op) + ": expected rank " + std::to_string(rank) + ", got " +
                     shape_string(t.shape()));
  }
}

template <typename T>
void require_same_shape(const Tensor<T>& a, const Tensor<T>& b, const char* op) {
  if (a.shape() != b.shape()) {
    throw ShapeError(std::string(op) + ": shape mismatch " + shape_string(a.shape()) + " vs " +
                     shape_string(b.shape()));
  }
}

// Elementwise unary op whose derivative is a function of (x, y).
template <typename T, typename F, typename D>
Tensor<T> unary(const char* op, const Tensor<T>& x, F f, D df) {
  const auto xs = x.values();
  std::vector<T> out(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) out[i] = f(xs[i]);
  return finish<T>(op, x.shape(), std::move(out), {x.node()}, [df](detail::Node<T>& self) {
    auto& in = *self.inputs[0];
    T* gi = in.grad_buffer();
    for (std::size_t i = 0; i < self.value.size(); ++i) {
      gi[i] += self.grad[i] * df(in.value[i], self.value[i]);
    }
  });
}

std::size_t last_dim(const Shape& s) { return s.empty() ? 1 : s.back(); }

}  // namespace

template <typename T>
Tensor<T> matmul(const Tensor<T>& a, const Tensor<T>& b) {
  require_rank(a, 2, "matmul");
  require_rank(b, 2, "matmul");
  const std::size_t m = a.dim(0), k = a.dim(1), n = b.dim(1);
  if (b.dim(0) != k) {
    throw ShapeError("matmul: inner dimensions differ, " + shape_string(a.shape()) + " x " +
                     shape_string(b.shape()));
  }
  std::vector<T> out(m * n, T(0));
  kernels::gemm_nn(m, k, n, a.values().data(), b.values().data(), out.data());
  return finish<T>("matmul", {m, n}, std::move(out), {a.node(), b.node()},
                   [m, k, n](detail::Node<T>& self) {
                     auto& an = *self.inputs[0];
                     auto& bn = *self.inputs[1];
                     if (an.requires_grad) {
                       kernels::gemm_nt(m, n, k, self.grad.data(), bn.value.data(),
                                        an.grad_buffer());
                     }
                     if (bn.requires_grad) {
                       kernels::gemm_tn(m, k, n, an.value.data(), self.grad.data(),
                                        bn.grad_buffer());
                     }
                   });
}

template <typename T>
Tensor<T> matmul_bt(const Tensor<T>& a, const Tensor<T>& b) {
  require_rank(a, 2, "matmul_bt");
  require_rank(b, 2, "matmul_bt");
  const std::size_t m = a.dim(0), k = a.dim(1), n = b.dim(0);
  if (b.dim(1) != k) {
    throw ShapeError("matmul_bt: inner dimensions differ, " + shape_string(a.shape()) +
                     " x " + shape_string(b.shape()) + "^T");
  }
  std::vector<T> out(m * n, T(0));
  kernels::gemm_nt(m, k, n, a.values().data(), b.values().data(), out.data());
  return finish<T>("matmul_bt", {m, n}, std::move(out), {a.node(), b.node()},
                   [m, k, n](detail::Node<T>& self) {
                     auto& an = *self.inputs[0];
                     auto& bn = *self.inputs[1];
                     if (an.requires_grad) {
                       kernels::gemm_nn(m, n, k, self.grad.data(), bn.value.data(),
                                        an.grad_buffer());
                     }
                     if (bn.requires_grad) {
                       kernels::gemm_tn(m, n, k, self.grad.data(), an.value.data(),
                                        bn.grad_buffer());
                     }
                   });
}

template <typename T>
Tensor<T> add(const Tensor<T>& a, const Tensor<T>& b) {
  require_same_shape(a, b, "add");
  const auto av = a.values();
  const auto bv = b.values();
  std::vector<T> out(av.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = av[i] + bv[i];
  return finish<T>("add", a.shape(), std::move(out), {a.node(), b.node()},
                   [](detail::Node<T>& self) {
                     for (auto& in : self.inputs) {
                       if (!in->requires_grad) continue;
                       T* g = in->grad_buffer();
                       for (std::size_t i = 0; i < self.grad.size(); ++i) g[i] += self.grad[i];
                     }
                   });
}

template <typename T>
Tensor<T> add_bias(const Tensor<T>& x, const Tensor<T>& bias) {
  require_rank(bias, 1, "add_bias");
  const std::size_t n = last_dim(x.shape());
  if (bias.dim(0) != n) {
    throw ShapeError("add_bias: bias " + shape_string(bias.shape()) + " does not match " +
                     shape_string(x.shape()));
  }
  const auto xv = x.values();
  const auto bv = bias.values();
  std::vector<T> out(xv.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = xv[i] + bv[i % n];
  return finish<T>("add_bias", x.shape(), std::move(out), {x.node(), bias.node()},
                   [n](detail::Node<T>& self) {
                     auto& xn = *self.inputs[0];
                     auto& bn = *self.inputs[1];
                     if (xn.requires_grad) {
                       T* g = xn.grad_buffer();
                       for (std::size_t i = 0; i < self.grad.size(); ++i) g[i] += self.grad[i];
                     }
                     if (bn.requires_grad) {
                       T* g = bn.grad_buffer();
                       for (std::size_t i = 0; i < self.grad.size(); ++i) g[i % n] += self.grad[i];
                     }
                   });
}

template <typename T>
Tensor<T> mul(const Tensor<T>& a, const Tensor<T>& b) {
  require_same_shape(a, b, "mul");
  const auto av = a.values();
  const auto bv = b.values();
  std::vector<T> out(av.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = av[i] * bv[i];
  return finish<T>("mul", a.shape(), std::move(out), {a.node(), b.node()},
                   [](detail::Node<T>& self) {
                     auto& an = *self.inputs[0];
                     auto& bn = *self.inputs[1];
                     if (an.requires_grad) {
                       T* g = an.grad_buffer();
                       for (std::size_t i = 0; i < self.grad.size(); ++i)
                         g[i] += self.grad[i] * bn.value[i];
                     }
                     if (bn.requires_grad) {
                       T* g = bn.grad_buffer();
                       for (std::size_t i = 0; i < self.grad.size(); ++i)
                         g[i] += self.grad[i] * an.value[i];
                     }
                   });
}

template <typename T>
Tensor<T> scale(const Tensor<T>& x, T factor) {
  return unary<T>(
      "scale", x, [factor](T v) { return v * factor; }, [factor](T, T) { return factor; });
}

template <typename T>
Tensor<T> sigmoid(const Tensor<T>& x) {
  return unary<T>(
      "sigmoid", x,
      [](T v) {
        // Split on sign so exp() never overflows.
        if (v >= T(0)) return T(1) / (T(1) + std::exp(-v));
        const T e = std::exp(v);
        return e / (T(1) + e);
      },
      [](T, T y) { return y * (T(1) - y); });
}

template <typename T>
Tensor<T> tanh(const Tensor<T>& x) {
  return unary<T>(
      "tanh", x, [](T v) { return std::tanh(v); }, [](T, T y) { return T(1) - y * y; });
}

template <typename T>
Tensor<T> gelu(const Tensor<T>& x) {
  constexpr T kInvSqrt2 = static_cast<T>(1.0 / std::numbers::sqrt2);
  constexpr T kInvSqrt2Pi = static_cast<T>(0.5 * std::numbers::inv_sqrtpi * std::numbers::sqrt2);
  return unary<T>(
      "gelu", x, [=](T v) { return T(0.5) * v * (T(1) + std::erf(v * kInvSqrt2)); },
      [=](T v, T) {
        const T cdf = T(0.5) * (T(1) + std::erf(v * kInvSqrt2));
        const T pdf = kInvSqrt2Pi * std::exp(T(-0.5) * v * v);
        return cdf + v * pdf;
      });
}

template <typename T>
Tensor<T> softmax(const Tensor<T>& x, int axis) {
  const Shape& shape = x.shape();
  const int rank = static_cast<int>(shape.size());
  if (rank == 0) throw ShapeError("softmax: rank-0 tensor");
  const int ax = axis < 0 ? axis + rank : axis;
  if (ax < 0 || ax >= rank) {
    throw ShapeError("softmax: axis " + std::to_string(axis) + " out of range for " +
                     shape_string(shape));
  }
  std::size_t outer = 1, inner = 1;
  for (int i = 0; i < ax; ++i) outer *= shape[i];
  for (int i = ax + 1; i < rank; ++i) inner *= shape[i];
  const std::size_t len = shape[ax];

  const auto xv = x.values();
  std::vector<T> out(xv.size());
  for (std::size_t o = 0; o < outer; ++o) {
    for (std::size_t in = 0; in < inner; ++in) {
      const std::size_t base = o * len * inner + in;
      T mx = xv[base];
      for (std::size_t j = 1; j < len; ++j) mx = std::max(mx, xv[base + j * inner]);
      T total = T(0);
      for (std::size_t j = 0; j < len; ++j) {
        const T e = std::exp(xv[base + j * inner] - mx);
        out[base + j * inner] = e;
        total += e;
      }
      const T inv = T(1) / total;
      for (std::size_t j = 0; j < len; ++j) out[base + j * inner] *= inv;
    }
  }
  return finish<T>("softmax", shape, std::move(out), {x.node()},
                   [outer, inner, len](detail::Node<T>& self) {
                     T* g = self.inputs[0]->grad_buffer();
                     const auto& y = self.value;
                     const auto& dy = self.grad;
                     for (std::size_t o = 0; o < outer; ++o) {
                       for (std::size_t in = 0; in < inner; ++in) {
                         const std::size_t base = o * len * inner + in;
                         T dot = T(0);
                         for (std::size_t j = 0; j < len; ++j) {
                           const std::size_t idx = base + j * inner;
                           dot += y[idx] * dy[idx];
                         }
                         for (std::size_t j = 0; j < len; ++j) {
                           const std::size_t idx = base + j * inner;
                           g[idx] += y[idx] * (dy[idx] - dot);
                         }
                       }
                     }
                   });
}

template <typename T>
Tensor<T> layer_norm(const Tensor<T>& x, const Tensor<T>& gamma, const Tensor<T>& beta,
                     T eps) {
  const std::size_t d = last_dim(x.shape());
  if (d == 0) throw ShapeError("layer_norm: empty last dimension");
  if (gamma.shape() != Shape{d} || beta.shape() != Shape{d}) {
    throw ShapeError("layer_norm: gamma/beta must be [" + std::to_string(d) + "], got " +
                     shape_string(gamma.shape()) + " and " + shape_string(beta.shape()));
  }
  const std::size_t rows = x.numel() / d;
  const auto xv = x.values();
  const auto gv = gamma.values();
  const auto bv = beta.values();
  std::vector<T> out(xv.size());
  std::vector<T> xhat(xv.size());
  std::vector<T> rstd(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    const T* row = xv.data() + r * d;
    T mu = T(0);
    for (std::size_t j = 0; j < d; ++j) mu += row[j];
    mu /= static_cast<T>(d);
    T var = T(0);
    for (std::size_t j = 0; j < d; ++j) var += (row[j] - mu) * (row[j] - mu);
    var /= static_cast<T>(d);
    rstd[r] = T(1) / std::sqrt(var + eps);
    for (std::size_t j = 0; j < d; ++j) {
      const T h = (row[j] - mu) * rstd[r];
      xhat[r * d + j] = h;
      out[r * d + j] = h * gv[j] + bv[j];
    }
  }
  return finish<T>(
      "layer_norm", x.shape(), std::move(out), {x.node(), gamma.node(), beta.node()},
      [rows, d, xhat = std::move(xhat), rstd = std::move(rstd)](detail::Node<T>& self) {
        auto& xn = *self.inputs[0];
        auto& gn = *self.inputs[1];
        auto& bn = *self.inputs[2];
        const auto& dy = self.grad;
        if (gn.requires_grad) {
          T* g = gn.grad_buffer();
          for (std::size_t i = 0; i < dy.size(); ++i) g[i % d] += dy[i] * xhat[i];
        }
        if (bn.requires_grad) {
          T* g = bn.grad_buffer();
          for (std::size_t i = 0; i < dy.size(); ++i) g[i % d] += dy[i];
        }
        if (xn.requires_grad) {
          T* g = xn.grad_buffer();
          const T inv_d = T(1) / static_cast<T>(d);
          for (std::size_t r = 0; r < rows; ++r) {
            T sum_dh = T(0), sum_dh_h = T(0);
            for (std::size_t j = 0; j < d; ++j) {
              const T dh = dy[r * d + j] * gn.value[j];
              sum_dh += dh;
              sum_dh_h += dh * xhat[r * d + j];
            }
            for (std::size_t j = 0; j < d; ++j) {
              const T dh = dy[r * d + j] * gn.value[j];
              g[r * d + j] +=
                  rstd[r] * (dh - inv_d * sum_dh - xhat[r * d + j] * inv_d * sum_dh_h);
            }
          }
        }
      });
}

template <typename T>
Tensor<T> gather_rows(const Tensor<T>& x, std::span<const std::size_t> rows) {
  require_rank(x, 2, "gather_rows");
  const std::size_t n = x.dim(0), d = x.dim(1);
  for (std::size_t r : rows) {
    if (r >= n) {
      throw IndexError("gather_rows: row " + std::to_string(r) + " out of range for " +
                       shape_string(x.shape()));
    }
  }
  const auto xv = x.values();
  std::vector<T> out(rows.size() * d);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    std::copy_n(xv.data() + rows[i] * d, d, out.data() + i * d);
  }
  std::vector<std::size_t> idx(rows.begin(), rows.end());
  return finish<T>("gather_rows", {rows.size(), d}, std::move(out), {x.node()},
                   [d, idx = std::move(idx)](detail::Node<T>& self) {
                     T* g = self.inputs[0]->grad_buffer();
                     for (std::size_t i = 0; i < idx.size(); ++i) {
                       const T* src = self.grad.data() + i * d;
                       T* dst = g + idx[i] * d;
                       for (std::size_t j = 0; j < d; ++j) dst[j] += src[j];
                     }
                   });
}

template <typename T>
Tensor<T> embedding_gather(const Tensor<T>& table, std::span<const TokenId> ids) {
  require_rank(table, 2, "embedding_gather");
  std::vector<std::size_t> rows(ids.size());
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] < 0 || static_cast<std::size_t>(ids[i]) >= table.dim(0)) {
      throw IndexError("embedding_gather: id " + std::to_string(ids[i]) +
                       " out of range for table " + shape_string(table.shape()));
    }
    rows[i] = static_cast<std::size_t>(ids[i]);
  }
  return gather_rows(table, rows);
}

template <typename T>
Tensor<T> concat_rows(const std::vector<Tensor<T>>& parts) {
  if (parts.empty()) throw ShapeError("concat_rows: no inputs");
  const std::size_t d = parts[0].dim(1);
  std::size_t total = 0;
  std::vector<NodePtr<T>> inputs;
  for (const auto& p : parts) {
    require_rank(p, 2, "concat_rows");
    if (p.dim(1) != d) {
      throw ShapeError("concat_rows: column mismatch " + shape_string(parts[0].shape()) +
                       " vs " + shape_string(p.shape()));
    }
    total += p.dim(0);
    inputs.push_back(p.node());
  }
  std::vector<T> out;
  out.reserve(total * d);
  for (const auto& p : parts) out.insert(out.end(), p.values().begin(), p.values().end());
  return finish<T>("concat_rows", {total, d}, std::move(out), std::move(inputs),
                   [](detail::Node<T>& self) {
                     std::size_t offset = 0;
                     for (auto& in : self.inputs) {
                       const std::size_t n = in->value.size();
                       if (in->requires_grad) {
                         T* g = in->grad_buffer();
                         for (std::size_t i = 0; i < n; ++i) g[i] += self.grad[offset + i];
                       }
                       offset += n;
                     }
                   });
}

template <typename T>
Tensor<T> concat_cols(const std::vector<Tensor<T>>& parts) {
  if (parts.empty()) throw ShapeError("concat_cols: no inputs");
  const std::size_t rows = parts[0].dim(0);
  std::size_t total = 0;
  std::vector<NodePtr<T>> inputs;
  std::vector<std::size_t> widths;
  for (const auto& p : parts) {
    require_rank(p, 2, "concat_cols");
    if (p.dim(0) != rows) {
      throw ShapeError("concat_cols: row mismatch " + shape_string(parts[0].shape()) + " vs " +
                       shape_string(p.shape()));
    }
    widths.push_back(p.dim(1));
    total += p.dim(1);
    inputs.push_back(p.node());
  }
  std::vector<T> out(rows * total);
  std::size_t col = 0;
  for (const auto& p : parts) {
    const std::size_t w = p.dim(1);
    const auto v = p.values();
    for (std::size_t r = 0; r < rows; ++r) {
      std::copy_n(v.data() + r * w, w, out.data() + r * total + col);
    }
    col += w;
  }
  return finish<T>("concat_cols", {rows, total}, std::move(out), std::move(inputs),
                   [rows, total, widths = std::move(widths)](detail::Node<T>& self) {
                     std::size_t col = 0;
                     for (std::size_t k = 0; k < widths.size(); ++k) {
                       auto& in = *self.inputs[k];
                       const std::size_t w = widths[k];
                       if (in.requires_grad) {
                         T* g = in.grad_buffer();
                         for (std::size_t r = 0; r < rows; ++r)
                           for (std::size_t j = 0; j < w; ++j)
                             g[r * w + j] += self.grad[r * total + col + j];
                       }
                       col += w;
                     }
                   });
}

template <typename T>
Tensor<T> slice_cols(const Tensor<T>& x, std::size_t begin, std::size_t end) {
  require_rank(x, 2, "slice_cols");
  const std::size_t rows = x.dim(0), cols = x.dim(1);
  if (begin > end || end > cols) {
    throw IndexError("slice_cols: [" + std::to_string(begin) + "," + std::to_string(end) +
                     ") out of range for " + shape_string(x.shape()));
  }
  const std::size_t w = end - begin;
  const auto v = x.values();
  std::vector<T> out(rows * w);
  for (std::size_t r = 0; r < rows; ++r) {
    std::copy_n(v.data() + r * cols + begin, w, out.data() + r * w);
  }
  return finish<T>("slice_cols", {rows, w}, std::move(out), {x.node()},
                   [rows, cols, begin, w](detail::Node<T>& self) {
                     T* g = self.inputs[0]->grad_buffer();
                     for (std::size_t r = 0; r < rows; ++r)
                       for (std::size_t j = 0; j < w; ++j)
                         g[r * cols + begin + j] += self.grad[r * w + j];
                   });
}

template <typename T>
Tensor<T> mask_fill(const Tensor<T>& x, const std::vector<bool>& last_axis_mask, T fill) {
  const std::size_t n = last_dim(x.shape());
  if (last_axis_mask.size() != n) {
    throw ShapeError("mask_fill: mask of length " + std::to_string(last_axis_mask.size()) +
                     " for " + shape_string(x.shape()));
  }
  const auto v = x.values();
  std::vector<T> out(v.begin(), v.end());
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (last_axis_mask[i % n]) out[i] = fill;
  }
  return finish<T>("mask_fill", x.shape(), std::move(out), {x.node()},
                   [n, mask = last_axis_mask](detail::Node<T>& self) {
                     T* g = self.inputs[0]->grad_buffer();
                     for (std::size_t i = 0; i < self.grad.size(); ++i) {
                       if (!mask[i % n]) g[i] += self.grad[i];
                     }
                   });
}

template <typename T>
Tensor<T> rowwise_dot(const Tensor<T>& a, const Tensor<T>& b) {
  require_rank(a, 2, "rowwise_dot");
  require_same_shape(a, b, "rowwise_dot");
  const std::size_t m = a.dim(0), n = a.dim(1);
  const auto av = a.values();
  const auto bv = b.values();
  std::vector<T> out(m, T(0));
  for (std::size_t i = 0; i < m; ++i) {
    T acc = T(0);
    for (std::size_t j = 0; j < n; ++j) acc += av[i * n + j] * bv[i * n + j];
    out[i] = acc;
  }
  return finish<T>("rowwise_dot", {m}, std::move(out), {a.node(), b.node()},
                   [m, n](detail::Node<T>& self) {
                     auto& an = *self.inputs[0];
                     auto& bn = *self.inputs[1];
                     if (an.requires_grad) {
                       T* g = an.grad_buffer();
                       for (std::size_t i = 0; i < m; ++i)
                         for (std::size_t j = 0; j < n; ++j)
                           g[i * n + j] += self.grad[i] * bn.value[i * n + j];
                     }
                     if (bn.requires_grad) {
                       T* g = bn.grad_buffer();
                       for (std::size_t i = 0; i < m; ++i)
                         for (std::size_t j = 0; j < n; ++j)
                           g[i * n + j] += self.grad[i] * an.value[i * n + j];
                     }
                   });
}

template <typename T>
Tensor<T> reshape(const Tensor<T>& x, Shape shape) {
  if (shape_numel(shape) != x.numel()) {
    throw ShapeError("reshape: cannot view " + shape_string(x.shape()) + " as " +
                     shape_string(shape));
  }
  const auto v = x.values();
  return finish<T>("reshape", std::move(shape), std::vector<T>(v.begin(), v.end()), {x.node()},
                   [](detail::Node<T>& self) {
                     T* g = self.inputs[0]->grad_buffer();
                     for (std::size_t i = 0; i < self.grad.size(); ++i) g[i] += self.grad[i];
                   });
}

template <typename T>
Tensor<T> sum(const Tensor<T>& x) {
  T acc = T(0);
  for (const T v : x.values()) acc += v;
  return finish<T>("sum", {1}, {acc}, {x.node()}, [](detail::Node<T>& self) {
    auto& in = *self.inputs[0];
    T* g = in.grad_buffer();
    for (std::size_t i = 0; i < in.value.size(); ++i) g[i] += self.grad[0];
  });
}

template <typename T>
Tensor<T> mean(const Tensor<T>& x) {
  if (x.numel() == 0) throw ShapeError("mean: empty tensor");
  return scale(sum(x), T(1) / static_cast<T>(x.numel()));
}

template <typename T>
Tensor<T> unfold_rows(const Tensor<T>& x, std::size_t width) {
  require_rank(x, 2, "unfold_rows");
  if (width % 2 == 0) throw ShapeError("unfold_rows: width must be odd");
  const std::size_t n = x.dim(0), c = x.dim(1);
  const std::size_t half = width / 2;
  const std::size_t out_cols = width * c;
  const auto v = x.values();
  std::vector<T> out(n * out_cols, T(0));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t w = 0; w < width; ++w) {
      if (i + w < half || i + w - half >= n) continue;
      std::copy_n(v.data() + (i + w - half) * c, c, out.data() + i * out_cols + w * c);
    }
  }
  return finish<T>("unfold_rows", {n, out_cols}, std::move(out), {x.node()},
                   [n, c, width, half, out_cols](detail::Node<T>& self) {
                     T* g = self.inputs[0]->grad_buffer();
                     for (std::size_t i = 0; i < n; ++i) {
                       for (std::size_t w = 0; w < width; ++w) {
                         if (i + w < half || i + w - half >= n) continue;
                         const T* src = self.grad.data() + i * out_cols + w * c;
                         T* dst = g + (i + w - half) * c;
                         for (std::size_t j = 0; j < c; ++j) dst[j] += src[j];
                       }
                     }
                   });
}

template <typename T>
Tensor<T> binary_cross_entropy(const Tensor<T>& probs, std::span<const std::uint32_t> positives,
                               T clamp) {
  require_rank(probs, 1, "binary_cross_entropy");
  const std::size_t k = probs.dim(0);
  std::vector<T> target(k, T(0));
  for (std::uint32_t c : positives) {
    if (c >= k) {
      throw IndexError("binary_cross_entropy: class " + std::to_string(c) +
                       " out of range for K=" + std::to_string(k));
    }
    target[c] = T(1);
  }
  const T lo = clamp;
  const T hi = T(1) - clamp;
  const auto p = probs.values();
  T loss = T(0);
  for (std::size_t c = 0; c < k; ++c) {
    const T q = std::clamp(p[c], lo, hi);
    loss -= target[c] > T(0) ? std::log(q) : std::log(T(1) - q);
  }
  return finish<T>("binary_cross_entropy", {1}, {loss}, {probs.node()},
                   [k, lo, hi, target = std::move(target)](detail::Node<T>& self) {
                     auto& in = *self.inputs[0];
                     T* g = in.grad_buffer();
                     for (std::size_t c = 0; c < k; ++c) {
                       const T q = in.value[c];
                       if (q < lo || q > hi) continue;
                       const T d = target[c] > T(0) ? -T(1) / q : T(1) / (T(1) - q);
                       g[c] += self.grad[0] * d;
                     }
                   });
}

#define LONGCODE_INSTANTIATE_OPS(T)                                                        \
  template Tensor<T> matmul(const Tensor<T>&, const Tensor<T>&);                           \
  template Tensor<T> matmul_bt(const Tensor<T>&, const Tensor<T>&);                        \
  template Tensor<T> add(const Tensor<T>&, const Tensor<T>&);                              \
  template Tensor<T> add_bias(const Tensor<T>&, const Tensor<T>&);                         \
  template Tensor<T> mul(const Tensor<T>&, const Tensor<T>&);                              \
  template Tensor<T> scale(const Tensor<T>&, T);                                           \
  template Tensor<T> sigmoid(const Tensor<T>&);                                            \
  template Tensor<T> tanh(const Tensor<T>&);                                               \
  template Tensor<T> gelu(const Tensor<T>&);                                               \
  template Tensor<T> softmax(const Tensor<T>&, int);                                       \
  template Tensor<T> layer_norm(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&, T);  \
  template Tensor<T> embedding_gather(const Tensor<T>&, std::span<const TokenId>);         \
  template Tensor<T> gather_rows(const Tensor<T>&, std::span<const std::size_t>);          \
  template Tensor<T> concat_rows(const std::vector<Tensor<T>>&);                           \
  template Tensor<T> concat_cols(const std::vector<Tensor<T>>&);                           \
  template Tensor<T> slice_cols(const Tensor<T>&, std::size_t, std::size_t);               \
  template Tensor<T> mask_fill(const Tensor<T>&, const std::vector<bool>&, T);             \
  template Tensor<T> rowwise_dot(const Tensor<T>&, const Tensor<T>&);                      \
  template Tensor<T> reshape(const Tensor<T>&, Shape);                                     \
  template Tensor<T> sum(const Tensor<T>&);                                                \
  template Tensor<T> mean(const Tensor<T>&);                                               \
  template Tensor<T> unfold_rows(const Tensor<T>&, std::size_t);                           \
  template Tensor<T> binary_cross_entropy(const Tensor<T>&, std::span<const std::uint32_t>, T);

LONGCODE_INSTANTIATE_OPS(float)
LONGCODE_INSTANTIATE_OPS(double)

}  // namespace longcode
