#include "longcode/adam.hpp"

#include <cmath>
#include <string>

#include "longcode/error.hpp"

namespace longcode {

template <typename T>
void adam_update(std::span<T> param, std::span<const T> grad, std::span<T> m, std::span<T> v,
                 std::int64_t t, const AdamOptions& options) {
  if (grad.size() != param.size() || m.size() != param.size() || v.size() != param.size()) {
    throw ShapeError("adam_update: buffer sizes differ (param " + std::to_string(param.size()) +
                     ", grad " + std::to_string(grad.size()) + ")");
  }
  if (t < 1) throw ConfigError("adam_update: step must be >= 1");
  const double c1 = 1.0 - std::pow(options.beta1, static_cast<double>(t));
  const double c2 = 1.0 - std::pow(options.beta2, static_cast<double>(t));
  const T b1 = static_cast<T>(options.beta1);
  const T b2 = static_cast<T>(options.beta2);
  for (std::size_t i = 0; i < param.size(); ++i) {
    const T g = grad[i];
    m[i] = b1 * m[i] + (T(1) - b1) * g;
    v[i] = b2 * v[i] + (T(1) - b2) * g * g;
    const double m_hat = static_cast<double>(m[i]) / c1;
    const double v_hat = static_cast<double>(v[i]) / c2;
    param[i] -= static_cast<T>(options.lr * m_hat / (std::sqrt(v_hat) + options.eps));
  }
}

template <typename T>
void adam_step(std::span<Tensor<T>> params, AdamState<T>& state) {
  if (state.m.empty() && state.step == 0) {
    for (const auto& p : params) {
      state.m.emplace_back(p.numel(), T(0));
      state.v.emplace_back(p.numel(), T(0));
    }
  }
  if (state.m.size() != params.size()) {
    throw ShapeError("adam_step: state tracks " + std::to_string(state.m.size()) +
                     " parameters, got " + std::to_string(params.size()));
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (state.m[i].size() != params[i].numel()) {
      throw ShapeError("adam_step: moment buffer " + std::to_string(i) + " has " +
                       std::to_string(state.m[i].size()) + " entries, parameter has shape " +
                       shape_string(params[i].shape()));
    }
  }
  ++state.step;
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto& p = params[i];
    if (!p.has_grad()) {
      // Zero gradient still decays the moments.
      const std::vector<T> zeros(p.numel(), T(0));
      adam_update<T>(p.mutable_values(), zeros, state.m[i], state.v[i], state.step, state.options);
    } else {
      adam_update<T>(p.mutable_values(), p.grad(), state.m[i], state.v[i], state.step,
                     state.options);
    }
  }
}

template void adam_update<float>(std::span<float>, std::span<const float>, std::span<float>,
                                 std::span<float>, std::int64_t, const AdamOptions&);
template void adam_update<double>(std::span<double>, std::span<const double>, std::span<double>,
                                  std::span<double>, std::int64_t, const AdamOptions&);
template void adam_step<float>(std::span<Tensor<float>>, AdamState<float>&);
template void adam_step<double>(std::span<Tensor<double>>, AdamState<double>&);

}  // namespace longcode
