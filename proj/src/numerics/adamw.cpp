#include "exnet/numerics/adamw.hpp"

#include <cmath>

#include "exnet/error.hpp"

namespace exnet::numerics {

template <typename T>
void adamw_step(std::span<NamedParameter<T>> params, AdamWState<T>& state) {
  if (state.m.empty() && state.v.empty()) {
    for (const auto& p : params) {
      state.m.emplace_back(p.tensor.numel(), T(0));
      state.v.emplace_back(p.tensor.numel(), T(0));
    }
  }
  if (state.m.size() != params.size() || state.v.size() != params.size()) {
    throw ShapeError("adamw_step: optimizer state tracks " + std::to_string(state.m.size()) +
                     " parameters, got " + std::to_string(params.size()));
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    const auto& p = params[i];
    if (state.m[i].size() != p.tensor.numel() || state.v[i].size() != p.tensor.numel()) {
      throw ShapeError("adamw_step: moment size mismatch for parameter '" + p.name + "'");
    }
    for (auto g : p.tensor.grad()) {
      if (!std::isfinite(g)) {
        throw NumericError("adamw_step: non-finite gradient in parameter '" + p.name + "'");
      }
    }
  }

  ++state.step;
  const auto& h = state.hyper;
  const double t = static_cast<double>(state.step);
  const T bias1 = static_cast<T>(1.0 - std::pow(h.beta1, t));
  const T bias2 = static_cast<T>(1.0 - std::pow(h.beta2, t));
  const T lr = static_cast<T>(h.lr);
  const T b1 = static_cast<T>(h.beta1);
  const T b2 = static_cast<T>(h.beta2);
  const T eps = static_cast<T>(h.eps);
  const T wd = static_cast<T>(h.weight_decay);

  for (std::size_t i = 0; i < params.size(); ++i) {
    auto& tensor = params[i].tensor;
    auto w = tensor.mutable_data();
    const auto grad = tensor.grad();
    auto& m = state.m[i];
    auto& v = state.v[i];
    for (std::size_t j = 0; j < w.size(); ++j) {
      const T g = grad.empty() ? T(0) : grad[j];
      m[j] = b1 * m[j] + (T(1) - b1) * g;
      v[j] = b2 * v[j] + (T(1) - b2) * g * g;
      const T m_hat = m[j] / bias1;
      const T v_hat = v[j] / bias2;
      w[j] -= lr * (m_hat / (std::sqrt(v_hat) + eps) + wd * w[j]);
    }
  }
}

template void adamw_step(std::span<NamedParameter<float>>, AdamWState<float>&);
template void adamw_step(std::span<NamedParameter<double>>, AdamWState<double>&);

}  // namespace exnet::numerics
