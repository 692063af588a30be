#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "exnet/numerics/tensor.hpp"

namespace exnet::numerics {

struct AdamWHyper {
  double lr = 2e-5;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.01;
};

template <typename T>
struct NamedParameter {
  std::string name;
  Tensor<T> tensor;
};

template <typename T>
struct AdamWState {
  std::uint64_t step = 0;
  std::vector<std::vector<T>> m;  // first moments, one per parameter
  std::vector<std::vector<T>> v;  // second moments
  AdamWHyper hyper;
};

/// One AdamW update with bias-corrected moments and decoupled weight decay:
///
///   w <- w - lr * (m_hat / (sqrt(v_hat) + eps) + weight_decay * w)
///
/// Parameters without an allocated gradient are treated as having a zero
/// gradient. Moments are lazily sized on the first call. Throws NumericError
/// naming the parameter if any gradient entry is not finite; in that case no
/// parameter is modified.
template <typename T>
void adamw_step(std::span<NamedParameter<T>> params, AdamWState<T>& state);

extern template void adamw_step(std::span<NamedParameter<float>>, AdamWState<float>&);
extern template void adamw_step(std::span<NamedParameter<double>>, AdamWState<double>&);

}  // namespace exnet::numerics
