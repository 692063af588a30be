#pragma once

// Central-difference gradient estimates. Test-side oracle for backward();
// run it in double precision.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <utility>
#include <vector>

#include "exnet/numerics/tensor.hpp"

namespace exnet::numerics {

// (f(x + h e_i) - f(x - h e_i)) / 2h for every element i. `x` is perturbed
// in place and restored; `f` receives x and returns a scalar.
template <typename T, typename F>
Tensor<T> finite_diff_grad(F&& f, Tensor<T>& x, T h) {
  auto values = x.mutable_data();
  std::vector<T> out(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    const T saved = values[i];
    values[i] = saved + h;
    const T up = static_cast<T>(f(std::as_const(x)));
    values[i] = saved - h;
    const T down = static_cast<T>(f(std::as_const(x)));
    values[i] = saved;
    out[i] = (up - down) / (T(2) * h);
  }
  return Tensor<T>::from_data(x.shape(), std::move(out));
}

// |a - b| / max(|a|, |b|, floor). The floor keeps near-zero gradients from
// reporting huge relative errors on rounding noise.
inline double relative_error(double a, double b, double floor = 1e-5) {
  const double denom = std::max({std::abs(a), std::abs(b), floor});
  return std::abs(a - b) / denom;
}

}  // namespace exnet::numerics
