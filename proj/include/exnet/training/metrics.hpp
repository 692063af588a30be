#pragma once

#include <cstddef>
#include <span>

#include "exnet/numerics/tensor.hpp"

namespace exnet::training {

inline constexpr double kBceEps = 1e-7;

// Scalar BCE on a probability clamped to [1e-7, 1 - 1e-7].
double bce_loss(double p, int y);
// Differentiable form over a scalar probability tensor.
template <typename T>
numerics::Tensor<T> bce_loss(const numerics::Tensor<T>& p, int y);

struct F1Result {
  double f1 = 0;
  double precision = 0;
  double recall = 0;
  std::size_t tp = 0, fp = 0, fn = 0, tn = 0;
};

// Positive-class F1. Zero denominators give 0. Throws ValidationError on
// mismatched lengths, empty input or values other than 0/1.
F1Result f1_score(std::span<const int> preds, std::span<const int> golds);

}  // namespace exnet::training
