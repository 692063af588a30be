#include "exnet/training/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "exnet/error.hpp"
#include "exnet/numerics/ops.hpp"

namespace exnet::training {

double bce_loss(double p, int y) {
  const double pc = std::clamp(p, kBceEps, 1.0 - kBceEps);
  return y == 1 ? -std::log(pc) : -std::log1p(-pc);
}

template <typename T>
numerics::Tensor<T> bce_loss(const numerics::Tensor<T>& p, int y) {
  return numerics::binary_cross_entropy(p, static_cast<T>(y), static_cast<T>(kBceEps));
}

template numerics::Tensor<float> bce_loss(const numerics::Tensor<float>&, int);
template numerics::Tensor<double> bce_loss(const numerics::Tensor<double>&, int);

F1Result f1_score(std::span<const int> preds, std::span<const int> golds) {
  if (preds.size() != golds.size()) {
    throw ValidationError("preds", std::to_string(preds.size()) + " predictions for " +
                                       std::to_string(golds.size()) + " gold labels");
  }
  if (preds.empty()) throw ValidationError("preds", "no predictions");
  F1Result r;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    const int p = preds[i], g = golds[i];
    if ((p != 0 && p != 1) || (g != 0 && g != 1)) {
      throw ValidationError("preds", "entry " + std::to_string(i) + " is not 0 or 1");
    }
    if (p && g) ++r.tp;
    else if (p) ++r.fp;
    else if (g) ++r.fn;
    else ++r.tn;
  }
  if (r.tp + r.fp > 0) r.precision = double(r.tp) / double(r.tp + r.fp);
  if (r.tp + r.fn > 0) r.recall = double(r.tp) / double(r.tp + r.fn);
  const std::size_t denom = 2 * r.tp + r.fp + r.fn;
  if (denom > 0) r.f1 = 2.0 * double(r.tp) / double(denom);
  return r;
}

}  // namespace exnet::training
