#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "exnet/numerics/tensor.hpp"

namespace exnet::numerics {

// Elementwise, identical shapes.
template <typename T> Tensor<T> add(const Tensor<T>& a, const Tensor<T>& b);
template <typename T> Tensor<T> mul(const Tensor<T>& a, const Tensor<T>& b);
template <typename T> Tensor<T> scale(const Tensor<T>& a, T factor);

// Sum of same-shape tensors.
template <typename T> Tensor<T> add_n(std::span<const Tensor<T>> terms);

template <typename T> Tensor<T> sum(const Tensor<T>& a);
template <typename T> Tensor<T> mean(const Tensor<T>& a);

// Same data viewed with a new shape of equal element count.
template <typename T> Tensor<T> reshape(const Tensor<T>& a, Shape shape);

// x[..., in] · w[in, out]. Leading axes of x are flattened into rows.
template <typename T> Tensor<T> matmul(const Tensor<T>& x, const Tensor<T>& w);

// x[..., in] · w[in, out] + b[out]
template <typename T> Tensor<T> linear(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& b);

// x·Φ(x), exact erf form.
template <typename T> Tensor<T> gelu(const Tensor<T>& x);
template <typename T> Tensor<T> sigmoid(const Tensor<T>& x);

// Max-subtracted softmax along `axis`.
template <typename T> Tensor<T> softmax(const Tensor<T>& x, std::size_t axis);

// Standardizes each row over the last axis, then applies gamma/beta.
template <typename T>
Tensor<T> layer_norm(const Tensor<T>& x, const Tensor<T>& gamma, const Tensor<T>& beta, T eps);

// Inverted dropout: identity in eval mode; in train mode each element is
// zeroed with probability `rate` and survivors are scaled by 1/(1-rate).
template <typename T>
Tensor<T> dropout(const Tensor<T>& x, double rate, Mode mode, std::mt19937_64& rng);

// Rows of a rank-2 table, in the order given. Gradient scatter-adds.
template <typename T>
Tensor<T> gather_rows(const Tensor<T>& table, std::span<const std::size_t> rows);

// Mean of each group of rows of a rank-2 tensor -> [groups, cols].
template <typename T>
Tensor<T> group_mean_rows(const Tensor<T>& x, std::span<const std::vector<std::size_t>> groups);

// Multi-head scaled dot-product attention.
//   q: [N, Lq, D], k and v: [N, Lk, D], D divisible by n_heads.
// Head h uses columns [h*D/H, (h+1)*D/H). `key_mask`, when non-empty, has
// N*Lk entries; keys with mask 0 are excluded from the softmax. Every query
// row must see at least one unmasked key.
template <typename T>
Tensor<T> attention(const Tensor<T>& q, const Tensor<T>& k, const Tensor<T>& v,
                    std::size_t n_heads, std::span<const std::uint8_t> key_mask = {});

// -(y ln p + (1-y) ln(1-p)) with p clamped to [eps, 1-eps]; scalar p.
// The gradient is evaluated at the clamped value.
template <typename T>
Tensor<T> binary_cross_entropy(const Tensor<T>& p, T target, T eps);

// Mean of the above over a rank-1 batch, one target per element.
template <typename T>
Tensor<T> mean_binary_cross_entropy(const Tensor<T>& p, std::span<const T> targets, T eps);

template <typename T> bool all_finite(const Tensor<T>& x);

}  // namespace exnet::numerics
