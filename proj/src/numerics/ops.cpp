#include "exnet/numerics/ops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "exnet/error.hpp"
#include "exnet/util/random.hpp"
#include "kernels.hpp"

namespace exnet::numerics {

namespace {

template <typename T>
using NodeT = detail::Node<T>;

// Gradient buffer of parent `i`, or null when that parent is not differentiable.
template <typename T>
std::vector<T>* parent_grad(NodeT<T>& self, std::size_t i) {
  auto& parent = *self.parents[i];
  return parent.requires_grad ? &parent.ensure_grad() : nullptr;
}

template <typename T>
void require_same_shape(const Tensor<T>& a, const Tensor<T>& b, const char* op) {
  if (a.shape() != b.shape()) {
    throw ShapeError(std::string(op) + ": shape mismatch " + shape_to_string(a.shape()) + " vs " +
                     shape_to_string(b.shape()));
  }
}

template <typename T>
std::size_t last_dim(const Tensor<T>& x, const char* op) {
  if (x.rank() == 0) throw ShapeError(std::string(op) + ": expected rank >= 1, got scalar");
  return x.shape().back();
}

}  // namespace

template <typename T>
Tensor<T> add(const Tensor<T>& a, const Tensor<T>& b) {
  require_same_shape(a, b, "add");
  std::vector<T> out(a.numel());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a[i] + b[i];
  return Tensor<T>::make_result(a.shape(), std::move(out), {a, b}, [](NodeT<T>& self) {
    for (std::size_t p = 0; p < 2; ++p) {
      if (auto* g = parent_grad(self, p)) {
        for (std::size_t i = 0; i < self.grad.size(); ++i) (*g)[i] += self.grad[i];
      }
    }
  });
}

template <typename T>
Tensor<T> mul(const Tensor<T>& a, const Tensor<T>& b) {
  require_same_shape(a, b, "mul");
  std::vector<T> out(a.numel());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a[i] * b[i];
  return Tensor<T>::make_result(a.shape(), std::move(out), {a, b}, [](NodeT<T>& self) {
    const auto& av = self.parents[0]->data;
    const auto& bv = self.parents[1]->data;
    if (auto* g = parent_grad(self, 0)) {
      for (std::size_t i = 0; i < self.grad.size(); ++i) (*g)[i] += self.grad[i] * bv[i];
    }
    if (auto* g = parent_grad(self, 1)) {
      for (std::size_t i = 0; i < self.grad.size(); ++i) (*g)[i] += self.grad[i] * av[i];
    }
  });
}

template <typename T>
Tensor<T> scale(const Tensor<T>& a, T factor) {
  std::vector<T> out(a.numel());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a[i] * factor;
  return Tensor<T>::make_result(a.shape(), std::move(out), {a}, [factor](NodeT<T>& self) {
    if (auto* g = parent_grad(self, 0)) {
      for (std::size_t i = 0; i < self.grad.size(); ++i) (*g)[i] += self.grad[i] * factor;
    }
  });
}

template <typename T>
Tensor<T> add_n(std::span<const Tensor<T>> terms) {
  if (terms.empty()) throw ShapeError("add_n: no terms");
  for (const auto& t : terms) require_same_shape(terms[0], t, "add_n");
  std::vector<T> out(terms[0].numel(), T(0));
  for (const auto& t : terms)
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += t[i];
  return Tensor<T>::make_result(
      terms[0].shape(), std::move(out), std::vector<Tensor<T>>(terms.begin(), terms.end()),
      [](NodeT<T>& self) {
        for (std::size_t p = 0; p < self.parents.size(); ++p) {
          if (auto* g = parent_grad(self, p)) {
            for (std::size_t i = 0; i < self.grad.size(); ++i) (*g)[i] += self.grad[i];
          }
        }
      });
}

template <typename T>
Tensor<T> sum(const Tensor<T>& a) {
  T total = 0;
  for (auto v : a.data()) total += v;
  return Tensor<T>::make_result({}, {total}, {a}, [](NodeT<T>& self) {
    if (auto* g = parent_grad(self, 0)) {
      for (auto& gi : *g) gi += self.grad[0];
    }
  });
}

template <typename T>
Tensor<T> mean(const Tensor<T>& a) {
  if (a.numel() == 0) throw ShapeError("mean: empty tensor");
  return scale(sum(a), T(1) / static_cast<T>(a.numel()));
}

template <typename T>
Tensor<T> reshape(const Tensor<T>& a, Shape shape) {
  if (shape_numel(shape) != a.numel()) {
    throw ShapeError("reshape: cannot view " + shape_to_string(a.shape()) + " as " +
                     shape_to_string(shape));
  }
  std::vector<T> out(a.data().begin(), a.data().end());
  return Tensor<T>::make_result(std::move(shape), std::move(out), {a}, [](NodeT<T>& self) {
    if (auto* g = parent_grad(self, 0)) {
      for (std::size_t i = 0; i < self.grad.size(); ++i) (*g)[i] += self.grad[i];
    }
  });
}

namespace {

template <typename T>
void check_matmul(const Tensor<T>& x, const Tensor<T>& w, const char* op) {
  if (w.rank() != 2 || x.rank() == 0 || x.shape().back() != w.shape()[0]) {
    throw ShapeError(std::string(op) + ": dimension mismatch " + shape_to_string(x.shape()) +
                     " x " + shape_to_string(w.shape()));
  }
}

template <typename T>
Tensor<T> affine(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>* b) {
  const std::size_t in = w.shape()[0];
  const std::size_t out_dim = w.shape()[1];
  const std::size_t rows = x.numel() / in;
  Shape shape = x.shape();
  shape.back() = out_dim;
  std::vector<T> out(rows * out_dim);
  if (b) {
    for (std::size_t r = 0; r < rows; ++r)
      std::copy(b->data().begin(), b->data().end(), out.begin() + r * out_dim);
  }
  kernels::gemm_nn(x.data().data(), w.data().data(), out.data(), rows, in, out_dim, b != nullptr);
  std::vector<Tensor<T>> parents{x, w};
  if (b) parents.push_back(*b);
  return Tensor<T>::make_result(
      std::move(shape), std::move(out), std::move(parents), [rows, in, out_dim](NodeT<T>& self) {
        const T* dy = self.grad.data();
        if (auto* g = parent_grad(self, 0)) {
          kernels::gemm_nt_acc(dy, self.parents[1]->data.data(), g->data(), rows, out_dim, in);
        }
        if (auto* g = parent_grad(self, 1)) {
          kernels::gemm_tn_acc(self.parents[0]->data.data(), dy, g->data(), rows, in, out_dim);
        }
        if (self.parents.size() > 2) {
          if (auto* g = parent_grad(self, 2)) {
            for (std::size_t r = 0; r < rows; ++r)
              for (std::size_t j = 0; j < out_dim; ++j) (*g)[j] += dy[r * out_dim + j];
          }
        }
      });
}

}  // namespace

template <typename T>
Tensor<T> matmul(const Tensor<T>& x, const Tensor<T>& w) {
  check_matmul(x, w, "matmul");
  return affine<T>(x, w, nullptr);
}

template <typename T>
Tensor<T> linear(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& b) {
  check_matmul(x, w, "linear");
  if (b.rank() != 1 || b.shape()[0] != w.shape()[1]) {
    throw ShapeError("linear: bias " + shape_to_string(b.shape()) + " does not match weight " +
                     shape_to_string(w.shape()));
  }
  return affine<T>(x, w, &b);
}

template <typename T>
Tensor<T> gelu(const Tensor<T>& x) {
  const T inv_sqrt2 = T(1) / std::numbers::sqrt2_v<T>;
  std::vector<T> out(x.numel());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const T v = x[i];
    out[i] = T(0.5) * v * (T(1) + std::erf(v * inv_sqrt2));
  }
  return Tensor<T>::make_result(x.shape(), std::move(out), {x}, [inv_sqrt2](NodeT<T>& self) {
    auto* g = parent_grad(self, 0);
    if (!g) return;
    const T inv_sqrt_2pi = std::numbers::inv_sqrtpi_v<T> * inv_sqrt2;
    const auto& xv = self.parents[0]->data;
    for (std::size_t i = 0; i < xv.size(); ++i) {
      const T v = xv[i];
      const T cdf = T(0.5) * (T(1) + std::erf(v * inv_sqrt2));
      const T pdf = inv_sqrt_2pi * std::exp(T(-0.5) * v * v);
      (*g)[i] += self.grad[i] * (cdf + v * pdf);
    }
  });
}

template <typename T>
Tensor<T> sigmoid(const Tensor<T>& x) {
  std::vector<T> out(x.numel());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const T v = x[i];
    if (v >= 0) {
      out[i] = T(1) / (T(1) + std::exp(-v));
    } else {
      const T e = std::exp(v);
      out[i] = e / (T(1) + e);
    }
  }
  return Tensor<T>::make_result(x.shape(), std::move(out), {x}, [](NodeT<T>& self) {
    if (auto* g = parent_grad(self, 0)) {
      for (std::size_t i = 0; i < self.data.size(); ++i) {
        const T y = self.data[i];
        (*g)[i] += self.grad[i] * y * (T(1) - y);
      }
    }
  });
}

template <typename T>
Tensor<T> softmax(const Tensor<T>& x, std::size_t axis) {
  if (axis >= x.rank()) {
    throw ShapeError("softmax: axis " + std::to_string(axis) + " invalid for shape " +
                     shape_to_string(x.shape()));
  }
  const auto& shape = x.shape();
  std::size_t outer = 1, inner = 1;
  for (std::size_t i = 0; i < axis; ++i) outer *= shape[i];
  for (std::size_t i = axis + 1; i < shape.size(); ++i) inner *= shape[i];
  const std::size_t len = shape[axis];
  std::vector<T> out(x.numel());
  for (std::size_t o = 0; o < outer; ++o) {
    for (std::size_t in = 0; in < inner; ++in) {
      const std::size_t base = o * len * inner + in;
      T mx = -std::numeric_limits<T>::infinity();
      for (std::size_t j = 0; j < len; ++j) mx = std::max(mx, x[base + j * inner]);
      T total = 0;
      for (std::size_t j = 0; j < len; ++j) {
        const T e = std::exp(x[base + j * inner] - mx);
        out[base + j * inner] = e;
        total += e;
      }
      for (std::size_t j = 0; j < len; ++j) out[base + j * inner] /= total;
    }
  }
  return Tensor<T>::make_result(
      shape, std::move(out), {x}, [outer, inner, len](NodeT<T>& self) {
        auto* g = parent_grad(self, 0);
        if (!g) return;
        for (std::size_t o = 0; o < outer; ++o) {
          for (std::size_t in = 0; in < inner; ++in) {
            const std::size_t base = o * len * inner + in;
            T dot = 0;
            for (std::size_t j = 0; j < len; ++j)
              dot += self.grad[base + j * inner] * self.data[base + j * inner];
            for (std::size_t j = 0; j < len; ++j) {
              const std::size_t idx = base + j * inner;
              (*g)[idx] += self.data[idx] * (self.grad[idx] - dot);
            }
          }
        }
      });
}

template <typename T>
Tensor<T> layer_norm(const Tensor<T>& x, const Tensor<T>& gamma, const Tensor<T>& beta, T eps) {
  const std::size_t d = last_dim(x, "layer_norm");
  if (d == 0) throw ShapeError("layer_norm: last axis is empty");
  if (gamma.shape() != Shape{d} || beta.shape() != Shape{d}) {
    throw ShapeError("layer_norm: gamma/beta " + shape_to_string(gamma.shape()) + "/" +
                     shape_to_string(beta.shape()) + " do not match input " +
                     shape_to_string(x.shape()));
  }
  const std::size_t rows = x.numel() / d;
  std::vector<T> out(x.numel());
  std::vector<T> rstd(rows);
  std::vector<T> xhat(x.numel());
  for (std::size_t r = 0; r < rows; ++r) {
    const T* row = x.data().data() + r * d;
    T mu = 0;
    for (std::size_t j = 0; j < d; ++j) mu += row[j];
    mu /= static_cast<T>(d);
    T var = 0;
    for (std::size_t j = 0; j < d; ++j) var += (row[j] - mu) * (row[j] - mu);
    var /= static_cast<T>(d);
    rstd[r] = T(1) / std::sqrt(var + eps);
    for (std::size_t j = 0; j < d; ++j) {
      const T h = (row[j] - mu) * rstd[r];
      xhat[r * d + j] = h;
      out[r * d + j] = h * gamma[j] + beta[j];
    }
  }
  return Tensor<T>::make_result(
      x.shape(), std::move(out), {x, gamma, beta},
      [rows, d, rstd = std::move(rstd), xhat = std::move(xhat)](NodeT<T>& self) {
        const auto& gam = self.parents[1]->data;
        auto* gx = parent_grad(self, 0);
        auto* gg = parent_grad(self, 1);
        auto* gb = parent_grad(self, 2);
        for (std::size_t r = 0; r < rows; ++r) {
          const T* dy = self.grad.data() + r * d;
          const T* h = xhat.data() + r * d;
          if (gg)
            for (std::size_t j = 0; j < d; ++j) (*gg)[j] += dy[j] * h[j];
          if (gb)
            for (std::size_t j = 0; j < d; ++j) (*gb)[j] += dy[j];
          if (gx) {
            T mean_dh = 0, mean_dh_h = 0;
            for (std::size_t j = 0; j < d; ++j) {
              const T dh = dy[j] * gam[j];
              mean_dh += dh;
              mean_dh_h += dh * h[j];
            }
            mean_dh /= static_cast<T>(d);
            mean_dh_h /= static_cast<T>(d);
            for (std::size_t j = 0; j < d; ++j) {
              const T dh = dy[j] * gam[j];
              (*gx)[r * d + j] += rstd[r] * (dh - mean_dh - h[j] * mean_dh_h);
            }
          }
        }
      });
}

template <typename T>
Tensor<T> dropout(const Tensor<T>& x, double rate, Mode mode, std::mt19937_64& rng) {
  if (!(rate >= 0.0 && rate < 1.0)) {
    throw ValidationError("rate", "dropout rate must be in [0, 1), got " + std::to_string(rate));
  }
  if (mode == Mode::kEval || rate == 0.0) return x;
  const T keep_scale = static_cast<T>(1.0 / (1.0 - rate));

  std::vector<T> mask(x.numel());
  std::vector<T> out(x.numel());
  for (std::size_t i = 0; i < out.size(); ++i) {
    mask[i] = util::uniform01(rng) < rate ? T(0) : keep_scale;
    out[i] = x[i] * mask[i];
  }
  return Tensor<T>::make_result(x.shape(), std::move(out), {x},
                                [mask = std::move(mask)](NodeT<T>& self) {
                                  if (auto* g = parent_grad(self, 0)) {
                                    for (std::size_t i = 0; i < mask.size(); ++i)
                                      (*g)[i] += self.grad[i] * mask[i];
                                  }
                                });
}

template <typename T>
Tensor<T> gather_rows(const Tensor<T>& table, std::span<const std::size_t> rows) {
  if (table.rank() != 2) {
    throw ShapeError("gather_rows: expected rank-2 table, got " + shape_to_string(table.shape()));
  }
  const std::size_t n_rows = table.shape()[0];
  const std::size_t cols = table.shape()[1];
  std::vector<std::size_t> idx(rows.begin(), rows.end());
  std::vector<T> out(idx.size() * cols);
  for (std::size_t r = 0; r < idx.size(); ++r) {
    if (idx[r] >= n_rows) {
      throw ShapeError("gather_rows: row " + std::to_string(idx[r]) + " out of range for " +
                       shape_to_string(table.shape()));
    }
    std::copy_n(table.data().data() + idx[r] * cols, cols, out.begin() + r * cols);
  }
  Shape shape{idx.size(), cols};
  return Tensor<T>::make_result(std::move(shape), std::move(out), {table},
                                [idx = std::move(idx), cols](NodeT<T>& self) {
                                  auto* g = parent_grad(self, 0);
                                  if (!g) return;
                                  for (std::size_t r = 0; r < idx.size(); ++r)
                                    for (std::size_t j = 0; j < cols; ++j)
                                      (*g)[idx[r] * cols + j] += self.grad[r * cols + j];
                                });
}

template <typename T>
Tensor<T> group_mean_rows(const Tensor<T>& x, std::span<const std::vector<std::size_t>> groups) {
  if (x.rank() != 2) {
    throw ShapeError("group_mean_rows: expected rank-2 input, got " + shape_to_string(x.shape()));
  }
  const std::size_t n_rows = x.shape()[0];
  const std::size_t cols = x.shape()[1];
  std::vector<std::vector<std::size_t>> members(groups.begin(), groups.end());
  std::vector<T> out(members.size() * cols, T(0));
  for (std::size_t gi = 0; gi < members.size(); ++gi) {
    if (members[gi].empty()) throw ShapeError("group_mean_rows: empty group");
    const T inv = T(1) / static_cast<T>(members[gi].size());
    for (auto r : members[gi]) {
      if (r >= n_rows) throw ShapeError("group_mean_rows: row index out of range");
      for (std::size_t j = 0; j < cols; ++j) out[gi * cols + j] += x[r * cols + j];
    }
    for (std::size_t j = 0; j < cols; ++j) out[gi * cols + j] *= inv;
  }
  Shape shape{members.size(), cols};
  return Tensor<T>::make_result(std::move(shape), std::move(out), {x},
                                [members = std::move(members), cols](NodeT<T>& self) {
                                  auto* g = parent_grad(self, 0);
                                  if (!g) return;
                                  for (std::size_t gi = 0; gi < members.size(); ++gi) {
                                    const T inv = T(1) / static_cast<T>(members[gi].size());
                                    for (auto r : members[gi])
                                      for (std::size_t j = 0; j < cols; ++j)
                                        (*g)[r * cols + j] += self.grad[gi * cols + j] * inv;
                                  }
                                });
}

template <typename T>
Tensor<T> attention(const Tensor<T>& q, const Tensor<T>& k, const Tensor<T>& v,
                    std::size_t n_heads, std::span<const std::uint8_t> key_mask) {
  if (q.rank() != 3 || k.rank() != 3 || v.rank() != 3 || k.shape() != v.shape() ||
      q.shape()[0] != k.shape()[0] || q.shape()[2] != k.shape()[2]) {
    throw ShapeError("attention: incompatible q/k/v shapes " + shape_to_string(q.shape()) + ", " +
                     shape_to_string(k.shape()) + ", " + shape_to_string(v.shape()));
  }
  const std::size_t n = q.shape()[0], lq = q.shape()[1], lk = k.shape()[1], d = q.shape()[2];
  if (n_heads == 0 || d % n_heads != 0) {
    throw ShapeError("attention: width " + std::to_string(d) + " not divisible by " +
                     std::to_string(n_heads) + " heads");
  }
  if (!key_mask.empty() && key_mask.size() != n * lk) {
    throw ShapeError("attention: key mask has " + std::to_string(key_mask.size()) +
                     " entries, expected " + std::to_string(n * lk));
  }
  std::vector<std::uint8_t> mask(key_mask.begin(), key_mask.end());
  const std::size_t dh = d / n_heads;
  const T scale_factor = T(1) / std::sqrt(static_cast<T>(dh));
  // probs[n][h][i][j]
  std::vector<T> probs(n * n_heads * lq * lk, T(0));
  std::vector<T> out(n * lq * d, T(0));
  const T* qd = q.data().data();
  const T* kd = k.data().data();
  const T* vd = v.data().data();
  for (std::size_t b = 0; b < n; ++b) {
    const std::uint8_t* mb = mask.empty() ? nullptr : mask.data() + b * lk;
    for (std::size_t h = 0; h < n_heads; ++h) {
      const std::size_t off = h * dh;
      for (std::size_t i = 0; i < lq; ++i) {
        T* p = probs.data() + ((b * n_heads + h) * lq + i) * lk;
        const T* qi = qd + (b * lq + i) * d + off;
        T mx = -std::numeric_limits<T>::infinity();
        bool any = false;
        for (std::size_t j = 0; j < lk; ++j) {
          if (mb && !mb[j]) continue;
          const T* kj = kd + (b * lk + j) * d + off;
          T s = 0;
          for (std::size_t c = 0; c < dh; ++c) s += qi[c] * kj[c];
          p[j] = s * scale_factor;
          mx = std::max(mx, p[j]);
          any = true;
        }
        if (!any) {
          throw UsageError("attention: query row has no unmasked key");
        }
        T total = 0;
        for (std::size_t j = 0; j < lk; ++j) {
          if (mb && !mb[j]) continue;
          p[j] = std::exp(p[j] - mx);
          total += p[j];
        }
        T* oi = out.data() + (b * lq + i) * d + off;
        for (std::size_t j = 0; j < lk; ++j) {
          if (mb && !mb[j]) continue;
          p[j] /= total;
          const T* vj = vd + (b * lk + j) * d + off;
          for (std::size_t c = 0; c < dh; ++c) oi[c] += p[j] * vj[c];
        }
      }
    }
  }
  return Tensor<T>::make_result(
      q.shape(), std::move(out), {q, k, v},
      [n, lq, lk, d, n_heads, dh, scale_factor, mask = std::move(mask),
       probs = std::move(probs)](NodeT<T>& self) {
        auto* gq = parent_grad(self, 0);
        auto* gk = parent_grad(self, 1);
        auto* gv = parent_grad(self, 2);
        const T* qd = self.parents[0]->data.data();
        const T* kd = self.parents[1]->data.data();
        const T* vd = self.parents[2]->data.data();
        std::vector<T> ds(lk);
        for (std::size_t b = 0; b < n; ++b) {
          const std::uint8_t* mb = mask.empty() ? nullptr : mask.data() + b * lk;
          for (std::size_t h = 0; h < n_heads; ++h) {
            const std::size_t off = h * dh;
            for (std::size_t i = 0; i < lq; ++i) {
              const T* p = probs.data() + ((b * n_heads + h) * lq + i) * lk;
              const T* dout = self.grad.data() + (b * lq + i) * d + off;
              T weighted = 0;
              for (std::size_t j = 0; j < lk; ++j) {
                ds[j] = 0;
                if (mb && !mb[j]) continue;
                const T* vj = vd + (b * lk + j) * d + off;
                T dp = 0;
                for (std::size_t c = 0; c < dh; ++c) dp += dout[c] * vj[c];
                ds[j] = dp;
                weighted += p[j] * dp;
                if (gv) {
                  T* gvj = gv->data() + (b * lk + j) * d + off;
                  for (std::size_t c = 0; c < dh; ++c) gvj[c] += p[j] * dout[c];
                }
              }
              const T* qi = qd + (b * lq + i) * d + off;
              for (std::size_t j = 0; j < lk; ++j) {
                if (mb && !mb[j]) continue;
                const T s = p[j] * (ds[j] - weighted) * scale_factor;
                const T* kj = kd + (b * lk + j) * d + off;
                if (gq) {
                  T* gqi = gq->data() + (b * lq + i) * d + off;
                  for (std::size_t c = 0; c < dh; ++c) gqi[c] += s * kj[c];
                }
                if (gk) {
                  T* gkj = gk->data() + (b * lk + j) * d + off;
                  for (std::size_t c = 0; c < dh; ++c) gkj[c] += s * qi[c];
                }
              }
            }
          }
        }
      });
}

template <typename T>
Tensor<T> binary_cross_entropy(const Tensor<T>& p, T target, T eps) {
  if (p.numel() != 1) {
    throw ShapeError("binary_cross_entropy: expected scalar probability, got " +
                     shape_to_string(p.shape()));
  }
  const T pc = std::clamp(p[0], eps, T(1) - eps);
  const T loss = -(target * std::log(pc) + (T(1) - target) * std::log(T(1) - pc));
  return Tensor<T>::make_result({}, {loss}, {p}, [pc, target](NodeT<T>& self) {
    if (auto* g = parent_grad(self, 0)) (*g)[0] += self.grad[0] * (pc - target) / (pc * (T(1) - pc));
  });
}

template <typename T>
Tensor<T> mean_binary_cross_entropy(const Tensor<T>& p, std::span<const T> targets, T eps) {
  if (p.shape().size() != 1 || p.numel() != targets.size() || targets.empty()) {
    throw ShapeError("mean_binary_cross_entropy: probabilities " + shape_to_string(p.shape()) +
                     " vs " + std::to_string(targets.size()) + " targets");
  }
  const std::size_t n = targets.size();
  std::vector<T> clamped(n), y(targets.begin(), targets.end());
  T total = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const T pc = clamped[i] = std::clamp(p[i], eps, T(1) - eps);
    total += -(y[i] * std::log(pc) + (T(1) - y[i]) * std::log(T(1) - pc));
  }
  return Tensor<T>::make_result(
      {}, {total / T(n)}, {p},
      [clamped = std::move(clamped), y = std::move(y)](NodeT<T>& self) {
        if (auto* g = parent_grad(self, 0)) {
          const T scale = self.grad[0] / T(clamped.size());
          for (std::size_t i = 0; i < clamped.size(); ++i) {
            (*g)[i] += scale * (clamped[i] - y[i]) / (clamped[i] * (T(1) - clamped[i]));
          }
        }
      });
}

template <typename T>
bool all_finite(const Tensor<T>& x) {
  return std::all_of(x.data().begin(), x.data().end(), [](T v) { return std::isfinite(v); });
}

#define EXNET_INSTANTIATE_OPS(T)                                                              \
  template Tensor<T> add(const Tensor<T>&, const Tensor<T>&);                                 \
  template Tensor<T> mul(const Tensor<T>&, const Tensor<T>&);                                 \
  template Tensor<T> scale(const Tensor<T>&, T);                                              \
  template Tensor<T> add_n(std::span<const Tensor<T>>);                                       \
  template Tensor<T> sum(const Tensor<T>&);                                                   \
  template Tensor<T> mean(const Tensor<T>&);                                                  \
  template Tensor<T> reshape(const Tensor<T>&, Shape);                                        \
  template Tensor<T> matmul(const Tensor<T>&, const Tensor<T>&);                              \
  template Tensor<T> linear(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&);            \
  template Tensor<T> gelu(const Tensor<T>&);                                                  \
  template Tensor<T> sigmoid(const Tensor<T>&);                                               \
  template Tensor<T> softmax(const Tensor<T>&, std::size_t);                                  \
  template Tensor<T> layer_norm(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&, T);     \
  template Tensor<T> dropout(const Tensor<T>&, double, Mode, std::mt19937_64&);               \
  template Tensor<T> gather_rows(const Tensor<T>&, std::span<const std::size_t>);             \
  template Tensor<T> group_mean_rows(const Tensor<T>&, std::span<const std::vector<std::size_t>>); \
  template Tensor<T> attention(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&,          \
                               std::size_t, std::span<const std::uint8_t>);                   \
  template Tensor<T> binary_cross_entropy(const Tensor<T>&, T, T);                            \
  template Tensor<T> mean_binary_cross_entropy(const Tensor<T>&, std::span<const T>, T);        \
  template bool all_finite(const Tensor<T>&);

EXNET_INSTANTIATE_OPS(float)
EXNET_INSTANTIATE_OPS(double)

#undef EXNET_INSTANTIATE_OPS

}  // namespace exnet::numerics
