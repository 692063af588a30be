#pragma once

// Dense row-major kernels shared by the differentiable ops. Every output
// element accumulates its reduction in ascending index order, so a row's
// result does not depend on how many other rows are computed alongside it.

#include <algorithm>
#include <cstddef>
#include <vector>

namespace exnet::numerics::kernels {

// Rows [0, R) of c[.,n] += a[., k] * b[k, n], with a's row stride lda. Column
// tiles of NB are accumulated in registers.
template <typename T, std::size_t R>
inline void gemm_rows(const T* __restrict a, std::size_t lda, const T* __restrict b,
                      T* __restrict c, std::size_t k, std::size_t n) {
  constexpr std::size_t NB = 128 / sizeof(T);
  std::size_t j0 = 0;
  for (; j0 + NB <= n; j0 += NB) {
    T acc[R][NB];
    for (std::size_t r = 0; r < R; ++r)
      for (std::size_t j = 0; j < NB; ++j) acc[r][j] = c[r * n + j0 + j];
    for (std::size_t p = 0; p < k; ++p) {
      const T* __restrict bp = b + p * n + j0;
      for (std::size_t r = 0; r < R; ++r) {
        const T v = a[r * lda + p];
        for (std::size_t j = 0; j < NB; ++j) acc[r][j] += v * bp[j];
      }
    }
    for (std::size_t r = 0; r < R; ++r)
      for (std::size_t j = 0; j < NB; ++j) c[r * n + j0 + j] = acc[r][j];
  }
  if (j0 < n) {
    const std::size_t nb = n - j0;
    for (std::size_t r = 0; r < R; ++r) {
      T* __restrict cr = c + r * n + j0;
      for (std::size_t p = 0; p < k; ++p) {
        const T v = a[r * lda + p];
        const T* __restrict bp = b + p * n + j0;
        for (std::size_t j = 0; j < nb; ++j) cr[j] += v * bp[j];
      }
    }
  }
}

// c[m,n] (+)= a[m,k] * b[k,n]
template <typename T>
void gemm_nn(const T* __restrict a, const T* __restrict b, T* __restrict c, std::size_t m,
             std::size_t k, std::size_t n, bool accumulate) {
  if (!accumulate) std::fill(c, c + m * n, T(0));
  std::size_t i = 0;
  for (; i + 4 <= m; i += 4) gemm_rows<T, 4>(a + i * k, k, b, c + i * n, k, n);
  for (; i < m; ++i) gemm_rows<T, 1>(a + i * k, k, b, c + i * n, k, n);
}

// c[k,n] += a[m,k]^T * b[m,n]
template <typename T>
void gemm_tn_acc(const T* __restrict a, const T* __restrict b, T* __restrict c, std::size_t m,
                 std::size_t k, std::size_t n) {
  // Row p of c reduces over i in ascending order: a column of a against b.
  std::vector<T> at(k * m);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t p = 0; p < k; ++p) at[p * m + i] = a[i * k + p];
  std::size_t p = 0;
  for (; p + 4 <= k; p += 4) gemm_rows<T, 4>(at.data() + p * m, m, b, c + p * n, m, n);
  for (; p < k; ++p) gemm_rows<T, 1>(at.data() + p * m, m, b, c + p * n, m, n);
}

// c[m,n] += a[m,k] * b[n,k]^T
template <typename T>
void gemm_nt_acc(const T* a, const T* b, T* c, std::size_t m, std::size_t k, std::size_t n) {
  std::vector<T> bt(k * n);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t p = 0; p < k; ++p) bt[p * n + r] = b[r * k + p];
  gemm_nn(a, bt.data(), c, m, k, n, true);
}

}  // namespace exnet::numerics::kernels
