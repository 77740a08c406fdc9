#pragma once

#include <cstddef>
#include <vector>

// Dense row-major kernels. Accumulation over the shared dimension always runs
// in ascending index order, so results do not depend on how many trailing
// zero terms a reduction carries (padding) and are reproducible run to run.
namespace m2oie::kernels {

// c[m x n] += a[m x k] * b[k x n]
template <class T>
inline void gemm_nn(const T* a, const T* b, T* c, std::size_t m, std::size_t k,
                    std::size_t n) {
  for (std::size_t i = 0; i < m; ++i) {
    T* ci = c + i * n;
    const T* ai = a + i * k;
    for (std::size_t p = 0; p < k; ++p) {
      const T av = ai[p];
      const T* bp = b + p * n;
      for (std::size_t j = 0; j < n; ++j) ci[j] += av * bp[j];
    }
  }
}

// c[k x n] += a[m x k]^T * b[m x n]
template <class T>
inline void gemm_tn(const T* a, const T* b, T* c, std::size_t m, std::size_t k,
                    std::size_t n) {
  for (std::size_t p = 0; p < m; ++p) {
    const T* ap = a + p * k;
    const T* bp = b + p * n;
    for (std::size_t i = 0; i < k; ++i) {
      const T av = ap[i];
      T* ci = c + i * n;
      for (std::size_t j = 0; j < n; ++j) ci[j] += av * bp[j];
    }
  }
}

template <class T>
inline std::vector<T> transpose(const T* a, std::size_t rows, std::size_t cols) {
  std::vector<T> out(rows * cols);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) out[c * rows + r] = a[r * cols + c];
  return out;
}

}  // namespace m2oie::kernels
