/*
 * Row-major double GEMM with an optional CBLAS backend. The fallback is a
 * plain triple loop so the library builds without BLAS; both paths produce
 * identical results for the single-threaded configuration used here.
 *
 * Licensed under the terms of the Apache 2.0 License.
 * See LICENSE file in the project root for terms.
 */
#pragma once

#include <cstddef>

#ifdef GANBENCH_USE_CBLAS
#include <cblas.h>
#endif

namespace ganbench {

#ifdef GANBENCH_USE_CBLAS
namespace detail {
inline bool pin_blas_threads() {
  openblas_set_num_threads(1);
  return true;
}
}  // namespace detail
#endif

/// C = alpha * op(A) * op(B) + beta * C, row-major. op(A) is M x K,
/// op(B) is K x N, C is M x N; leading dimensions follow the stored
/// (untransposed) layouts.
inline void gemm(bool trans_a, bool trans_b, std::size_t m, std::size_t n,
                 std::size_t k, double alpha, const double* a, std::size_t lda,
                 const double* b, std::size_t ldb, double beta, double* c,
                 std::size_t ldc) {
#ifdef GANBENCH_USE_CBLAS
  static const bool pinned = detail::pin_blas_threads();
  (void)pinned;
  cblas_dgemm(CblasRowMajor, trans_a ? CblasTrans : CblasNoTrans,
              trans_b ? CblasTrans : CblasNoTrans, static_cast<int>(m),
              static_cast<int>(n), static_cast<int>(k), alpha, a,
              static_cast<int>(lda), b, static_cast<int>(ldb), beta, c,
              static_cast<int>(ldc));
#else
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      double acc = 0.0;
      for (std::size_t p = 0; p < k; ++p) {
        const double av = trans_a ? a[p * lda + i] : a[i * lda + p];
        const double bv = trans_b ? b[j * ldb + p] : b[p * ldb + j];
        acc += av * bv;
      }
      c[i * ldc + j] = alpha * acc + beta * c[i * ldc + j];
    }
#endif
}

}  // namespace ganbench
