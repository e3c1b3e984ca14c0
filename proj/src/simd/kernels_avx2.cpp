// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The KEC Authors

// Compiled with -mavx2 -mfma; only reached after a runtime CPU check.

#include <immintrin.h>

#include "kec/simd/kernels.hpp"

namespace kec::simd {
namespace {

inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  __m128d sh = _mm_unpackhi_pd(lo, lo);
  return _mm_cvtsd_f64(_mm_add_sd(lo, sh));
}

// One output row: crow[0..n) += sum_p arow[p * astride] * B[p, :].
inline void row_update(std::size_t n, std::size_t k, const double* arow, std::size_t astride,
                       const double* b, double* crow) {
  std::size_t j = 0;
  for (; j + 16 <= n; j += 16) {
    __m256d c0 = _mm256_loadu_pd(crow + j);
    __m256d c1 = _mm256_loadu_pd(crow + j + 4);
    __m256d c2 = _mm256_loadu_pd(crow + j + 8);
    __m256d c3 = _mm256_loadu_pd(crow + j + 12);
    for (std::size_t p = 0; p < k; ++p) {
      const __m256d av = _mm256_set1_pd(arow[p * astride]);
      const double* brow = b + p * n + j;
      c0 = _mm256_fmadd_pd(av, _mm256_loadu_pd(brow), c0);
      c1 = _mm256_fmadd_pd(av, _mm256_loadu_pd(brow + 4), c1);
      c2 = _mm256_fmadd_pd(av, _mm256_loadu_pd(brow + 8), c2);
      c3 = _mm256_fmadd_pd(av, _mm256_loadu_pd(brow + 12), c3);
    }
    _mm256_storeu_pd(crow + j, c0);
    _mm256_storeu_pd(crow + j + 4, c1);
    _mm256_storeu_pd(crow + j + 8, c2);
    _mm256_storeu_pd(crow + j + 12, c3);
  }
  for (; j + 4 <= n; j += 4) {
    __m256d c0 = _mm256_loadu_pd(crow + j);
    for (std::size_t p = 0; p < k; ++p)
      c0 = _mm256_fmadd_pd(_mm256_set1_pd(arow[p * astride]), _mm256_loadu_pd(b + p * n + j), c0);
    _mm256_storeu_pd(crow + j, c0);
  }
  for (; j < n; ++j) {
    double s = crow[j];
    for (std::size_t p = 0; p < k; ++p) s += arow[p * astride] * b[p * n + j];
    crow[j] = s;
  }
}

void gemm_nn(std::size_t m, std::size_t n, std::size_t k, const double* a,
             const double* b, double* c) {
  for (std::size_t i = 0; i < m; ++i) row_update(n, k, a + i * k, 1, b, c + i * n);
}

void gemm_tn(std::size_t m, std::size_t n, std::size_t k, const double* a,
             const double* b, double* c) {
  for (std::size_t i = 0; i < m; ++i) row_update(n, k, a + i, m, b, c + i * n);
}

double dot(std::size_t n, const double* x, const double* y) {
  __m256d s0 = _mm256_setzero_pd();
  __m256d s1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    s0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), s0);
    s1 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i + 4), _mm256_loadu_pd(y + i + 4), s1);
  }
  for (; i + 4 <= n; i += 4)
    s0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), s0);
  double s = hsum(_mm256_add_pd(s0, s1));
  for (; i < n; ++i) s += x[i] * y[i];
  return s;
}

void gemm_nt(std::size_t m, std::size_t n, std::size_t k, const double* a,
             const double* b, double* c) {
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) c[i * n + j] += dot(k, a + i * k, b + j * k);
}

void axpy(std::size_t n, double alpha, const double* x, double* y) {
  const __m256d av = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(y + i, _mm256_fmadd_pd(av, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
  for (; i < n; ++i) y[i] += alpha * x[i];
}

}  // namespace

const KernelTable* avx2_kernels() {
  static const KernelTable table{"avx2", gemm_nn, gemm_tn, gemm_nt, dot, axpy};
  return &table;
}

}  // namespace kec::simd
