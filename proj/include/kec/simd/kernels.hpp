// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The KEC Authors

#pragma once

#include <cstddef>
#include <string_view>

namespace kec::simd {

// Row-major dense kernels used by the tensor engine. Every kernel accumulates
// into C (C += ...); callers zero C first when they want plain assignment.
//
//   gemm_nn: C[m,n] += A[m,k] * B[k,n]
//   gemm_tn: C[m,n] += A[k,m]^T * B[k,n]
//   gemm_nt: C[m,n] += A[m,k] * B[n,k]^T
//
// Output rows are computed independently of each other in every variant, so a
// row's value never depends on the contents of other rows of A.
struct KernelTable {
  const char* name;
  void (*gemm_nn)(std::size_t m, std::size_t n, std::size_t k, const double* a,
                  const double* b, double* c);
  void (*gemm_tn)(std::size_t m, std::size_t n, std::size_t k, const double* a,
                  const double* b, double* c);
  void (*gemm_nt)(std::size_t m, std::size_t n, std::size_t k, const double* a,
                  const double* b, double* c);
  double (*dot)(std::size_t n, const double* x, const double* y);
  void (*axpy)(std::size_t n, double alpha, const double* x, double* y);
};

enum class Backend { Scalar, Avx2 };

const KernelTable& scalar_kernels();
// Null when the AVX2 variant was not compiled in.
const KernelTable* avx2_kernels();

bool cpu_has_avx2();

// Active table. Chosen once on first use: AVX2+FMA when compiled in and
// supported by the CPU, unless KEC_SIMD=scalar is set in the environment.
const KernelTable& kernels();

// Forces a backend; returns false (and changes nothing) when unavailable.
bool set_backend(Backend backend);
Backend active_backend();
std::string_view backend_name(Backend backend);

}  // namespace kec::simd
