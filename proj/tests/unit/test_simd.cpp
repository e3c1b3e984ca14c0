// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The KEC Authors

#include <doctest.h>

#include <cmath>
#include <random>

#include "kec/simd/kernels.hpp"

using namespace kec::simd;

namespace {

std::vector<double> rand_vec(std::mt19937_64& rng, std::size_t n) {
  std::uniform_real_distribution<double> u(-1, 1);
  std::vector<double> v(n);
  for (double& x : v) x = u(rng);
  return v;
}

void close(const std::vector<double>& a, const std::vector<double>& b) {
  REQUIRE(a.size() == b.size());
  for (std::size_t k = 0; k < a.size(); ++k) CHECK(std::abs(a[k] - b[k]) <= 1e-12 * (1 + std::abs(a[k])));
}

}  // namespace

TEST_CASE("AVX2 kernels agree with the scalar kernels") {
  const KernelTable* avx = avx2_kernels();
  if (!avx || !cpu_has_avx2()) {
    MESSAGE("AVX2 variant unavailable on this machine; equivalence not exercised");
    return;
  }
  const KernelTable& sc = scalar_kernels();
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t m = 1 + rng() % 9, n = 1 + rng() % 19, k = 1 + rng() % 23;
    const auto a = rand_vec(rng, m * k);
    const auto b = rand_vec(rng, k * n);
    const auto init = rand_vec(rng, m * n);
    auto c1 = init, c2 = init;
    sc.gemm_nn(m, n, k, a.data(), b.data(), c1.data());
    avx->gemm_nn(m, n, k, a.data(), b.data(), c2.data());
    close(c1, c2);

    const auto at = rand_vec(rng, k * m);
    c1 = init;
    c2 = init;
    sc.gemm_tn(m, n, k, at.data(), b.data(), c1.data());
    avx->gemm_tn(m, n, k, at.data(), b.data(), c2.data());
    close(c1, c2);

    const auto bt = rand_vec(rng, n * k);
    c1 = init;
    c2 = init;
    sc.gemm_nt(m, n, k, a.data(), bt.data(), c1.data());
    avx->gemm_nt(m, n, k, a.data(), bt.data(), c2.data());
    close(c1, c2);

    CHECK(std::abs(sc.dot(k, a.data(), b.data()) - avx->dot(k, a.data(), b.data())) <= 1e-12 * k);
    auto y1 = rand_vec(rng, k), y2 = y1;
    sc.axpy(k, 0.37, a.data(), y1.data());
    avx->axpy(k, 0.37, a.data(), y2.data());
    close(y1, y2);
  }
}

TEST_CASE("backend selection") {
  const Backend before = active_backend();
  CHECK(set_backend(Backend::Scalar));
  CHECK(active_backend() == Backend::Scalar);
  CHECK(std::string(kernels().name) == std::string(backend_name(Backend::Scalar)));
  set_backend(before);
  CHECK(active_backend() == before);
}
