// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The KEC Authors

#include <atomic>
#include <cstdlib>
#include <string_view>

#include "kec/simd/kernels.hpp"

namespace kec::simd {

#ifndef KEC_HAVE_AVX2
const KernelTable* avx2_kernels() { return nullptr; }
#endif

bool cpu_has_avx2() {
#if defined(__x86_64__) || defined(__i386__)
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

namespace {

const KernelTable* pick_default() {
  if (const char* env = std::getenv("KEC_SIMD"); env && std::string_view(env) == "scalar")
    return &scalar_kernels();
  if (avx2_kernels() && cpu_has_avx2()) return avx2_kernels();
  return &scalar_kernels();
}

std::atomic<const KernelTable*>& active() {
  static std::atomic<const KernelTable*> table{pick_default()};
  return table;
}

}  // namespace

const KernelTable& kernels() { return *active().load(std::memory_order_relaxed); }

bool set_backend(Backend backend) {
  if (backend == Backend::Scalar) {
    active().store(&scalar_kernels());
    return true;
  }
  if (!avx2_kernels() || !cpu_has_avx2()) return false;
  active().store(avx2_kernels());
  return true;
}

Backend active_backend() {
  return active().load() == &scalar_kernels() ? Backend::Scalar : Backend::Avx2;
}

std::string_view backend_name(Backend backend) {
  return backend == Backend::Scalar ? "scalar" : "avx2";
}

}  // namespace kec::simd
