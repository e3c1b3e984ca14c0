// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The KEC Authors

#pragma once

#include <cstdint>
#include <functional>
#include <string>

#include "kec/ad/tape.hpp"

namespace kec::ad {

struct GradCheckOptions {
  double eps = 1e-4;
  // Parameters larger than this are checked on a seeded random subset of
  // this many entries; smaller ones are checked exhaustively.
  std::size_t max_entries_per_param = 48;
  std::uint64_t seed = 0;
  // Denominator floor of the relative error |a - n| / max(|a|, |n|, floor).
  double floor = 1e-6;
};

struct GradCheckResult {
  double max_rel_error = 0.0;
  double max_abs_error = 0.0;
  std::string worst_param;
  std::size_t worst_index = 0;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
  std::size_t checked = 0;
};

// `loss` builds a scalar on the given tape from the store's parameters. It
// must be deterministic (no dropout). Analytic gradients come from one
// recorded pass; numeric ones from central differences on non-recording tapes.
GradCheckResult grad_check(ParamStore& store, const std::function<Tensor(Tape&)>& loss,
                           const GradCheckOptions& options = {});

}  // namespace kec::ad
