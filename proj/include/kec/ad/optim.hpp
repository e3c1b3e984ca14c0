// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The KEC Authors

#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "kec/ad/tape.hpp"

namespace kec::ad {

struct AdamWConfig {
  double lr = 3e-5;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 1e-4;  // decoupled
};

struct OptimizerState {
  std::uint64_t step = 0;
  std::vector<std::vector<double>> m;  // first moments, one buffer per parameter
  std::vector<std::vector<double>> v;  // second moments
};

// Decoupled weight decay followed by the bias-corrected Adam update:
//   p <- p - lr * wd * p
//   p <- p - lr * m_hat / (sqrt(v_hat) + eps)
// Parameters without a gradient buffer are treated as having a zero gradient.
class AdamW {
 public:
  AdamW(const ParamStore& store, AdamWConfig config);

  void step(ParamStore& store, const GradientSet& grads);

  const AdamWConfig& config() const { return config_; }
  AdamWConfig& config() { return config_; }
  const OptimizerState& state() const { return state_; }
  // Replaces the moments (checkpoint restore); shapes must match the store.
  void restore(const ParamStore& store, OptimizerState state);

 private:
  AdamWConfig config_;
  OptimizerState state_;
};

// Uniform in [-a, a] with a = sqrt(6 / (fan_in + fan_out)), fan_in = rows.
void xavier_uniform(Parameter& p, std::mt19937_64& rng);
void uniform_fill(Parameter& p, double bound, std::mt19937_64& rng);

}  // namespace kec::ad
