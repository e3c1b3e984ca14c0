// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The KEC Authors

#pragma once

#include <string>

#include "kec/ad/tape.hpp"

namespace kec::ad {

// Gate blocks are laid out [reset | update | candidate] along the columns of
// w_ih [in, 3d], w_hh [d, 3d], b_ih [1, 3d] and b_hh [1, 3d]:
//
//   r  = sigmoid(x W_ir + b_ir + h W_hr + b_hr)
//   z  = sigmoid(x W_iz + b_iz + h W_hz + b_hz)
//   n  = tanh(x W_in + b_in + r * (h W_hn + b_hn))
//   h' = z * n + (1 - z) * h
//
// so a saturated-closed update gate (z -> 0) passes h through unchanged.
struct GruParams {
  const Parameter* w_ih = nullptr;
  const Parameter* w_hh = nullptr;
  const Parameter* b_ih = nullptr;
  const Parameter* b_hh = nullptr;

  std::size_t input_dim() const { return w_ih->shape().rows; }
  std::size_t hidden_dim() const { return w_hh->shape().rows; }
};

GruParams add_gru_params(ParamStore& store, const std::string& prefix, std::size_t input_dim, std::size_t hidden_dim);

// x: [m, in], h: [m, d] -> [m, d].
Tensor gru_cell(Tensor x, Tensor h, const GruParams& params);

}  // namespace kec::ad
