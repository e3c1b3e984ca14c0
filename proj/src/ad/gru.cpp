// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The KEC Authors

#include "kec/ad/gru.hpp"

#include "kec/ad/ops.hpp"
#include "kec/error.hpp"

namespace kec::ad {

GruParams add_gru_params(ParamStore& store, const std::string& prefix, std::size_t input_dim, std::size_t hidden_dim) {
  GruParams p;
  p.w_ih = &store.add(prefix + ".w_ih", {input_dim, 3 * hidden_dim});
  p.w_hh = &store.add(prefix + ".w_hh", {hidden_dim, 3 * hidden_dim});
  p.b_ih = &store.add(prefix + ".b_ih", {1, 3 * hidden_dim});
  p.b_hh = &store.add(prefix + ".b_hh", {1, 3 * hidden_dim});
  return p;
}

Tensor gru_cell(Tensor x, Tensor h, const GruParams& params) {
  const std::size_t d = params.hidden_dim();
  if (x.cols() != params.input_dim() || h.cols() != d || x.rows() != h.rows())
    throw ShapeError("gru_cell: input " + x.shape().str() + " / hidden " + h.shape().str() +
                     " do not match parameters (in=" + std::to_string(params.input_dim()) +
                     ", hidden=" + std::to_string(d) + ")");
  Tape& tape = x.tape();
  const Tensor gi = add_bias(matmul(x, tape.param(*params.w_ih)), tape.param(*params.b_ih));
  const Tensor gh = add_bias(matmul(h, tape.param(*params.w_hh)), tape.param(*params.b_hh));
  const Tensor r = sigmoid(add(slice_cols(gi, 0, d), slice_cols(gh, 0, d)));
  const Tensor z = sigmoid(add(slice_cols(gi, d, d), slice_cols(gh, d, d)));
  const Tensor n = tanh(add(slice_cols(gi, 2 * d, d), mul(r, slice_cols(gh, 2 * d, d))));
  return add(mul(z, n), mul(one_minus(z), h));
}

}  // namespace kec::ad
