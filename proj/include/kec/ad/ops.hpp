// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The KEC Authors

#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "kec/ad/tape.hpp"

namespace kec::ad {

// Primitive operations. Every op checks shapes (ShapeError names both
// operands' shapes) and records a gradient rule on the operands' tape.

Tensor matmul(Tensor a, Tensor b);          // [m,k] x [k,n]
Tensor add(Tensor a, Tensor b);             // same shape
Tensor add_bias(Tensor a, Tensor bias);     // [m,n] + [1,n] broadcast over rows
Tensor sub(Tensor a, Tensor b);
Tensor mul(Tensor a, Tensor b);             // element-wise
Tensor scale(Tensor a, double factor);
Tensor one_minus(Tensor a);                 // 1 - a
Tensor sigmoid(Tensor a);
Tensor tanh(Tensor a);
Tensor relu(Tensor a);
Tensor sum(Tensor a);                       // -> [1,1]
Tensor transpose(Tensor a);

Tensor concat_cols(std::span<const Tensor> parts);  // along the last dim
Tensor stack_rows(std::span<const Tensor> rows);    // each part [r_k, n] -> [sum r_k, n]
Tensor slice_cols(Tensor a, std::size_t begin, std::size_t count);
Tensor row(Tensor a, std::size_t r);
Tensor gather_rows(Tensor a, std::span<const std::size_t> indices);
Tensor repeat_rows(Tensor a, std::size_t times);    // [1,n] -> [times,n]

// Column-wise max over rows: [m,n] -> [1,n]. Ties go to the first row.
Tensor maxpool_rows(Tensor a);

// Inverted dropout with a counter-based generator keyed by `stream`; the
// identity when `train` is false or p == 0.
Tensor dropout(Tensor a, double p, bool train, std::uint64_t stream);

// Softmax over the first `active` entries of a row or column vector; the
// remaining entries are exactly 0, and active == 0 yields all zeros.
Tensor masked_softmax(Tensor scores, std::size_t active);

// Binary cross entropy summed over entries: -sum y log p + (1-y) log(1-p),
// with p clipped to [1e-7, 1 - 1e-7] (zero gradient where clipped).
Tensor bce_sum(Tensor probs, std::span<const double> labels);

inline constexpr double kProbClip = 1e-7;

}  // namespace kec::ad
