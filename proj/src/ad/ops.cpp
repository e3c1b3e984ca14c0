// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The KEC Authors

#include "kec/ad/ops.hpp"

#include <algorithm>
#include <cmath>

#include "kec/error.hpp"
#include "kec/simd/kernels.hpp"
#include "kec/util.hpp"

namespace kec::ad {
namespace {

[[noreturn]] void shape_fail(const char* op, Shape a, Shape b) {
  throw ShapeError(std::string(op) + ": incompatible shapes " + a.str() + " and " + b.str());
}

void same_tape(Tensor a, Tensor b) {
  if (&a.tape() != &b.tape()) throw ShapeError("operands live on different tapes");
}

std::vector<double> copy_value(Tensor t) {
  auto v = t.value();
  return {v.begin(), v.end()};
}

// Unary element-wise op whose derivative is expressed through the output y.
template <typename Fwd, typename DyDx>
Tensor unary_from_output(Tensor a, Fwd fwd, DyDx dydx) {
  std::vector<double> out = copy_value(a);
  for (double& v : out) v = fwd(v);
  const std::uint32_t ia = a.id();
  return a.tape().push(a.shape(), std::move(out), {a}, [ia, dydx](Tape& t, std::uint32_t self) {
    if (!t.requires_grad(ia)) return;
    auto g = t.grad(self);
    auto y = t.value(self);
    auto ga = t.grad_mut(ia);
    for (std::size_t k = 0; k < g.size(); ++k) ga[k] += g[k] * dydx(y[k]);
  });
}

}  // namespace

Tensor matmul(Tensor a, Tensor b) {
  same_tape(a, b);
  const Shape sa = a.shape(), sb = b.shape();
  if (sa.cols != sb.rows) shape_fail("matmul", sa, sb);
  const std::size_t m = sa.rows, k = sa.cols, n = sb.cols;
  std::vector<double> out(m * n, 0.0);
  simd::kernels().gemm_nn(m, n, k, a.value().data(), b.value().data(), out.data());
  const std::uint32_t ia = a.id(), ib = b.id();
  return a.tape().push({m, n}, std::move(out), {a, b}, [ia, ib, m, n, k](Tape& t, std::uint32_t self) {
    const double* g = t.grad(self).data();
    if (t.requires_grad(ia)) simd::kernels().gemm_nt(m, k, n, g, t.value(ib).data(), t.grad_mut(ia).data());
    if (t.requires_grad(ib)) simd::kernels().gemm_tn(k, n, m, t.value(ia).data(), g, t.grad_mut(ib).data());
  });
}

Tensor add(Tensor a, Tensor b) {
  same_tape(a, b);
  if (a.shape() != b.shape()) shape_fail("add", a.shape(), b.shape());
  std::vector<double> out = copy_value(a);
  auto vb = b.value();
  for (std::size_t k = 0; k < out.size(); ++k) out[k] += vb[k];
  const std::uint32_t ia = a.id(), ib = b.id();
  return a.tape().push(a.shape(), std::move(out), {a, b}, [ia, ib](Tape& t, std::uint32_t self) {
    auto g = t.grad(self);
    for (std::uint32_t id : {ia, ib}) {
      if (!t.requires_grad(id)) continue;
      auto gi = t.grad_mut(id);
      for (std::size_t k = 0; k < g.size(); ++k) gi[k] += g[k];
    }
  });
}

Tensor add_bias(Tensor a, Tensor bias) {
  same_tape(a, bias);
  const Shape sa = a.shape(), sb = bias.shape();
  if (sb.rows != 1 || sb.cols != sa.cols) shape_fail("add_bias", sa, sb);
  std::vector<double> out = copy_value(a);
  auto vb = bias.value();
  for (std::size_t r = 0; r < sa.rows; ++r)
    for (std::size_t c = 0; c < sa.cols; ++c) out[r * sa.cols + c] += vb[c];
  const std::uint32_t ia = a.id(), ib = bias.id();
  return a.tape().push(sa, std::move(out), {a, bias}, [ia, ib, sa](Tape& t, std::uint32_t self) {
    auto g = t.grad(self);
    if (t.requires_grad(ia)) {
      auto ga = t.grad_mut(ia);
      for (std::size_t k = 0; k < g.size(); ++k) ga[k] += g[k];
    }
    if (t.requires_grad(ib)) {
      auto gb = t.grad_mut(ib);
      for (std::size_t r = 0; r < sa.rows; ++r)
        for (std::size_t c = 0; c < sa.cols; ++c) gb[c] += g[r * sa.cols + c];
    }
  });
}

Tensor sub(Tensor a, Tensor b) {
  same_tape(a, b);
  if (a.shape() != b.shape()) shape_fail("sub", a.shape(), b.shape());
  std::vector<double> out = copy_value(a);
  auto vb = b.value();
  for (std::size_t k = 0; k < out.size(); ++k) out[k] -= vb[k];
  const std::uint32_t ia = a.id(), ib = b.id();
  return a.tape().push(a.shape(), std::move(out), {a, b}, [ia, ib](Tape& t, std::uint32_t self) {
    auto g = t.grad(self);
    if (t.requires_grad(ia)) {
      auto ga = t.grad_mut(ia);
      for (std::size_t k = 0; k < g.size(); ++k) ga[k] += g[k];
    }
    if (t.requires_grad(ib)) {
      auto gb = t.grad_mut(ib);
      for (std::size_t k = 0; k < g.size(); ++k) gb[k] -= g[k];
    }
  });
}

Tensor mul(Tensor a, Tensor b) {
  same_tape(a, b);
  if (a.shape() != b.shape()) shape_fail("mul", a.shape(), b.shape());
  std::vector<double> out = copy_value(a);
  auto vb = b.value();
  for (std::size_t k = 0; k < out.size(); ++k) out[k] *= vb[k];
  const std::uint32_t ia = a.id(), ib = b.id();
  return a.tape().push(a.shape(), std::move(out), {a, b}, [ia, ib](Tape& t, std::uint32_t self) {
    auto g = t.grad(self);
    if (t.requires_grad(ia)) {
      auto ga = t.grad_mut(ia);
      auto vb = t.value(ib);
      for (std::size_t k = 0; k < g.size(); ++k) ga[k] += g[k] * vb[k];
    }
    if (t.requires_grad(ib)) {
      auto gb = t.grad_mut(ib);
      auto va = t.value(ia);
      for (std::size_t k = 0; k < g.size(); ++k) gb[k] += g[k] * va[k];
    }
  });
}

Tensor scale(Tensor a, double factor) {
  std::vector<double> out = copy_value(a);
  for (double& v : out) v *= factor;
  const std::uint32_t ia = a.id();
  return a.tape().push(a.shape(), std::move(out), {a}, [ia, factor](Tape& t, std::uint32_t self) {
    auto g = t.grad(self);
    auto ga = t.grad_mut(ia);
    for (std::size_t k = 0; k < g.size(); ++k) ga[k] += g[k] * factor;
  });
}

Tensor one_minus(Tensor a) {
  std::vector<double> out = copy_value(a);
  for (double& v : out) v = 1.0 - v;
  const std::uint32_t ia = a.id();
  return a.tape().push(a.shape(), std::move(out), {a}, [ia](Tape& t, std::uint32_t self) {
    auto g = t.grad(self);
    auto ga = t.grad_mut(ia);
    for (std::size_t k = 0; k < g.size(); ++k) ga[k] -= g[k];
  });
}

Tensor sigmoid(Tensor a) {
  return unary_from_output(
      a,
      [](double x) {
        if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
        const double e = std::exp(x);
        return e / (1.0 + e);
      },
      [](double y) { return y * (1.0 - y); });
}

Tensor tanh(Tensor a) {
  return unary_from_output(a, [](double x) { return std::tanh(x); }, [](double y) { return 1.0 - y * y; });
}

Tensor relu(Tensor a) {
  return unary_from_output(a, [](double x) { return x > 0.0 ? x : 0.0; },
                           [](double y) { return y > 0.0 ? 1.0 : 0.0; });
}

Tensor sum(Tensor a) {
  double s = 0.0;
  for (double v : a.value()) s += v;
  const std::uint32_t ia = a.id();
  return a.tape().push({1, 1}, {s}, {a}, [ia](Tape& t, std::uint32_t self) {
    const double g = t.grad(self)[0];
    for (double& v : t.grad_mut(ia)) v += g;
  });
}

Tensor transpose(Tensor a) {
  const Shape s = a.shape();
  auto va = a.value();
  std::vector<double> out(s.size());
  for (std::size_t r = 0; r < s.rows; ++r)
    for (std::size_t c = 0; c < s.cols; ++c) out[c * s.rows + r] = va[r * s.cols + c];
  const std::uint32_t ia = a.id();
  return a.tape().push({s.cols, s.rows}, std::move(out), {a}, [ia, s](Tape& t, std::uint32_t self) {
    auto g = t.grad(self);
    auto ga = t.grad_mut(ia);
    for (std::size_t r = 0; r < s.rows; ++r)
      for (std::size_t c = 0; c < s.cols; ++c) ga[r * s.cols + c] += g[c * s.rows + r];
  });
}

Tensor concat_cols(std::span<const Tensor> parts) {
  if (parts.empty()) throw ShapeError("concat_cols: no operands");
  const std::size_t rows = parts[0].rows();
  std::size_t cols = 0;
  std::vector<std::uint32_t> ids;
  std::vector<std::size_t> widths;
  for (const Tensor& p : parts) {
    same_tape(parts[0], p);
    if (p.rows() != rows) shape_fail("concat_cols", parts[0].shape(), p.shape());
    cols += p.cols();
    ids.push_back(p.id());
    widths.push_back(p.cols());
  }
  std::vector<double> out(rows * cols);
  std::size_t off = 0;
  for (const Tensor& p : parts) {
    auto v = p.value();
    const std::size_t w = p.cols();
    for (std::size_t r = 0; r < rows; ++r) std::copy_n(v.data() + r * w, w, out.data() + r * cols + off);
    off += w;
  }
  return parts[0].tape().push({rows, cols}, std::move(out), parts,
                              [ids, widths, rows, cols](Tape& t, std::uint32_t self) {
                                auto g = t.grad(self);
                                std::size_t off = 0;
                                for (std::size_t p = 0; p < ids.size(); ++p) {
                                  const std::size_t w = widths[p];
                                  if (t.requires_grad(ids[p])) {
                                    auto gp = t.grad_mut(ids[p]);
                                    for (std::size_t r = 0; r < rows; ++r)
                                      for (std::size_t c = 0; c < w; ++c) gp[r * w + c] += g[r * cols + off + c];
                                  }
                                  off += w;
                                }
                              });
}

Tensor stack_rows(std::span<const Tensor> parts) {
  if (parts.empty()) throw ShapeError("stack_rows: no operands");
  const std::size_t cols = parts[0].cols();
  std::vector<double> out;
  std::vector<std::uint32_t> ids;
  std::size_t rows = 0;
  for (const Tensor& p : parts) {
    same_tape(parts[0], p);
    if (p.cols() != cols) shape_fail("stack_rows", parts[0].shape(), p.shape());
    auto v = p.value();
    out.insert(out.end(), v.begin(), v.end());
    rows += p.rows();
    ids.push_back(p.id());
  }
  return parts[0].tape().push({rows, cols}, std::move(out), parts, [ids](Tape& t, std::uint32_t self) {
    auto g = t.grad(self);
    std::size_t off = 0;
    for (std::uint32_t id : ids) {
      const std::size_t n = t.shape(id).size();
      if (t.requires_grad(id)) {
        auto gp = t.grad_mut(id);
        for (std::size_t k = 0; k < n; ++k) gp[k] += g[off + k];
      }
      off += n;
    }
  });
}

Tensor slice_cols(Tensor a, std::size_t begin, std::size_t count) {
  const Shape s = a.shape();
  if (begin + count > s.cols) shape_fail("slice_cols", s, Shape{1, begin + count});
  auto v = a.value();
  std::vector<double> out(s.rows * count);
  for (std::size_t r = 0; r < s.rows; ++r) std::copy_n(v.data() + r * s.cols + begin, count, out.data() + r * count);
  const std::uint32_t ia = a.id();
  return a.tape().push({s.rows, count}, std::move(out), {a}, [ia, s, begin, count](Tape& t, std::uint32_t self) {
    auto g = t.grad(self);
    auto ga = t.grad_mut(ia);
    for (std::size_t r = 0; r < s.rows; ++r)
      for (std::size_t c = 0; c < count; ++c) ga[r * s.cols + begin + c] += g[r * count + c];
  });
}

Tensor row(Tensor a, std::size_t r) {
  const std::size_t idx[1] = {r};
  return gather_rows(a, idx);
}

Tensor gather_rows(Tensor a, std::span<const std::size_t> indices) {
  const Shape s = a.shape();
  auto v = a.value();
  std::vector<double> out(indices.size() * s.cols);
  for (std::size_t k = 0; k < indices.size(); ++k) {
    if (indices[k] >= s.rows) shape_fail("gather_rows", s, Shape{indices[k] + 1, s.cols});
    std::copy_n(v.data() + indices[k] * s.cols, s.cols, out.data() + k * s.cols);
  }
  const std::uint32_t ia = a.id();
  std::vector<std::size_t> idx(indices.begin(), indices.end());
  return a.tape().push({indices.size(), s.cols}, std::move(out), {a},
                       [ia, idx = std::move(idx), cols = s.cols](Tape& t, std::uint32_t self) {
                         auto g = t.grad(self);
                         auto ga = t.grad_mut(ia);
                         for (std::size_t k = 0; k < idx.size(); ++k)
                           for (std::size_t c = 0; c < cols; ++c) ga[idx[k] * cols + c] += g[k * cols + c];
                       });
}

Tensor repeat_rows(Tensor a, std::size_t times) {
  const Shape s = a.shape();
  if (s.rows != 1) shape_fail("repeat_rows", s, Shape{1, s.cols});
  std::vector<std::size_t> idx(times, 0);
  return gather_rows(a, idx);
}

Tensor maxpool_rows(Tensor a) {
  const Shape s = a.shape();
  if (s.rows == 0) throw ShapeError("maxpool_rows: empty input " + s.str());
  auto v = a.value();
  std::vector<double> out(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(s.cols));
  std::vector<std::size_t> arg(s.cols, 0);
  for (std::size_t r = 1; r < s.rows; ++r)
    for (std::size_t c = 0; c < s.cols; ++c)
      if (v[r * s.cols + c] > out[c]) {
        out[c] = v[r * s.cols + c];
        arg[c] = r;
      }
  const std::uint32_t ia = a.id();
  return a.tape().push({1, s.cols}, std::move(out), {a},
                       [ia, arg = std::move(arg), cols = s.cols](Tape& t, std::uint32_t self) {
                         auto g = t.grad(self);
                         auto ga = t.grad_mut(ia);
                         for (std::size_t c = 0; c < cols; ++c) ga[arg[c] * cols + c] += g[c];
                       });
}

Tensor dropout(Tensor a, double p, bool train, std::uint64_t stream) {
  if (p < 0.0 || p >= 1.0) throw ShapeError("dropout probability must be in [0, 1)");
  if (!train || p == 0.0) return a;
  const std::size_t n = a.shape().size();
  std::vector<double> mask(n);
  const double keep = 1.0 / (1.0 - p);
  for (std::size_t k = 0; k < n; ++k)
    mask[k] = unit_from_bits(splitmix64(stream ^ splitmix64(k))) < p ? 0.0 : keep;
  std::vector<double> out = copy_value(a);
  for (std::size_t k = 0; k < n; ++k) out[k] *= mask[k];
  const std::uint32_t ia = a.id();
  return a.tape().push(a.shape(), std::move(out), {a}, [ia, mask = std::move(mask)](Tape& t, std::uint32_t self) {
    auto g = t.grad(self);
    auto ga = t.grad_mut(ia);
    for (std::size_t k = 0; k < g.size(); ++k) ga[k] += g[k] * mask[k];
  });
}

Tensor masked_softmax(Tensor scores, std::size_t active) {
  const Shape s = scores.shape();
  if (s.rows != 1 && s.cols != 1) throw ShapeError("masked_softmax expects a vector, got " + s.str());
  if (active > s.size()) throw ShapeError("masked_softmax: active count exceeds length " + s.str());
  auto v = scores.value();
  std::vector<double> out(s.size(), 0.0);
  if (active > 0) {
    const double mx = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(active));
    double z = 0.0;
    for (std::size_t k = 0; k < active; ++k) {
      out[k] = std::exp(v[k] - mx);
      z += out[k];
    }
    for (std::size_t k = 0; k < active; ++k) out[k] /= z;
  }
  const std::uint32_t ia = scores.id();
  return scores.tape().push(s, std::move(out), {scores}, [ia, active](Tape& t, std::uint32_t self) {
    auto g = t.grad(self);
    auto y = t.value(self);
    double dot = 0.0;
    for (std::size_t k = 0; k < active; ++k) dot += g[k] * y[k];
    auto ga = t.grad_mut(ia);
    for (std::size_t k = 0; k < active; ++k) ga[k] += y[k] * (g[k] - dot);
  });
}

Tensor bce_sum(Tensor probs, std::span<const double> labels) {
  const Shape s = probs.shape();
  if (labels.size() != s.size())
    throw ShapeError("bce_sum: " + std::to_string(labels.size()) + " labels for probabilities " + s.str());
  auto p = probs.value();
  double loss = 0.0;
  for (std::size_t k = 0; k < labels.size(); ++k) {
    const double q = std::clamp(p[k], kProbClip, 1.0 - kProbClip);
    loss -= labels[k] * std::log(q) + (1.0 - labels[k]) * std::log(1.0 - q);
  }
  const std::uint32_t ia = probs.id();
  std::vector<double> y(labels.begin(), labels.end());
  return probs.tape().push({1, 1}, {loss}, {probs}, [ia, y = std::move(y)](Tape& t, std::uint32_t self) {
    const double g = t.grad(self)[0];
    auto p = t.value(ia);
    auto ga = t.grad_mut(ia);
    for (std::size_t k = 0; k < y.size(); ++k) {
      if (p[k] < kProbClip || p[k] > 1.0 - kProbClip) continue;
      ga[k] += g * (-y[k] / p[k] + (1.0 - y[k]) / (1.0 - p[k]));
    }
  });
}

}  // namespace kec::ad
