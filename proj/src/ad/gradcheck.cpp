// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The KEC Authors

#include "kec/ad/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "kec/util.hpp"

namespace kec::ad {

GradCheckResult grad_check(ParamStore& store, const std::function<Tensor(Tape&)>& loss,
                           const GradCheckOptions& options) {
  GradientSet analytic(store);
  {
    Tape tape(true);
    Tensor l = loss(tape);
    tape.backward(l);
    tape.accumulate_into(analytic);
  }
  auto eval = [&] {
    Tape tape(false);
    return loss(tape).item();
  };

  GradCheckResult result;
  std::mt19937_64 rng(options.seed);
  for (std::size_t pi = 0; pi < store.count(); ++pi) {
    Parameter& p = store.at(pi);
    std::vector<std::size_t> idx(p.size());
    std::iota(idx.begin(), idx.end(), 0);
    if (idx.size() > options.max_entries_per_param) {
      for (std::size_t k = 0; k < options.max_entries_per_param; ++k) {
        const std::size_t pick = k + static_cast<std::size_t>(rng() % (idx.size() - k));
        std::swap(idx[k], idx[pick]);
      }
      idx.resize(options.max_entries_per_param);
    }
    std::span<const double> ga = analytic.grad(pi);
    for (std::size_t k : idx) {
      double& w = p.value()[k];
      const double saved = w;
      w = saved + options.eps;
      const double fp = eval();
      w = saved - options.eps;
      const double fm = eval();
      w = saved;
      const double numeric = (fp - fm) / (2.0 * options.eps);
      const double a = ga.empty() ? 0.0 : ga[k];
      const double abs_err = std::abs(a - numeric);
      const double rel = abs_err / std::max({std::abs(a), std::abs(numeric), options.floor});
      result.max_abs_error = std::max(result.max_abs_error, abs_err);
      if (rel > result.max_rel_error || result.checked == 0) {
        result.max_rel_error = std::max(rel, result.max_rel_error);
        if (rel >= result.max_rel_error) {
          result.worst_param = p.name();
          result.worst_index = k;
          result.worst_analytic = a;
          result.worst_numeric = numeric;
        }
      }
      ++result.checked;
    }
  }
  return result;
}

}  // namespace kec::ad
