// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The KEC Authors

#include "kec/ad/optim.hpp"

#include <cmath>

#include "kec/error.hpp"
#include "kec/util.hpp"

namespace kec::ad {

AdamW::AdamW(const ParamStore& store, AdamWConfig config) : config_(config) {
  state_.m.resize(store.count());
  state_.v.resize(store.count());
  for (std::size_t i = 0; i < store.count(); ++i) {
    state_.m[i].assign(store.at(i).size(), 0.0);
    state_.v[i].assign(store.at(i).size(), 0.0);
  }
}

void AdamW::restore(const ParamStore& store, OptimizerState state) {
  if (state.m.size() != store.count() || state.v.size() != store.count())
    throw ShapeError("optimizer state covers " + std::to_string(state.m.size()) + " parameters, store has " +
                     std::to_string(store.count()));
  for (std::size_t i = 0; i < store.count(); ++i)
    if (state.m[i].size() != store.at(i).size() || state.v[i].size() != store.at(i).size())
      throw ShapeError("optimizer moments for '" + store.at(i).name() + "' do not match its shape");
  state_ = std::move(state);
}

void AdamW::step(ParamStore& store, const GradientSet& grads) {
  if (grads.count() != store.count() || state_.m.size() != store.count())
    throw ShapeError("gradient set does not match the parameter store");
  state_.step += 1;
  const double t = static_cast<double>(state_.step);
  const double bc1 = 1.0 - std::pow(config_.beta1, t);
  const double bc2 = 1.0 - std::pow(config_.beta2, t);
  const double decay = config_.lr * config_.weight_decay;
  for (std::size_t i = 0; i < store.count(); ++i) {
    std::vector<double>& p = store.at(i).value();
    std::vector<double>& m = state_.m[i];
    std::vector<double>& v = state_.v[i];
    const bool has = grads.has(i);
    std::span<const double> g = grads.grad(i);
    if (has && g.size() != p.size()) throw ShapeError("gradient for '" + store.at(i).name() + "' has wrong size");
    for (std::size_t k = 0; k < p.size(); ++k) {
      const double gk = has ? g[k] : 0.0;
      p[k] -= decay * p[k];
      m[k] = config_.beta1 * m[k] + (1.0 - config_.beta1) * gk;
      v[k] = config_.beta2 * v[k] + (1.0 - config_.beta2) * gk * gk;
      const double mh = m[k] / bc1;
      const double vh = v[k] / bc2;
      p[k] -= config_.lr * mh / (std::sqrt(vh) + config_.eps);
    }
  }
}

void uniform_fill(Parameter& p, double bound, std::mt19937_64& rng) {
  for (double& v : p.value()) v = (2.0 * unit_from_bits(rng()) - 1.0) * bound;
}

void xavier_uniform(Parameter& p, std::mt19937_64& rng) {
  const Shape s = p.shape();
  uniform_fill(p, std::sqrt(6.0 / static_cast<double>(s.rows + s.cols)), rng);
}

}  // namespace kec::ad
