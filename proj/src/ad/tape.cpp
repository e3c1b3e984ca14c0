// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The KEC Authors

#include "kec/ad/tape.hpp"

#include "kec/error.hpp"

namespace kec::ad {

Parameter& ParamStore::add(const std::string& name, Shape shape) {
  if (by_name_.contains(name)) throw ValidationError("duplicate parameter '" + name + "'");
  const std::size_t index = params_.size();
  params_.push_back(std::make_unique<Parameter>(name, shape, index));
  by_name_.emplace(name, index);
  return *params_.back();
}

Parameter& ParamStore::get(const std::string& name) {
  auto it = by_name_.find(name);
  if (it == by_name_.end()) throw ValidationError("unknown parameter '" + name + "'");
  return *params_[it->second];
}

const Parameter& ParamStore::get(const std::string& name) const {
  auto it = by_name_.find(name);
  if (it == by_name_.end()) throw ValidationError("unknown parameter '" + name + "'");
  return *params_[it->second];
}

const Parameter* ParamStore::find(const std::string& name) const {
  auto it = by_name_.find(name);
  return it == by_name_.end() ? nullptr : params_[it->second].get();
}

std::size_t ParamStore::total_size() const {
  std::size_t n = 0;
  for (const auto& p : params_) n += p->size();
  return n;
}

GradientSet::GradientSet(const ParamStore& store) : buffers_(store.count()) {
  sizes_.reserve(store.count());
  for (std::size_t i = 0; i < store.count(); ++i) sizes_.push_back(store.at(i).size());
}

std::span<double> GradientSet::grad(std::size_t param_index) {
  auto& b = buffers_.at(param_index);
  if (b.empty()) b.assign(sizes_[param_index], 0.0);
  return b;
}

std::span<const double> GradientSet::grad(std::size_t param_index) const { return buffers_.at(param_index); }

void GradientSet::add(const GradientSet& other) {
  if (other.buffers_.size() != buffers_.size()) throw ShapeError("gradient sets belong to different parameter stores");
  for (std::size_t i = 0; i < buffers_.size(); ++i) {
    if (other.buffers_[i].empty()) continue;
    auto dst = grad(i);
    const auto& src = other.buffers_[i];
    for (std::size_t k = 0; k < dst.size(); ++k) dst[k] += src[k];
  }
}

void GradientSet::scale(double factor) {
  for (auto& b : buffers_)
    for (double& v : b) v *= factor;
}

void GradientSet::zero() {
  for (auto& b : buffers_) b.clear();
}

Shape Tensor::shape() const { return tape_->shape(id_); }
std::span<const double> Tensor::value() const { return tape_->value(id_); }
std::span<const double> Tensor::grad() const { return tape_->grad(id_); }
bool Tensor::requires_grad() const { return tape_->requires_grad(id_); }

double Tensor::item() const {
  if (shape().size() != 1) throw ShapeError("item() on non-scalar tensor " + shape().str());
  return value()[0];
}

std::span<const double> Tape::value(std::uint32_t id) const {
  const Node& n = nodes_[id];
  if (n.param) return n.param->value();
  return n.owned;
}

std::span<double> Tape::grad_mut(std::uint32_t id) {
  Node& n = nodes_[id];
  if (n.grad.empty()) n.grad.assign(n.shape.size(), 0.0);
  return n.grad;
}

Tensor Tape::constant(Shape shape, std::vector<double> values) { return leaf(shape, std::move(values), false); }

Tensor Tape::zeros(Shape shape) { return leaf(shape, std::vector<double>(shape.size(), 0.0), false); }

Tensor Tape::leaf(Shape shape, std::vector<double> values, bool requires_grad) {
  if (values.size() != shape.size())
    throw ShapeError("leaf value has " + std::to_string(values.size()) + " entries for shape " + shape.str());
  Node n;
  n.shape = shape;
  n.owned = std::move(values);
  n.requires_grad = requires_grad && record_;
  nodes_.push_back(std::move(n));
  return {this, static_cast<std::uint32_t>(nodes_.size() - 1)};
}

Tensor Tape::param(const Parameter& p) {
  if (auto it = param_nodes_.find(&p); it != param_nodes_.end()) return {this, it->second};
  Node n;
  n.shape = p.shape();
  n.param = &p;
  n.requires_grad = record_;
  nodes_.push_back(std::move(n));
  const auto id = static_cast<std::uint32_t>(nodes_.size() - 1);
  param_nodes_.emplace(&p, id);
  return {this, id};
}

Tensor Tape::push(Shape shape, std::vector<double> value, std::initializer_list<Tensor> inputs,
                  BackwardFn backward) {
  return push(shape, std::move(value), std::span<const Tensor>(inputs.begin(), inputs.size()), std::move(backward));
}

Tensor Tape::push(Shape shape, std::vector<double> value, std::span<const Tensor> inputs, BackwardFn backward) {
  if (value.size() != shape.size()) throw ShapeError("op produced " + std::to_string(value.size()) +
                                                     " values for shape " + shape.str());
  Node n;
  n.shape = shape;
  n.owned = std::move(value);
  if (record_) {
    for (const Tensor& t : inputs) {
      if (&t.tape() != this) throw ShapeError("tensor from another tape");
      if (nodes_[t.id()].requires_grad) n.requires_grad = true;
    }
    if (n.requires_grad) n.backward = std::move(backward);
  }
  nodes_.push_back(std::move(n));
  return {this, static_cast<std::uint32_t>(nodes_.size() - 1)};
}

void Tape::backward(Tensor loss) {
  if (!record_) throw Error("backward() on a tape that does not record");
  if (&loss.tape() != this) throw ShapeError("loss belongs to another tape");
  if (loss.shape().size() != 1) throw ShapeError("backward() needs a scalar loss, got " + loss.shape().str());
  for (Node& n : nodes_)
    if (n.backward) n.grad.clear();
  if (!nodes_[loss.id()].requires_grad) return;
  grad_mut(loss.id())[0] += 1.0;
  for (std::int64_t id = loss.id(); id >= 0; --id) {
    Node& n = nodes_[static_cast<std::size_t>(id)];
    if (n.backward && !n.grad.empty()) n.backward(*this, static_cast<std::uint32_t>(id));
  }
}

void Tape::accumulate_into(GradientSet& sink) const {
  for (const auto& [param, id] : param_nodes_) {
    const Node& n = nodes_[id];
    if (n.grad.empty()) continue;
    auto dst = sink.grad(param->index());
    for (std::size_t k = 0; k < dst.size(); ++k) dst[k] += n.grad[k];
  }
}

}  // namespace kec::ad
