// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The KEC Authors

#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace kec::ad {

struct Shape {
  std::size_t rows = 0;
  std::size_t cols = 0;

  std::size_t size() const { return rows * cols; }
  bool operator==(const Shape&) const = default;
  std::string str() const { return "[" + std::to_string(rows) + "x" + std::to_string(cols) + "]"; }
};

// A named trainable matrix. Value storage is owned here; tapes reference it
// read-only and gradients go to a GradientSet.
class Parameter {
 public:
  Parameter(std::string name, Shape shape, std::size_t index)
      : name_(std::move(name)), shape_(shape), index_(index), value_(shape.size(), 0.0) {}

  const std::string& name() const { return name_; }
  Shape shape() const { return shape_; }
  std::size_t index() const { return index_; }
  std::size_t size() const { return value_.size(); }

  std::vector<double>& value() { return value_; }
  const std::vector<double>& value() const { return value_; }

 private:
  std::string name_;
  Shape shape_;
  std::size_t index_;
  std::vector<double> value_;
};

// Ordered collection of parameters with stable addresses.
class ParamStore {
 public:
  Parameter& add(const std::string& name, Shape shape);
  Parameter& get(const std::string& name);
  const Parameter& get(const std::string& name) const;
  const Parameter* find(const std::string& name) const;

  std::size_t count() const { return params_.size(); }
  Parameter& at(std::size_t index) { return *params_.at(index); }
  const Parameter& at(std::size_t index) const { return *params_.at(index); }
  // Total number of scalar weights.
  std::size_t total_size() const;

 private:
  std::vector<std::unique_ptr<Parameter>> params_;
  std::unordered_map<std::string, std::size_t> by_name_;
};

// Per-parameter gradient buffers, allocated on first touch.
class GradientSet {
 public:
  explicit GradientSet(const ParamStore& store);

  std::span<double> grad(std::size_t param_index);
  std::span<const double> grad(std::size_t param_index) const;
  bool has(std::size_t param_index) const { return !buffers_.at(param_index).empty(); }
  std::size_t count() const { return buffers_.size(); }

  // Element-wise sum in parameter order; result is independent of how the
  // contributions were produced.
  void add(const GradientSet& other);
  void scale(double factor);
  void zero();

 private:
  std::vector<std::size_t> sizes_;
  std::vector<std::vector<double>> buffers_;
};

class Tape;

// Lightweight handle to a node on a tape.
class Tensor {
 public:
  Tensor() = default;
  Tensor(Tape* tape, std::uint32_t id) : tape_(tape), id_(id) {}

  Tape& tape() const { return *tape_; }
  std::uint32_t id() const { return id_; }
  bool valid() const { return tape_ != nullptr; }

  Shape shape() const;
  std::size_t rows() const { return shape().rows; }
  std::size_t cols() const { return shape().cols; }
  std::span<const double> value() const;
  double item() const;  // value of a 1x1 tensor
  std::span<const double> grad() const;
  bool requires_grad() const;

 private:
  Tape* tape_ = nullptr;
  std::uint32_t id_ = 0;
};

// Records operations in execution order (which is a topological order), and
// replays their local gradient rules in reverse.
class Tape {
 public:
  using BackwardFn = std::function<void(Tape&, std::uint32_t self)>;

  // With record = false no gradient rules are stored and backward() throws.
  explicit Tape(bool record = true) : record_(record) {}
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  bool recording() const { return record_; }

  Tensor constant(Shape shape, std::vector<double> values);
  Tensor zeros(Shape shape);
  // Leaf whose gradient is kept on the tape (inputs under test).
  Tensor leaf(Shape shape, std::vector<double> values, bool requires_grad = true);
  // Memoized per parameter: repeated calls return the same node.
  Tensor param(const Parameter& p);

  // Adds an operation node. `backward` may be empty for non-differentiable
  // results; it is dropped when no input requires a gradient.
  Tensor push(Shape shape, std::vector<double> value, std::initializer_list<Tensor> inputs, BackwardFn backward);
  Tensor push(Shape shape, std::vector<double> value, std::span<const Tensor> inputs, BackwardFn backward);

  // Seeds d(loss)/d(loss) = 1 and propagates. Intermediate gradients are
  // reset first; leaf and parameter gradients accumulate across calls.
  void backward(Tensor loss);
  // Adds every parameter gradient on this tape into `sink`.
  void accumulate_into(GradientSet& sink) const;

  // Node access used by operation rules.
  Shape shape(std::uint32_t id) const { return nodes_[id].shape; }
  std::span<const double> value(std::uint32_t id) const;
  std::span<const double> grad(std::uint32_t id) const { return nodes_[id].grad; }
  // Lazily allocated, zero-initialized gradient buffer.
  std::span<double> grad_mut(std::uint32_t id);
  bool requires_grad(std::uint32_t id) const { return nodes_[id].requires_grad; }

  std::size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    Shape shape;
    std::vector<double> owned;
    const Parameter* param = nullptr;
    std::vector<double> grad;
    bool requires_grad = false;
    BackwardFn backward;
  };

  bool record_;
  std::vector<Node> nodes_;
  std::unordered_map<const Parameter*, std::uint32_t> param_nodes_;
};

}  // namespace kec::ad
