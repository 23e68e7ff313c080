// Copyright 2026 The swiftnet-cpp Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

// Reverse-mode differentiation over coarse-grained tensor operations.
//
// A Tape is activated for the current thread with a TapeScope. Leaves are
// registered with Tape::Watch; every op whose inputs include a watched tensor
// appends one node. Nodes are stored in creation order, so inputs always
// precede the node that consumes them and Backward walks the list in reverse.
// Without an active tape no node is ever constructed.

#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <unordered_map>
#include <vector>

#include "swiftnet/tensor.h"

namespace swiftnet::autodiff {

class Tape;

struct Slot {
  Tape* tape = nullptr;
  size_t id = 0;
  bool leaf = false;
};

// Maps the output gradient of a node to one gradient per input. An undefined
// Tensor means "no contribution".
using BackwardFn = std::function<std::vector<Tensor>(const Tensor& grad_out)>;

class Gradients {
 public:
  Gradients() = default;
  explicit Gradients(std::unordered_map<size_t, Tensor> by_slot) : by_slot_(std::move(by_slot)) {}

  // Gradient of a watched leaf. Leaves that did not influence the loss get zeros.
  Tensor of(const Tensor& leaf) const;
  bool contains(const Tensor& leaf) const;

 private:
  std::unordered_map<size_t, Tensor> by_slot_;
};

class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Tensor Watch(const Tensor& leaf);

  // Runs the reverse sweep from a scalar loss. The tape is consumed.
  Gradients Backward(const Tensor& loss);

  size_t size() const { return nodes_.size(); }
  bool consumed() const { return consumed_; }
  // Op names in creation order; used by tests that check topology.
  std::vector<std::string> OpNames() const;

  Tensor Record(Tensor out, const std::vector<Tensor>& inputs, BackwardFn fn, const char* op);

 private:
  struct Node {
    const char* op;
    std::vector<std::shared_ptr<Slot>> inputs;  // null for untracked inputs
    std::vector<Shape> input_shapes;
    size_t output;
    BackwardFn backward;
  };

  size_t next_id_ = 0;
  std::vector<Node> nodes_;
  std::vector<std::shared_ptr<Slot>> leaves_;
  bool consumed_ = false;
};

// Activates a tape for the current thread; restores the previous one on exit.
class TapeScope {
 public:
  explicit TapeScope(Tape& tape);
  ~TapeScope();
  TapeScope(const TapeScope&) = delete;
  TapeScope& operator=(const TapeScope&) = delete;

 private:
  Tape* previous_;
};

// Disables recording for the current thread (used inside backward sweeps).
class NoGradScope {
 public:
  NoGradScope();
  ~NoGradScope();
  NoGradScope(const NoGradScope&) = delete;
  NoGradScope& operator=(const NoGradScope&) = delete;

 private:
  Tape* previous_;
};

Tape* ActiveTape();

// True when an op over `inputs` must be recorded.
bool NeedsRecord(std::initializer_list<const Tensor*> inputs);
bool NeedsRecord(const std::vector<Tensor>& inputs);

// Records `out` on the active tape when any input is tracked there; otherwise
// returns `out` unchanged.
Tensor Record(Tensor out, const std::vector<Tensor>& inputs, BackwardFn fn, const char* op);

}  // namespace swiftnet::autodiff
