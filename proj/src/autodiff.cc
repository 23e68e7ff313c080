// Copyright 2026 The swiftnet-cpp Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "swiftnet/autodiff.h"

#include <Eigen/Core>

namespace swiftnet::autodiff {
namespace {

thread_local Tape* g_active_tape = nullptr;

bool TrackedOn(const Tensor& t, const Tape* tape) {
  return tape && t.defined() && t.slot() && t.slot()->tape == tape;
}

void Accumulate(Tensor& acc, const Tensor& g) {
  if (!acc.defined()) {
    acc = g.detach();
    return;
  }
  Tensor sum = acc.clone();
  Eigen::Map<Eigen::ArrayXd>(sum.mutable_ptr(), sum.numel()) +=
      Eigen::Map<const Eigen::ArrayXd>(g.ptr(), g.numel());
  acc = sum;
}

}  // namespace

Tensor Gradients::of(const Tensor& leaf) const {
  if (!leaf.slot()) throw Error("gradient requested for a tensor that was never watched");
  auto it = by_slot_.find(leaf.slot()->id);
  if (it == by_slot_.end()) return Tensor::Zeros(leaf.shape());
  return it->second;
}

bool Gradients::contains(const Tensor& leaf) const {
  return leaf.slot() && by_slot_.count(leaf.slot()->id) > 0;
}

Tensor Tape::Watch(const Tensor& leaf) {
  if (consumed_) throw Error("tape already consumed by Backward");
  Tensor t = leaf.detach();
  auto slot = std::make_shared<Slot>();
  slot->tape = this;
  slot->id = next_id_++;
  slot->leaf = true;
  leaves_.push_back(slot);
  t.set_slot(slot);
  return t;
}

Tensor Tape::Record(Tensor out, const std::vector<Tensor>& inputs, BackwardFn fn, const char* op) {
  if (consumed_) throw Error("tape already consumed by Backward");
  Node node;
  node.op = op;
  for (const Tensor& in : inputs) {
    node.inputs.push_back(TrackedOn(in, this) ? in.slot() : nullptr);
    node.input_shapes.push_back(in.defined() ? in.shape() : Shape{});
  }
  auto slot = std::make_shared<Slot>();
  slot->tape = this;
  slot->id = next_id_++;
  node.output = slot->id;
  node.backward = std::move(fn);
  nodes_.push_back(std::move(node));
  out.set_slot(slot);
  return out;
}

Gradients Tape::Backward(const Tensor& loss) {
  if (consumed_) throw Error("tape already consumed by Backward");
  if (loss.numel() != 1)
    throw ShapeError("Backward requires a scalar loss, got " + ShapeString(loss.shape()));
  if (!TrackedOn(loss, this)) throw Error("loss is not on this tape (detached leaf)");
  consumed_ = true;
  NoGradScope no_grad;

  std::unordered_map<size_t, Tensor> grads;
  grads[loss.slot()->id] = Tensor::Full(loss.shape(), 1.0);
  for (auto it = nodes_.rbegin(); it != nodes_.rend(); ++it) {
    auto g = grads.find(it->output);
    if (g == grads.end()) continue;
    const Tensor grad_out = g->second;
    grads.erase(g);
    std::vector<Tensor> in_grads = it->backward(grad_out);
    for (size_t i = 0; i < it->inputs.size() && i < in_grads.size(); ++i) {
      if (!it->inputs[i] || !in_grads[i].defined()) continue;
      if (in_grads[i].shape() != it->input_shapes[i]) {
        throw ShapeError(std::string("backward of '") + it->op + "' produced gradient " +
                         ShapeString(in_grads[i].shape()) + " for input " +
                         ShapeString(it->input_shapes[i]));
      }
      Accumulate(grads[it->inputs[i]->id], in_grads[i]);
    }
    it->backward = nullptr;  // release saved activations
  }

  std::unordered_map<size_t, Tensor> leaf_grads;
  for (const auto& leaf : leaves_) {
    auto g = grads.find(leaf->id);
    if (g != grads.end()) leaf_grads[leaf->id] = g->second;
  }
  // A watched leaf used directly as the loss.
  if (loss.slot()->leaf) leaf_grads[loss.slot()->id] = Tensor::Full(loss.shape(), 1.0);
  nodes_.clear();
  return Gradients(std::move(leaf_grads));
}

std::vector<std::string> Tape::OpNames() const {
  std::vector<std::string> names;
  names.reserve(nodes_.size());
  for (const auto& n : nodes_) names.emplace_back(n.op);
  return names;
}

TapeScope::TapeScope(Tape& tape) : previous_(g_active_tape) { g_active_tape = &tape; }
TapeScope::~TapeScope() { g_active_tape = previous_; }

NoGradScope::NoGradScope() : previous_(g_active_tape) { g_active_tape = nullptr; }
NoGradScope::~NoGradScope() { g_active_tape = previous_; }

Tape* ActiveTape() { return g_active_tape; }

bool NeedsRecord(std::initializer_list<const Tensor*> inputs) {
  Tape* tape = g_active_tape;
  if (!tape) return false;
  for (const Tensor* t : inputs)
    if (t && TrackedOn(*t, tape)) return true;
  return false;
}

bool NeedsRecord(const std::vector<Tensor>& inputs) {
  Tape* tape = g_active_tape;
  if (!tape) return false;
  for (const Tensor& t : inputs)
    if (TrackedOn(t, tape)) return true;
  return false;
}

Tensor Record(Tensor out, const std::vector<Tensor>& inputs, BackwardFn fn, const char* op) {
  if (!NeedsRecord(inputs)) return out;
  return g_active_tape->Record(std::move(out), inputs, std::move(fn), op);
}

}  // namespace swiftnet::autodiff
