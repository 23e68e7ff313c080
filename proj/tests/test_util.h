// Copyright 2026 The swiftnet-cpp Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

// Shared helpers for the unit and acceptance tests.

#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include "swiftnet/autodiff.h"
#include "swiftnet/ops.h"
#include "swiftnet/tensor.h"

namespace swiftnet::testing {

inline Tensor RandomTensor(const Shape& shape, std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> nd(0.0, scale);
  Tensor t(shape);
  for (int64_t i = 0; i < t.numel(); ++i) t.mutable_ptr()[i] = nd(rng);
  return t;
}

inline Tensor RandomUniform(const Shape& shape, std::mt19937_64& rng, double lo, double hi) {
  std::uniform_real_distribution<double> ud(lo, hi);
  Tensor t(shape);
  for (int64_t i = 0; i < t.numel(); ++i) t.mutable_ptr()[i] = ud(rng);
  return t;
}

// Copy of `t` with element `i` shifted by `delta`.
inline Tensor Nudged(const Tensor& t, int64_t i, double delta) {
  Tensor out = t.clone();
  out.mutable_ptr()[i] += delta;
  return out;
}

using LeafFn = std::function<Tensor(const std::vector<Tensor>&)>;

struct GradCheck {
  int probes = 0;
  double max_error = 0;  // |analytic - numeric| / max(1, |numeric|)
};

// Compares reverse-mode gradients of the scalar `loss(leaves)` against central
// differences at `probes` random elements, cycling over the leaves so every
// leaf is probed.
inline GradCheck CheckGradients(const std::vector<Tensor>& leaves, const LeafFn& loss, int probes,
                                uint64_t seed, double h = 1e-5) {
  std::vector<Tensor> analytic;
  {
    autodiff::Tape tape;
    autodiff::TapeScope scope(tape);
    std::vector<Tensor> watched;
    for (const auto& l : leaves) watched.push_back(tape.Watch(l));
    const Tensor value = loss(watched);
    const auto grads = tape.Backward(value);
    for (const auto& w : watched) analytic.push_back(grads.of(w));
  }
  std::mt19937_64 rng(seed);
  GradCheck out;
  for (int p = 0; p < probes; ++p) {
    const size_t li = static_cast<size_t>(p) % leaves.size();
    const int64_t i = std::uniform_int_distribution<int64_t>(0, leaves[li].numel() - 1)(rng);
    auto eval = [&](double delta) {
      std::vector<Tensor> moved = leaves;
      moved[li] = Nudged(leaves[li], i, delta);
      return loss(moved).item();
    };
    const double numeric = (eval(h) - eval(-h)) / (2 * h);
    const double err = std::abs(analytic[li].ptr()[i] - numeric) / std::max(1.0, std::abs(numeric));
    out.max_error = std::max(out.max_error, err);
    ++out.probes;
  }
  return out;
}

// Scalar probe <f(x), r> for a fixed random r; turns any output into a loss.
inline Tensor Project(const Tensor& y, const Tensor& r) { return ops::Sum(ops::Mul(y, r)); }

}  // namespace swiftnet::testing
