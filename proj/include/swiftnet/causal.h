// Copyright 2026 The swiftnet-cpp Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

// Causal building blocks: left-padded convolution, masked attention and its
// incremental form, segment-wise prefix pooling, and a generic recurrent scan.

#pragma once

#include <functional>
#include <optional>
#include <utility>
#include <vector>

#include "swiftnet/tensor.h"

namespace swiftnet::causal {

// Masked scores are set to this value before the softmax.
inline constexpr double kMaskValue = -1e30;

// x [C x T], w [C' x C x k]. Left-pads (k-1)*dilation zeros on time.
Tensor CausalConv(const Tensor& x, const Tensor& w, const std::optional<Tensor>& bias = {},
                  int64_t dilation = 1);

// [T x T] additive mask: 0 where j <= i, kMaskValue where j > i.
Tensor CausalMask(int64_t t);

// q, k, v: [T x d] or [B x T x d]. Row t attends keys 0..t of the same batch
// entry. Scores are scaled by 1/sqrt(d/heads). Differentiable.
Tensor CausalAttention(const Tensor& q, const Tensor& k, const Tensor& v, int heads);

// Keys and values seen so far for one attention sequence.
class KvCache {
 public:
  KvCache(int64_t dim, int heads);

  int64_t length() const { return length_; }
  int64_t dim() const { return dim_; }
  int heads() const { return heads_; }
  size_t bytes() const { return (keys_.size() + values_.size()) * sizeof(double); }
  void Clear();

 private:
  friend std::vector<double> IncrementalAttention(KvCache&, const double*, const double*,
                                                  const double*);
  int64_t dim_;
  int heads_;
  int64_t length_ = 0;
  std::vector<double> keys_, values_;  // [length x dim]
};

// Appends (k_t, v_t) and returns the attention output for query q_t, equal to
// the last row of CausalAttention over the whole prefix.
std::vector<double> IncrementalAttention(KvCache& cache, const double* q_t, const double* k_t,
                                         const double* v_t);

struct PoolSpec {
  int64_t total_len = 1;
  int64_t segments = 1;

  int64_t segment_len() const { return (total_len + segments - 1) / segments; }
  void Validate() const;
};

// y[:, n] = mean of x[:, 0 .. min((n+1)L, T)). Differentiable.
Tensor CausalAvgPool(const Tensor& x, const PoolSpec& spec);

// One recurrent step: (state, x_t [C]) -> (state', y_t [C']).
using StepFn = std::function<std::pair<Tensor, Tensor>(const Tensor& state, const Tensor& x_t)>;

// Left-to-right scan over the columns of x [C x T]. The final state is written
// to `final_state` when given.
Tensor CausalRnnWrap(const StepFn& cell, const Tensor& x, const Tensor& h0,
                     Tensor* final_state = nullptr);

}  // namespace swiftnet::causal
