// Copyright 2026 The swiftnet-cpp Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

// Differentiable tensor operations. Every op works without a tape; when a
// tape is active and an input is tracked, the op registers its gradient rule.
//
// Layout conventions used throughout the project:
//   1-D feature maps   [channels x time]
//   2-D feature maps   [channels x time x freq]
//   conv weights       [c_out x c_in x k_time (x k_freq)]
//   transposed conv    [c_in x c_out x k_time (x k_freq)]
//   linear weights     [out x in]

#pragma once

#include <optional>
#include <vector>

#include "swiftnet/tensor.h"

namespace swiftnet::ops {

enum class ElementwiseOp { kAdd, kSub, kMul, kDiv, kSqrt, kSigmoid, kTanh, kPRelu };

// Binary ops broadcast numpy-style from the trailing dimension. kPRelu takes
// the slope tensor as `b`; the unary ops ignore it.
Tensor Elementwise(ElementwiseOp op, const Tensor& a, const std::optional<Tensor>& b = {});

Shape BroadcastShape(const Shape& a, const Shape& b);

Tensor Add(const Tensor& a, const Tensor& b);
Tensor Sub(const Tensor& a, const Tensor& b);
Tensor Mul(const Tensor& a, const Tensor& b);
Tensor Div(const Tensor& a, const Tensor& b);
Tensor PRelu(const Tensor& x, const Tensor& alpha);

Tensor Neg(const Tensor& x);
Tensor Scale(const Tensor& x, double s);
Tensor AddScalar(const Tensor& x, double s);
Tensor Sqrt(const Tensor& x);
Tensor Square(const Tensor& x);
Tensor Sigmoid(const Tensor& x);
Tensor Tanh(const Tensor& x);
Tensor Exp(const Tensor& x);
Tensor Log(const Tensor& x);

// Full reduction to shape [1].
Tensor Sum(const Tensor& x);
Tensor Mean(const Tensor& x);
Tensor SumAxis(const Tensor& x, int axis, bool keepdim = false);
// Sums `g` over the dimensions that were broadcast to produce it from `shape`.
Tensor ReduceTo(const Tensor& g, const Shape& shape);

// [.., m, k] x [k, n] or matching batch dims [.., m, k] x [.., k, n].
Tensor MatMul(const Tensor& a, const Tensor& b);
// x[..., in] * w[out x in]^T + bias[out].
Tensor Linear(const Tensor& x, const Tensor& w, const std::optional<Tensor>& bias = {});

Tensor Reshape(const Tensor& x, Shape shape);
Tensor Permute(const Tensor& x, const std::vector<int>& perm);
Tensor Slice(const Tensor& x, int axis, int64_t start, int64_t length);
Tensor Concat(const std::vector<Tensor>& parts, int axis);
Tensor Pad(const Tensor& x, int axis, int64_t before, int64_t after);
Tensor IndexSelect(const Tensor& x, int axis, const std::vector<int64_t>& index);

// Per-spatial-axis geometry; 1-D inputs use only the first entry.
struct ConvSpec {
  std::vector<int64_t> stride{1, 1};
  std::vector<int64_t> pad_before{0, 0};
  std::vector<int64_t> pad_after{0, 0};
  std::vector<int64_t> dilation{1, 1};
};

// x [c_in x L] or [c_in x L1 x L2]; output length per axis
// floor((L + pad_before + pad_after - dilation*(k-1) - 1) / stride) + 1.
Tensor Conv(const Tensor& x, const Tensor& w, const std::optional<Tensor>& bias,
            const ConvSpec& spec = {});

struct TransposedConvSpec {
  std::vector<int64_t> stride{1, 1};
  std::vector<int64_t> trim_before{0, 0};
  std::vector<int64_t> trim_after{0, 0};
};

// Full output length per axis is (L - 1) * stride + k, then trimmed. Trimming
// only the trailing k-1 positions makes output t depend on inputs <= t.
Tensor TransposedConv(const Tensor& x, const Tensor& w, const std::optional<Tensor>& bias,
                      const TransposedConvSpec& spec = {});

// Sliding windows along spatial `axis` (1 or 2) of a [C x ...] tensor. Output
// channel c*kernel + j holds x[c, ..., p*stride + j, ...].
Tensor Unfold(const Tensor& x, int axis, int64_t kernel, int64_t stride = 1);

// Zero mean / unit variance over `axes`, separately for every index of the
// remaining axes.
Tensor Normalize(const Tensor& x, const std::vector<int>& axes, double eps = 1e-5);

// Normalize then affine. `time_axis`, when given, must not be in `axes`.
Tensor NormLayer(const Tensor& x, const Tensor& gain, const Tensor& bias,
                 const std::vector<int>& axes, std::optional<int> time_axis = {},
                 double eps = 1e-5);

// output[i] = x[floor(i * old_len / new_len)] along `axis`.
Tensor InterpNearest(const Tensor& x, int axis, int64_t new_len);
std::vector<int64_t> NearestIndex(int64_t old_len, int64_t new_len);

}  // namespace swiftnet::ops
