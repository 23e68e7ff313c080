// Copyright 2026 The swiftnet-cpp Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

// Simple recurrent unit with an elementwise state recurrence:
//
//   f_t = sigmoid(W_f x_t + v_f * c_{t-1} + b_f)
//   r_t = sigmoid(W_r x_t + v_r * c_{t-1} + b_r)
//   c_t = f_t * c_{t-1} + (1 - f_t) * (W x_t)
//   h_t = r_t * c_t + (1 - r_t) * x'_t
//
// where x'_t is x_t when D_in == D_hid and proj x_t otherwise. All matrices
// are stored [D_in x D_hid], so the input transform of a sequence is one
// matmul against their column concatenation.

#pragma once

#include <cstdint>
#include <random>
#include <utility>
#include <vector>

#include "swiftnet/tensor.h"

namespace swiftnet::sru {

enum class Direction { kUni, kBi };

// Which axis a scan runs over. Bidirectional scans over time are rejected.
enum class Axis { kTime, kFreq };

struct SruCell {
  int64_t d_in = 0, d_hid = 0;
  Tensor w, w_f, w_r;          // [D_in x D_hid]
  Tensor v_f, v_r, b_f, b_r;   // [D_hid]
  Tensor proj;                 // [D_in x D_hid], only when D_in != D_hid

  static SruCell Zeros(int64_t d_in, int64_t d_hid);
  // Uniform(-1/sqrt(D_in), 1/sqrt(D_in)) matrices, small gate vectors, zero biases.
  static SruCell Random(int64_t d_in, int64_t d_hid, std::mt19937_64& rng);

  bool has_proj() const { return d_in != d_hid; }
  int64_t param_count() const;
  // Tensors in a fixed order: w, w_f, w_r, v_f, v_r, b_f, b_r[, proj].
  std::vector<Tensor*> tensors();
  void Validate() const;
};

// Batched scan: x [B x L x D_in] -> h [B x L x D_hid], recurrence along L.
// `c0` ([B x D_hid]) defaults to zeros; the last state is written to
// `c_last` when given (detached). Differentiable in x, every cell tensor and c0.
Tensor ScanBatched(const SruCell& cell, const Tensor& x, bool reverse = false,
                   const Tensor* c0 = nullptr, Tensor* c_last = nullptr);

// One step: c_prev [D_hid], x_t [D_in] -> (c_t, h_t).
std::pair<Tensor, Tensor> SruStep(const SruCell& cell, const Tensor& c_prev, const Tensor& x_t);

struct ScanOptions {
  Direction direction = Direction::kUni;
  Axis axis = Axis::kTime;
  // Lets a bidirectional scan run over time. Only for negative controls.
  bool allow_noncausal = false;
};

// x [D_in x T] -> [D_hid x T] (uni) or [2 D_hid x T] (bi: forward then backward).
// `backward_cell` is required for bi scans.
Tensor SruScan(const SruCell& cell, const Tensor& x, const ScanOptions& opt = {},
               const SruCell* backward_cell = nullptr);

// G independent sub-cells over contiguous channel blocks. Sub-cells have dims
// (D_in / G, D_hid / G); bi adds a second set for the reverse direction.
struct GroupedSru {
  int64_t groups = 1;
  Direction direction = Direction::kUni;
  std::vector<SruCell> forward;
  std::vector<SruCell> backward;  // bi only

  static GroupedSru Random(int64_t d_in, int64_t d_hid, int64_t groups, Direction direction,
                           std::mt19937_64& rng);
  int64_t d_in() const { return forward.at(0).d_in * groups; }
  int64_t d_hid() const { return forward.at(0).d_hid * groups; }
  int64_t d_out() const { return direction == Direction::kBi ? 2 * d_hid() : d_hid(); }
  int64_t param_count() const;
};

// x [D_in x T] -> [D_out x T]; output channels are ordered per group, and
// within a group forward before backward.
Tensor GroupedScan(const GroupedSru& g, const Tensor& x, const ScanOptions& opt = {});

// Batched grouped scan over x [B x L x D_in] -> [B x L x D_out], recurrence
// along L, channel layout as in GroupedScan. `c0`/`c_last` hold one
// [B x D_hid / G] state per (group, direction) in the same order.
Tensor GroupedScanBatched(const GroupedSru& g, const Tensor& x, const ScanOptions& opt,
                          const std::vector<Tensor>* c0 = nullptr,
                          std::vector<Tensor>* c_last = nullptr);

// Closed form: G * dirs * (3 a b + 4 b + [a != b] a b) with a = D_in/G, b = D_hid/G.
int64_t SruParamCount(int64_t d_in, int64_t d_hid, int64_t groups, Direction direction);

// Multiply-accumulates per sequence step, same convention as the count above
// (input transform, highway projection and the four gate vectors).
int64_t SruStepMacs(int64_t d_in, int64_t d_hid, int64_t groups, Direction direction);

}  // namespace swiftnet::sru
