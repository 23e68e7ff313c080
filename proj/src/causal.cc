// Copyright 2026 The swiftnet-cpp Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "swiftnet/causal.h"

#include <algorithm>
#include <cmath>

#include "swiftnet/autodiff.h"
#include "swiftnet/ops.h"

namespace swiftnet::causal {
namespace {

// Softmax over row i of causally masked scores for one (batch, head). Writes
// weights p[0..i] and returns nothing for masked entries (they are exactly 0).
void CausalRow(const double* q, const double* k, int64_t i, int64_t stride, int64_t dh,
               double scale, double* p) {
  double mx = -1e300;
  for (int64_t j = 0; j <= i; ++j) {
    double s = 0.0;
    const double* kj = k + j * stride;
    for (int64_t c = 0; c < dh; ++c) s += q[c] * kj[c];
    p[j] = s * scale;
    mx = std::max(mx, p[j]);
  }
  double z = 0.0;
  for (int64_t j = 0; j <= i; ++j) {
    p[j] = std::exp(p[j] - mx);
    z += p[j];
  }
  for (int64_t j = 0; j <= i; ++j) p[j] /= z;
}

}  // namespace

Tensor CausalConv(const Tensor& x, const Tensor& w, const std::optional<Tensor>& bias,
                  int64_t dilation) {
  if (x.rank() != 2 || w.rank() != 3)
    throw ShapeError("causal_conv expects x [C x T] and w [C' x C x k], got " +
                     ShapeString(x.shape()) + " and " + ShapeString(w.shape()));
  if (dilation < 1) throw ShapeError("dilation must be positive");
  ops::ConvSpec spec;
  spec.pad_before = {(w.dim(2) - 1) * dilation};
  spec.pad_after = {0};
  spec.stride = {1};
  spec.dilation = {dilation};
  return ops::Conv(x, w, bias, spec);
}

Tensor CausalMask(int64_t t) {
  if (t < 1) throw ShapeError("mask size must be positive");
  Tensor m({t, t});
  for (int64_t i = 0; i < t; ++i)
    for (int64_t j = i + 1; j < t; ++j) m.mutable_ptr()[i * t + j] = kMaskValue;
  return m;
}

Tensor CausalAttention(const Tensor& q, const Tensor& k, const Tensor& v, int heads) {
  if (q.shape() != k.shape() || q.shape() != v.shape() || (q.rank() != 2 && q.rank() != 3))
    throw ShapeError("causal_attention expects equal [T x d] or [B x T x d] q/k/v, got " +
                     ShapeString(q.shape()) + ", " + ShapeString(k.shape()) + ", " +
                     ShapeString(v.shape()));
  const int64_t d = q.dim(-1), t = q.dim(-2), batch = q.numel() / (t * d);
  if (heads < 1 || d % heads != 0)
    throw ShapeError("embedding " + std::to_string(d) + " not divisible by " +
                     std::to_string(heads) + " heads");
  const int64_t dh = d / heads;
  const double scale = 1.0 / std::sqrt(static_cast<double>(dh));

  Tensor y(q.shape());
  std::vector<double> p(t);
  for (int64_t b = 0; b < batch; ++b) {
    const int64_t base = b * t * d;
    for (int h = 0; h < heads; ++h) {
      const double* qb = q.ptr() + base + h * dh;
      const double* kb = k.ptr() + base + h * dh;
      const double* vb = v.ptr() + base + h * dh;
      double* yb = y.mutable_ptr() + base + h * dh;
      for (int64_t i = 0; i < t; ++i) {
        CausalRow(qb + i * d, kb, i, d, dh, scale, p.data());
        double* yi = yb + i * d;
        for (int64_t j = 0; j <= i; ++j) {
          const double* vj = vb + j * d;
          for (int64_t c = 0; c < dh; ++c) yi[c] += p[j] * vj[c];
        }
      }
    }
  }
  if (!autodiff::NeedsRecord({&q, &k, &v})) return y;

  return autodiff::Record(y, {q, k, v}, [q = q.detach(), k = k.detach(), v = v.detach(), batch,
                                         t, d, dh, heads, scale](const Tensor& g) {
    Tensor gq(q.shape()), gk(q.shape()), gv(q.shape());
    std::vector<double> p(t), dp(t);
    for (int64_t b = 0; b < batch; ++b) {
      const int64_t base = b * t * d;
      for (int h = 0; h < heads; ++h) {
        const int64_t off = base + h * dh;
        const double* qb = q.ptr() + off;
        const double* kb = k.ptr() + off;
        const double* vb = v.ptr() + off;
        const double* gb = g.ptr() + off;
        double* gqb = gq.mutable_ptr() + off;
        double* gkb = gk.mutable_ptr() + off;
        double* gvb = gv.mutable_ptr() + off;
        for (int64_t i = 0; i < t; ++i) {
          CausalRow(qb + i * d, kb, i, d, dh, scale, p.data());
          const double* gi = gb + i * d;
          double dot = 0.0;
          for (int64_t j = 0; j <= i; ++j) {
            const double* vj = vb + j * d;
            double s = 0.0;
            for (int64_t c = 0; c < dh; ++c) {
              s += gi[c] * vj[c];
              gvb[j * d + c] += p[j] * gi[c];
            }
            dp[j] = s;
            dot += s * p[j];
          }
          for (int64_t j = 0; j <= i; ++j) {
            const double ds = p[j] * (dp[j] - dot) * scale;
            const double* kj = kb + j * d;
            const double* qi = qb + i * d;
            for (int64_t c = 0; c < dh; ++c) {
              gqb[i * d + c] += ds * kj[c];
              gkb[j * d + c] += ds * qi[c];
            }
          }
        }
      }
    }
    return std::vector<Tensor>{gq, gk, gv};
  }, "causal_attention");
}

KvCache::KvCache(int64_t dim, int heads) : dim_(dim), heads_(heads) {
  if (heads < 1 || dim % heads != 0)
    throw ShapeError("embedding " + std::to_string(dim) + " not divisible by " +
                     std::to_string(heads) + " heads");
}

void KvCache::Clear() {
  keys_.clear();
  values_.clear();
  length_ = 0;
}

std::vector<double> IncrementalAttention(KvCache& cache, const double* q_t, const double* k_t,
                                         const double* v_t) {
  const int64_t d = cache.dim_;
  if (static_cast<int64_t>(cache.keys_.size()) != cache.length_ * d)
    throw ShapeError("kv cache length mismatch");
  cache.keys_.insert(cache.keys_.end(), k_t, k_t + d);
  cache.values_.insert(cache.values_.end(), v_t, v_t + d);
  const int64_t len = ++cache.length_;
  const int64_t dh = d / cache.heads_;
  const double scale = 1.0 / std::sqrt(static_cast<double>(dh));
  std::vector<double> y(d, 0.0), p(len);
  for (int h = 0; h < cache.heads_; ++h) {
    CausalRow(q_t + h * dh, cache.keys_.data() + h * dh, len - 1, d, dh, scale, p.data());
    for (int64_t j = 0; j < len; ++j) {
      const double* vj = cache.values_.data() + j * d + h * dh;
      for (int64_t c = 0; c < dh; ++c) y[h * dh + c] += p[j] * vj[c];
    }
  }
  return y;
}

void PoolSpec::Validate() const {
  if (total_len < 1 || segments < 1) throw ShapeError("pool spec needs positive T and N");
  if (segments * segment_len() < total_len) throw ShapeError("pool segments do not cover T");
}

Tensor CausalAvgPool(const Tensor& x, const PoolSpec& spec) {
  spec.Validate();
  if (x.rank() != 2 || x.dim(1) != spec.total_len)
    throw ShapeError("causal_avg_pool expects [C x " + std::to_string(spec.total_len) +
                     "], got " + ShapeString(x.shape()));
  const int64_t c = x.dim(0), t = spec.total_len, n = spec.segments, l = spec.segment_len();
  std::vector<int64_t> ends(n);
  for (int64_t s = 0; s < n; ++s) ends[s] = std::min((s + 1) * l, t);
  // Running prefix sum divided by the prefix length.
  Tensor y({c, n});
  for (int64_t ch = 0; ch < c; ++ch) {
    const double* row = x.ptr() + ch * t;
    double sum = 0;
    int64_t i = 0;
    for (int64_t s = 0; s < n; ++s) {
      for (; i < ends[s]; ++i) sum += row[i];
      y.mutable_ptr()[ch * n + s] = sum / static_cast<double>(ends[s]);
    }
  }
  if (!autodiff::NeedsRecord({&x})) return y;
  return autodiff::Record(y, {x}, [c, t, n, ends](const Tensor& gy) {
    Tensor gx({c, t});
    for (int64_t ch = 0; ch < c; ++ch) {
      // Element i receives g_s / end_s from every segment whose prefix covers it.
      double acc = 0;
      int64_t i = t;
      for (int64_t s = n - 1; s >= 0; --s) {
        const int64_t lo = s > 0 ? ends[s - 1] : 0;
        acc += gy.ptr()[ch * n + s] / static_cast<double>(ends[s]);
        for (i = std::min(i, ends[s]); i > lo; --i) gx.mutable_ptr()[ch * t + i - 1] = acc;
      }
    }
    return std::vector<Tensor>{gx};
  }, "causal_avg_pool");
}

Tensor CausalRnnWrap(const StepFn& cell, const Tensor& x, const Tensor& h0, Tensor* final_state) {
  if (x.rank() != 2) throw ShapeError("causal_rnn_wrap expects [C x T], got " +
                                      ShapeString(x.shape()));
  const int64_t c = x.dim(0), t = x.dim(1);
  Tensor xt = ops::Permute(x, {1, 0});
  Tensor state = h0;
  std::vector<Tensor> outputs;
  outputs.reserve(t);
  for (int64_t i = 0; i < t; ++i) {
    Tensor step = ops::Reshape(ops::Slice(xt, 0, i, 1), {c});
    auto [next, y] = cell(state, step);
    if (next.shape() != state.shape())
      throw ShapeError("cell changed state shape from " + ShapeString(state.shape()) + " to " +
                       ShapeString(next.shape()));
    state = next;
    outputs.push_back(ops::Reshape(y, {1, y.numel()}));
  }
  if (final_state) *final_state = state;
  return ops::Permute(ops::Concat(outputs, 0), {1, 0});
}

}  // namespace swiftnet::causal
