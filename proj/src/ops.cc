// Copyright 2026 The swiftnet-cpp Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "swiftnet/ops.h"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <numeric>

#include "swiftnet/autodiff.h"

namespace swiftnet::ops {
namespace {

using autodiff::NeedsRecord;
using autodiff::Record;
using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapMat = Eigen::Map<RowMat>;
using CMapMat = Eigen::Map<const RowMat>;

int NormAxis(int axis, int rank) {
  if (axis < 0) axis += rank;
  if (axis < 0 || axis >= rank)
    throw ShapeError("axis " + std::to_string(axis) + " out of range for rank " +
                     std::to_string(rank));
  return axis;
}

// Strides of `in` viewed at rank r, zero on broadcast dimensions.
Shape BroadcastStrides(const Shape& in, size_t r) {
  Shape padded(r, 1);
  std::copy(in.begin(), in.end(), padded.begin() + (r - in.size()));
  Shape strides = ContiguousStrides(padded);
  for (size_t i = 0; i < r; ++i)
    if (padded[i] == 1) strides[i] = 0;
  return strides;
}

// Calls f(i, ia, ib) for every flat index i of `out`, with the matching flat
// offsets into tensors of shape `as` and `bs` broadcast to `out`.
template <class F>
void ForEachBroadcast(const Shape& out, const Shape& as, const Shape& bs, F&& f) {
  const size_t r = out.size();
  if (r == 0) {
    f(0, 0, 0);
    return;
  }
  const Shape sa = BroadcastStrides(as, r);
  const Shape sb = BroadcastStrides(bs, r);
  const int64_t inner = out[r - 1];
  const int64_t outer = NumElements(out) / inner;
  const int64_t ia_step = sa[r - 1], ib_step = sb[r - 1];
  std::vector<int64_t> counter(r, 0);
  int64_t oa = 0, ob = 0, i = 0;
  for (int64_t o = 0; o < outer; ++o) {
    for (int64_t j = 0; j < inner; ++j) f(i++, oa + j * ia_step, ob + j * ib_step);
    for (int d = static_cast<int>(r) - 2; d >= 0; --d) {
      oa += sa[d];
      ob += sb[d];
      if (++counter[d] < out[d]) break;
      oa -= sa[d] * out[d];
      ob -= sb[d] * out[d];
      counter[d] = 0;
    }
  }
}

template <class F>
Tensor Map(const Tensor& x, F&& f) {
  Tensor y(x.shape());
  const double* in = x.ptr();
  double* out = y.mutable_ptr();
  const int64_t n = x.numel();
  for (int64_t i = 0; i < n; ++i) out[i] = f(in[i]);
  return y;
}

template <class F>
Tensor Zip(const Tensor& a, const Tensor& b, F&& f) {
  if (a.shape() == b.shape()) {
    Tensor y(a.shape());
    const double* pa = a.ptr();
    const double* pb = b.ptr();
    double* out = y.mutable_ptr();
    const int64_t n = a.numel();
    for (int64_t i = 0; i < n; ++i) out[i] = f(pa[i], pb[i]);
    return y;
  }
  Tensor y(BroadcastShape(a.shape(), b.shape()));
  const double* pa = a.ptr();
  const double* pb = b.ptr();
  double* out = y.mutable_ptr();
  ForEachBroadcast(y.shape(), a.shape(), b.shape(),
                   [&](int64_t i, int64_t ia, int64_t ib) { out[i] = f(pa[ia], pb[ib]); });
  return y;
}

// Geometry of one im2col lowering over two spatial axes.
struct Geometry {
  int64_t channels, l1, l2;  // input
  int64_t k1, k2, s1, s2, pb1, pb2, d1, d2;
  int64_t o1, o2;  // output
};

// col[(c, j1, j2), (p1, p2)] = x[c, p1*s1 - pb1 + j1*d1, p2*s2 - pb2 + j2*d2], zero outside.
void Im2Col(const double* x, const Geometry& g, double* col) {
  const int64_t p = g.o1 * g.o2;
  for (int64_t c = 0; c < g.channels; ++c) {
    for (int64_t j1 = 0; j1 < g.k1; ++j1) {
      for (int64_t j2 = 0; j2 < g.k2; ++j2) {
        double* row = col + ((c * g.k1 + j1) * g.k2 + j2) * p;
        for (int64_t p1 = 0; p1 < g.o1; ++p1) {
          const int64_t i1 = p1 * g.s1 - g.pb1 + j1 * g.d1;
          double* dst = row + p1 * g.o2;
          if (i1 < 0 || i1 >= g.l1) {
            std::fill(dst, dst + g.o2, 0.0);
            continue;
          }
          const double* src = x + (c * g.l1 + i1) * g.l2;
          for (int64_t p2 = 0; p2 < g.o2; ++p2) {
            const int64_t i2 = p2 * g.s2 - g.pb2 + j2 * g.d2;
            dst[p2] = (i2 >= 0 && i2 < g.l2) ? src[i2] : 0.0;
          }
        }
      }
    }
  }
}

// Adjoint of Im2Col: scatter-add columns back into x (which must be zeroed).
void Col2Im(const double* col, const Geometry& g, double* x) {
  const int64_t p = g.o1 * g.o2;
  for (int64_t c = 0; c < g.channels; ++c) {
    for (int64_t j1 = 0; j1 < g.k1; ++j1) {
      for (int64_t j2 = 0; j2 < g.k2; ++j2) {
        const double* row = col + ((c * g.k1 + j1) * g.k2 + j2) * p;
        for (int64_t p1 = 0; p1 < g.o1; ++p1) {
          const int64_t i1 = p1 * g.s1 - g.pb1 + j1 * g.d1;
          if (i1 < 0 || i1 >= g.l1) continue;
          const double* src = row + p1 * g.o2;
          double* dst = x + (c * g.l1 + i1) * g.l2;
          for (int64_t p2 = 0; p2 < g.o2; ++p2) {
            const int64_t i2 = p2 * g.s2 - g.pb2 + j2 * g.d2;
            if (i2 >= 0 && i2 < g.l2) dst[i2] += src[p2];
          }
        }
      }
    }
  }
}

bool IsPointwise(const Geometry& g) {
  return g.k1 == 1 && g.k2 == 1 && g.s1 == 1 && g.s2 == 1 && g.pb1 == 0 && g.pb2 == 0 &&
         g.o1 == g.l1 && g.o2 == g.l2;
}

Tensor Lower(const Tensor& x, const Geometry& g) {
  if (IsPointwise(g)) return x;
  Tensor col({g.channels * g.k1 * g.k2, g.o1 * g.o2});
  Im2Col(x.ptr(), g, col.mutable_ptr());
  return col;
}

Tensor Raise(const Tensor& col, const Geometry& g, const Shape& x_shape) {
  if (IsPointwise(g)) return col.view(x_shape);
  Tensor x(x_shape);
  Col2Im(col.ptr(), g, x.mutable_ptr());
  return x;
}

int64_t SpecAt(const std::vector<int64_t>& v, size_t i, int64_t fallback) {
  return i < v.size() ? v[i] : fallback;
}

// Plain left-to-right sum. Eigen's vectorized reductions peel on the runtime
// address, so equal inputs at different addresses could round differently.
double SeqSum(const double* p, int64_t n) {
  double s = 0;
  for (int64_t i = 0; i < n; ++i) s += p[i];
  return s;
}

// Sum over the channel-independent spatial positions: [C x P] -> [C].
Tensor RowSums(const Tensor& g, int64_t rows) {
  const int64_t cols = g.numel() / rows;
  Tensor out({rows});
  for (int64_t r = 0; r < rows; ++r) out.mutable_ptr()[r] = SeqSum(g.ptr() + r * cols, cols);
  return out;
}

}  // namespace

Shape BroadcastShape(const Shape& a, const Shape& b) {
  const size_t r = std::max(a.size(), b.size());
  Shape out(r, 1);
  for (size_t i = 0; i < r; ++i) {
    const int64_t da = i < r - a.size() ? 1 : a[i - (r - a.size())];
    const int64_t db = i < r - b.size() ? 1 : b[i - (r - b.size())];
    if (da != db && da != 1 && db != 1)
      throw ShapeError("cannot broadcast " + ShapeString(a) + " with " + ShapeString(b));
    out[i] = std::max(da, db);
  }
  return out;
}

Tensor ReduceTo(const Tensor& g, const Shape& shape) {
  if (g.shape() == shape) return g;
  if (NumElements(shape) == g.numel()) return Reshape(g, shape);
  Tensor r(shape);
  double* out = r.mutable_ptr();
  const double* pg = g.ptr();
  ForEachBroadcast(g.shape(), shape, g.shape(),
                   [&](int64_t i, int64_t ia, int64_t) { out[ia] += pg[i]; });
  return r;
}

Tensor Elementwise(ElementwiseOp op, const Tensor& a, const std::optional<Tensor>& b) {
  auto need_b = [&]() -> const Tensor& {
    if (!b || !b->defined()) throw ShapeError("binary elementwise op needs a second operand");
    return *b;
  };
  switch (op) {
    case ElementwiseOp::kAdd: return Add(a, need_b());
    case ElementwiseOp::kSub: return Sub(a, need_b());
    case ElementwiseOp::kMul: return Mul(a, need_b());
    case ElementwiseOp::kDiv: return Div(a, need_b());
    case ElementwiseOp::kPRelu: return PRelu(a, need_b());
    case ElementwiseOp::kSqrt: return Sqrt(a);
    case ElementwiseOp::kSigmoid: return Sigmoid(a);
    case ElementwiseOp::kTanh: return Tanh(a);
  }
  throw Error("unknown elementwise op");
}

Tensor Add(const Tensor& a, const Tensor& b) {
  Tensor y = Zip(a, b, [](double u, double v) { return u + v; });
  if (!NeedsRecord({&a, &b})) return y;
  return Record(y, {a, b}, [sa = a.shape(), sb = b.shape()](const Tensor& g) {
    return std::vector<Tensor>{ReduceTo(g, sa), ReduceTo(g, sb)};
  }, "add");
}

Tensor Sub(const Tensor& a, const Tensor& b) {
  Tensor y = Zip(a, b, [](double u, double v) { return u - v; });
  if (!NeedsRecord({&a, &b})) return y;
  return Record(y, {a, b}, [sa = a.shape(), sb = b.shape()](const Tensor& g) {
    return std::vector<Tensor>{ReduceTo(g, sa), Neg(ReduceTo(g, sb))};
  }, "sub");
}

Tensor Mul(const Tensor& a, const Tensor& b) {
  Tensor y = Zip(a, b, [](double u, double v) { return u * v; });
  if (!NeedsRecord({&a, &b})) return y;
  return Record(y, {a, b}, [a = a.detach(), b = b.detach()](const Tensor& g) {
    return std::vector<Tensor>{ReduceTo(Mul(g, b), a.shape()), ReduceTo(Mul(g, a), b.shape())};
  }, "mul");
}

Tensor Div(const Tensor& a, const Tensor& b) {
  Tensor y = Zip(a, b, [](double u, double v) { return u / v; });
  if (!NeedsRecord({&a, &b})) return y;
  return Record(y, {a, b}, [y = y.detach(), b = b.detach(), sa = a.shape()](const Tensor& g) {
    Tensor ga = Div(g, b);
    return std::vector<Tensor>{ReduceTo(ga, sa), Neg(ReduceTo(Mul(ga, y), b.shape()))};
  }, "div");
}

Tensor PRelu(const Tensor& x, const Tensor& alpha) {
  Tensor y = Zip(x, alpha, [](double u, double a) { return u > 0 ? u : a * u; });
  if (!NeedsRecord({&x, &alpha})) return y;
  return Record(y, {x, alpha}, [x = x.detach(), alpha = alpha.detach()](const Tensor& g) {
    Tensor slope = Zip(x, alpha, [](double u, double a) { return u > 0 ? 1.0 : a; });
    Tensor neg = Map(x, [](double u) { return u > 0 ? 0.0 : u; });
    return std::vector<Tensor>{Mul(g, slope), ReduceTo(Mul(g, neg), alpha.shape())};
  }, "prelu");
}

Tensor Neg(const Tensor& x) { return Scale(x, -1.0); }

Tensor Scale(const Tensor& x, double s) {
  Tensor y = Map(x, [s](double u) { return u * s; });
  if (!NeedsRecord({&x})) return y;
  return Record(y, {x}, [s](const Tensor& g) { return std::vector<Tensor>{Scale(g, s)}; },
                "scale");
}

Tensor AddScalar(const Tensor& x, double s) {
  Tensor y = Map(x, [s](double u) { return u + s; });
  if (!NeedsRecord({&x})) return y;
  return Record(y, {x}, [](const Tensor& g) { return std::vector<Tensor>{g}; }, "add_scalar");
}

Tensor Sqrt(const Tensor& x) {
  Tensor y = Map(x, [](double u) { return std::sqrt(u); });
  if (!NeedsRecord({&x})) return y;
  return Record(y, {x}, [y = y.detach()](const Tensor& g) {
    return std::vector<Tensor>{Zip(g, y, [](double d, double v) { return 0.5 * d / v; })};
  }, "sqrt");
}

Tensor Square(const Tensor& x) {
  Tensor y = Map(x, [](double u) { return u * u; });
  if (!NeedsRecord({&x})) return y;
  return Record(y, {x}, [x = x.detach()](const Tensor& g) {
    return std::vector<Tensor>{Zip(g, x, [](double d, double v) { return 2.0 * d * v; })};
  }, "square");
}

Tensor Sigmoid(const Tensor& x) {
  Tensor y = Map(x, [](double u) { return 1.0 / (1.0 + std::exp(-u)); });
  if (!NeedsRecord({&x})) return y;
  return Record(y, {x}, [y = y.detach()](const Tensor& g) {
    return std::vector<Tensor>{Zip(g, y, [](double d, double v) { return d * v * (1.0 - v); })};
  }, "sigmoid");
}

Tensor Tanh(const Tensor& x) {
  Tensor y = Map(x, [](double u) { return std::tanh(u); });
  if (!NeedsRecord({&x})) return y;
  return Record(y, {x}, [y = y.detach()](const Tensor& g) {
    return std::vector<Tensor>{Zip(g, y, [](double d, double v) { return d * (1.0 - v * v); })};
  }, "tanh");
}

Tensor Exp(const Tensor& x) {
  Tensor y = Map(x, [](double u) { return std::exp(u); });
  if (!NeedsRecord({&x})) return y;
  return Record(y, {x}, [y = y.detach()](const Tensor& g) {
    return std::vector<Tensor>{Mul(g, y)};
  }, "exp");
}

Tensor Log(const Tensor& x) {
  Tensor y = Map(x, [](double u) { return std::log(u); });
  if (!NeedsRecord({&x})) return y;
  return Record(y, {x}, [x = x.detach()](const Tensor& g) {
    return std::vector<Tensor>{Div(g, x)};
  }, "log");
}

Tensor Sum(const Tensor& x) {
  const double s = SeqSum(x.ptr(), x.numel());
  Tensor y = Tensor::Scalar(s);
  if (!NeedsRecord({&x})) return y;
  return Record(y, {x}, [shape = x.shape()](const Tensor& g) {
    return std::vector<Tensor>{Tensor::Full(shape, g.item())};
  }, "sum");
}

Tensor Mean(const Tensor& x) { return Scale(Sum(x), 1.0 / static_cast<double>(x.numel())); }

Tensor SumAxis(const Tensor& x, int axis, bool keepdim) {
  axis = NormAxis(axis, x.rank());
  Shape kept = x.shape();
  kept[axis] = 1;
  Tensor y = ReduceTo(x.detach(), kept);
  if (!keepdim && x.rank() > 1) {
    Shape squeezed = x.shape();
    squeezed.erase(squeezed.begin() + axis);
    y = Reshape(y, squeezed);
  }
  if (!NeedsRecord({&x})) return y;
  return Record(y, {x}, [kept, shape = x.shape()](const Tensor& g) {
    Tensor gk = Reshape(g, kept);
    return std::vector<Tensor>{Add(Tensor::Zeros(shape), gk)};
  }, "sum_axis");
}

Tensor MatMul(const Tensor& a, const Tensor& b) {
  if (a.rank() < 2 || b.rank() < 2)
    throw ShapeError("matmul needs rank >= 2 operands, got " + ShapeString(a.shape()) + " and " +
                     ShapeString(b.shape()));
  const int64_t m = a.dim(-2), k = a.dim(-1), n = b.dim(-1);
  if (b.dim(-2) != k)
    throw ShapeError("matmul inner dimension mismatch " + ShapeString(a.shape()) + " x " +
                     ShapeString(b.shape()));
  const int64_t batch = a.numel() / (m * k);
  const bool shared_b = b.rank() == 2;
  if (!shared_b) {
    if (b.numel() / (k * n) != batch || b.rank() != a.rank() ||
        !std::equal(a.shape().begin(), a.shape().end() - 2, b.shape().begin()))
      throw ShapeError("matmul batch dimensions differ " + ShapeString(a.shape()) + " x " +
                       ShapeString(b.shape()));
  }
  Shape out_shape = a.shape();
  out_shape.back() = n;
  Tensor y(out_shape);
  if (shared_b) {
    MapMat(y.mutable_ptr(), batch * m, n).noalias() =
        CMapMat(a.ptr(), batch * m, k) * CMapMat(b.ptr(), k, n);
  } else {
    for (int64_t i = 0; i < batch; ++i) {
      MapMat(y.mutable_ptr() + i * m * n, m, n).noalias() =
          CMapMat(a.ptr() + i * m * k, m, k) * CMapMat(b.ptr() + i * k * n, k, n);
    }
  }
  if (!NeedsRecord({&a, &b})) return y;
  return Record(y, {a, b}, [a = a.detach(), b = b.detach(), m, k, n, batch,
                            shared_b](const Tensor& g) {
    Tensor ga(a.shape()), gb(b.shape());
    if (shared_b) {
      MapMat(ga.mutable_ptr(), batch * m, k).noalias() =
          CMapMat(g.ptr(), batch * m, n) * CMapMat(b.ptr(), k, n).transpose();
      MapMat(gb.mutable_ptr(), k, n).noalias() =
          CMapMat(a.ptr(), batch * m, k).transpose() * CMapMat(g.ptr(), batch * m, n);
    } else {
      for (int64_t i = 0; i < batch; ++i) {
        MapMat(ga.mutable_ptr() + i * m * k, m, k).noalias() =
            CMapMat(g.ptr() + i * m * n, m, n) * CMapMat(b.ptr() + i * k * n, k, n).transpose();
        MapMat(gb.mutable_ptr() + i * k * n, k, n).noalias() =
            CMapMat(a.ptr() + i * m * k, m, k).transpose() * CMapMat(g.ptr() + i * m * n, m, n);
      }
    }
    return std::vector<Tensor>{ga, gb};
  }, "matmul");
}

Tensor Linear(const Tensor& x, const Tensor& w, const std::optional<Tensor>& bias) {
  if (w.rank() != 2 || x.dim(-1) != w.dim(1))
    throw ShapeError("linear weight " + ShapeString(w.shape()) + " does not match input " +
                     ShapeString(x.shape()));
  const int64_t in = w.dim(1), out = w.dim(0), rows = x.numel() / in;
  const bool has_bias = bias && bias->defined();
  if (has_bias && bias->numel() != out)
    throw ShapeError("linear bias " + ShapeString(bias->shape()) + " for " +
                     std::to_string(out) + " outputs");
  Shape out_shape = x.shape();
  out_shape.back() = out;
  Tensor y(out_shape);
  MapMat ym(y.mutable_ptr(), rows, out);
  ym.noalias() = CMapMat(x.ptr(), rows, in) * CMapMat(w.ptr(), out, in).transpose();
  if (has_bias) ym.rowwise() += Eigen::Map<const Eigen::RowVectorXd>(bias->ptr(), out);

  std::vector<Tensor> inputs{x, w};
  if (has_bias) inputs.push_back(*bias);
  if (!NeedsRecord(inputs)) return y;
  return Record(y, inputs, [x = x.detach(), w = w.detach(), rows, in, out,
                            bias_shape = has_bias ? bias->shape() : Shape{}](const Tensor& g) {
    Tensor gx(x.shape()), gw(w.shape());
    CMapMat gm(g.ptr(), rows, out);
    MapMat(gx.mutable_ptr(), rows, in).noalias() = gm * CMapMat(w.ptr(), out, in);
    MapMat(gw.mutable_ptr(), out, in).noalias() = gm.transpose() * CMapMat(x.ptr(), rows, in);
    std::vector<Tensor> grads{gx, gw};
    if (!bias_shape.empty()) {
      Tensor gb(bias_shape);
      for (int64_t r = 0; r < rows; ++r)
        for (int64_t o = 0; o < out; ++o) gb.mutable_ptr()[o] += g.ptr()[r * out + o];
      grads.push_back(gb);
    }
    return grads;
  }, "linear");
}

Tensor Reshape(const Tensor& x, Shape shape) {
  Tensor y = x.view(std::move(shape));
  if (!NeedsRecord({&x})) return y;
  return Record(y, {x}, [shape = x.shape()](const Tensor& g) {
    return std::vector<Tensor>{g.view(shape)};
  }, "reshape");
}

Tensor Permute(const Tensor& x, const std::vector<int>& perm) {
  const int r = x.rank();
  if (static_cast<int>(perm.size()) != r)
    throw ShapeError("permutation rank mismatch for " + ShapeString(x.shape()));
  std::vector<int> inverse(r, -1);
  for (int i = 0; i < r; ++i) {
    const int p = NormAxis(perm[i], r);
    if (inverse[p] != -1) throw ShapeError("repeated axis in permutation");
    inverse[p] = i;
  }
  bool identity = true;
  for (int i = 0; i < r; ++i) identity = identity && perm[i] == i;
  if (identity) return x;

  Shape out_shape(r);
  const Shape in_strides = x.strides();
  Shape src_strides(r);
  for (int i = 0; i < r; ++i) {
    out_shape[i] = x.shape()[perm[i]];
    src_strides[i] = in_strides[perm[i]];
  }
  Tensor y(out_shape);
  const double* in = x.ptr();
  double* out = y.mutable_ptr();
  std::vector<int64_t> counter(r, 0);
  int64_t src = 0;
  const int64_t n = y.numel();
  const int64_t inner = out_shape[r - 1], inner_stride = src_strides[r - 1];
  for (int64_t i = 0; i < n; i += inner) {
    for (int64_t j = 0; j < inner; ++j) out[i + j] = in[src + j * inner_stride];
    for (int d = r - 2; d >= 0; --d) {
      src += src_strides[d];
      if (++counter[d] < out_shape[d]) break;
      src -= src_strides[d] * out_shape[d];
      counter[d] = 0;
    }
  }
  if (!NeedsRecord({&x})) return y;
  return Record(y, {x}, [inverse](const Tensor& g) {
    return std::vector<Tensor>{Permute(g, inverse)};
  }, "permute");
}

namespace {

// Splits a shape around `axis` into (outer, axis length, inner).
void AxisBlocks(const Shape& s, int axis, int64_t& outer, int64_t& inner) {
  outer = 1;
  inner = 1;
  for (int i = 0; i < axis; ++i) outer *= s[i];
  for (size_t i = axis + 1; i < s.size(); ++i) inner *= s[i];
}

}  // namespace

Tensor Slice(const Tensor& x, int axis, int64_t start, int64_t length) {
  axis = NormAxis(axis, x.rank());
  const int64_t len = x.shape()[axis];
  if (start < 0 || length < 1 || start + length > len)
    throw ShapeError("slice [" + std::to_string(start) + ", " + std::to_string(start + length) +
                     ") out of range for axis " + std::to_string(axis) + " of " +
                     ShapeString(x.shape()));
  if (start == 0 && length == len) return x;
  int64_t outer, inner;
  AxisBlocks(x.shape(), axis, outer, inner);
  Shape out_shape = x.shape();
  out_shape[axis] = length;
  Tensor y(out_shape);
  for (int64_t o = 0; o < outer; ++o) {
    const double* src = x.ptr() + (o * len + start) * inner;
    std::copy(src, src + length * inner, y.mutable_ptr() + o * length * inner);
  }
  if (!NeedsRecord({&x})) return y;
  return Record(y, {x}, [axis, start, after = len - start - length](const Tensor& g) {
    return std::vector<Tensor>{Pad(g, axis, start, after)};
  }, "slice");
}

Tensor Pad(const Tensor& x, int axis, int64_t before, int64_t after) {
  axis = NormAxis(axis, x.rank());
  if (before < 0 || after < 0) throw ShapeError("negative padding");
  if (before == 0 && after == 0) return x;
  const int64_t len = x.shape()[axis];
  int64_t outer, inner;
  AxisBlocks(x.shape(), axis, outer, inner);
  Shape out_shape = x.shape();
  out_shape[axis] = len + before + after;
  Tensor y(out_shape);
  for (int64_t o = 0; o < outer; ++o) {
    const double* src = x.ptr() + o * len * inner;
    std::copy(src, src + len * inner,
              y.mutable_ptr() + (o * out_shape[axis] + before) * inner);
  }
  if (!NeedsRecord({&x})) return y;
  return Record(y, {x}, [axis, before, len](const Tensor& g) {
    return std::vector<Tensor>{Slice(g, axis, before, len)};
  }, "pad");
}

Tensor Concat(const std::vector<Tensor>& parts, int axis) {
  if (parts.empty()) throw ShapeError("concat of zero tensors");
  axis = NormAxis(axis, parts[0].rank());
  if (parts.size() == 1) return parts[0];
  Shape out_shape = parts[0].shape();
  out_shape[axis] = 0;
  std::vector<int64_t> lengths;
  for (const Tensor& p : parts) {
    Shape s = p.shape();
    if (static_cast<int>(s.size()) != static_cast<int>(out_shape.size()))
      throw ShapeError("concat rank mismatch " + ShapeString(parts[0].shape()) + " vs " +
                       ShapeString(s));
    for (size_t i = 0; i < s.size(); ++i) {
      if (static_cast<int>(i) != axis && s[i] != parts[0].shape()[i])
        throw ShapeError("concat shape mismatch " + ShapeString(parts[0].shape()) + " vs " +
                         ShapeString(s));
    }
    lengths.push_back(s[axis]);
    out_shape[axis] += s[axis];
  }
  int64_t outer, inner;
  AxisBlocks(out_shape, axis, outer, inner);
  Tensor y(out_shape);
  int64_t offset = 0;
  for (size_t k = 0; k < parts.size(); ++k) {
    const int64_t block = lengths[k] * inner;
    for (int64_t o = 0; o < outer; ++o) {
      const double* src = parts[k].ptr() + o * block;
      std::copy(src, src + block, y.mutable_ptr() + (o * out_shape[axis] + offset) * inner);
    }
    offset += lengths[k];
  }
  if (!NeedsRecord(parts)) return y;
  return Record(y, parts, [axis, lengths](const Tensor& g) {
    std::vector<Tensor> grads;
    int64_t start = 0;
    for (int64_t len : lengths) {
      grads.push_back(Slice(g, axis, start, len));
      start += len;
    }
    return grads;
  }, "concat");
}

Tensor IndexSelect(const Tensor& x, int axis, const std::vector<int64_t>& index) {
  axis = NormAxis(axis, x.rank());
  const int64_t len = x.shape()[axis];
  if (index.empty()) throw ShapeError("index_select with empty index");
  for (int64_t i : index)
    if (i < 0 || i >= len) throw ShapeError("index " + std::to_string(i) + " out of range");
  int64_t outer, inner;
  AxisBlocks(x.shape(), axis, outer, inner);
  Shape out_shape = x.shape();
  const int64_t n = static_cast<int64_t>(index.size());
  out_shape[axis] = n;
  Tensor y(out_shape);
  for (int64_t o = 0; o < outer; ++o) {
    for (int64_t k = 0; k < n; ++k) {
      const double* src = x.ptr() + (o * len + index[k]) * inner;
      std::copy(src, src + inner, y.mutable_ptr() + (o * n + k) * inner);
    }
  }
  if (!NeedsRecord({&x})) return y;
  return Record(y, {x}, [axis, index, shape = x.shape(), outer, inner, len, n](const Tensor& g) {
    Tensor gx(shape);
    for (int64_t o = 0; o < outer; ++o) {
      for (int64_t k = 0; k < n; ++k) {
        const double* src = g.ptr() + (o * n + k) * inner;
        double* dst = gx.mutable_ptr() + (o * len + index[k]) * inner;
        for (int64_t j = 0; j < inner; ++j) dst[j] += src[j];
      }
    }
    return std::vector<Tensor>{gx};
  }, "index_select");
}

Tensor Conv(const Tensor& x, const Tensor& w, const std::optional<Tensor>& bias,
            const ConvSpec& spec) {
  if (x.rank() != 2 && x.rank() != 3)
    throw ShapeError("conv expects [C x T] or [C x T x F], got " + ShapeString(x.shape()));
  if (w.rank() != x.rank() + 1 || w.dim(1) != x.dim(0))
    throw ShapeError("conv weight " + ShapeString(w.shape()) + " does not match input " +
                     ShapeString(x.shape()));
  const bool two_d = x.rank() == 3;
  Geometry g{};
  g.channels = x.dim(0);
  g.l1 = x.dim(1);
  g.l2 = two_d ? x.dim(2) : 1;
  g.k1 = w.dim(2);
  g.k2 = two_d ? w.dim(3) : 1;
  g.s1 = SpecAt(spec.stride, 0, 1);
  g.s2 = two_d ? SpecAt(spec.stride, 1, 1) : 1;
  g.pb1 = SpecAt(spec.pad_before, 0, 0);
  g.pb2 = two_d ? SpecAt(spec.pad_before, 1, 0) : 0;
  g.d1 = SpecAt(spec.dilation, 0, 1);
  g.d2 = two_d ? SpecAt(spec.dilation, 1, 1) : 1;
  const int64_t pa1 = SpecAt(spec.pad_after, 0, 0);
  const int64_t pa2 = two_d ? SpecAt(spec.pad_after, 1, 0) : 0;
  const int64_t span1 = g.d1 * (g.k1 - 1) + 1, span2 = g.d2 * (g.k2 - 1) + 1;
  const int64_t padded1 = g.l1 + g.pb1 + pa1, padded2 = g.l2 + g.pb2 + pa2;
  if (span1 > padded1 || span2 > padded2)
    throw ShapeError("conv kernel " + ShapeString(w.shape()) + " larger than padded input " +
                     ShapeString(x.shape()));
  g.o1 = (padded1 - span1) / g.s1 + 1;
  g.o2 = (padded2 - span2) / g.s2 + 1;

  const int64_t co = w.dim(0), rows = g.channels * g.k1 * g.k2, p = g.o1 * g.o2;
  const bool has_bias = bias && bias->defined();
  if (has_bias && bias->numel() != co)
    throw ShapeError("conv bias " + ShapeString(bias->shape()) + " for " + std::to_string(co) +
                     " output channels");
  Tensor col = Lower(x, g);
  Tensor y(two_d ? Shape{co, g.o1, g.o2} : Shape{co, g.o1});
  MapMat ym(y.mutable_ptr(), co, p);
  ym.noalias() = CMapMat(w.ptr(), co, rows) * CMapMat(col.ptr(), rows, p);
  if (has_bias) ym.colwise() += Eigen::Map<const Eigen::VectorXd>(bias->ptr(), co);

  std::vector<Tensor> inputs{x, w};
  if (has_bias) inputs.push_back(*bias);
  if (!NeedsRecord(inputs)) return y;
  return Record(y, inputs, [x = x.detach(), w = w.detach(), g, co, rows, p, has_bias,
                            bias_shape = has_bias ? bias->shape() : Shape{}](const Tensor& gy) {
    CMapMat gm(gy.ptr(), co, p);
    Tensor col = Lower(x, g);
    Tensor gw(w.shape());
    MapMat(gw.mutable_ptr(), co, rows).noalias() = gm * CMapMat(col.ptr(), rows, p).transpose();
    Tensor gcol({rows, p});
    MapMat(gcol.mutable_ptr(), rows, p).noalias() = CMapMat(w.ptr(), co, rows).transpose() * gm;
    std::vector<Tensor> grads{Raise(gcol, g, x.shape()), gw};
    if (has_bias) grads.push_back(RowSums(gy, co).view(bias_shape));
    return grads;
  }, "conv");
}

Tensor TransposedConv(const Tensor& x, const Tensor& w, const std::optional<Tensor>& bias,
                      const TransposedConvSpec& spec) {
  if (x.rank() != 2 && x.rank() != 3)
    throw ShapeError("transposed conv expects [C x T] or [C x T x F], got " +
                     ShapeString(x.shape()));
  if (w.rank() != x.rank() + 1 || w.dim(0) != x.dim(0))
    throw ShapeError("transposed conv weight " + ShapeString(w.shape()) +
                     " does not match input " + ShapeString(x.shape()));
  const bool two_d = x.rank() == 3;
  const int64_t ci = x.dim(0), co = w.dim(1);
  Geometry g{};
  g.channels = co;
  g.k1 = w.dim(2);
  g.k2 = two_d ? w.dim(3) : 1;
  g.s1 = SpecAt(spec.stride, 0, 1);
  g.s2 = two_d ? SpecAt(spec.stride, 1, 1) : 1;
  g.pb1 = SpecAt(spec.trim_before, 0, 0);
  g.pb2 = two_d ? SpecAt(spec.trim_before, 1, 0) : 0;
  g.d1 = g.d2 = 1;
  g.o1 = x.dim(1);
  g.o2 = two_d ? x.dim(2) : 1;
  const int64_t full1 = (g.o1 - 1) * g.s1 + g.k1, full2 = (g.o2 - 1) * g.s2 + g.k2;
  g.l1 = full1 - g.pb1 - SpecAt(spec.trim_after, 0, 0);
  g.l2 = full2 - g.pb2 - (two_d ? SpecAt(spec.trim_after, 1, 0) : 0);
  if (g.l1 < 1 || g.l2 < 1)
    throw ShapeError("transposed conv trim exceeds output length for input " +
                     ShapeString(x.shape()));

  const int64_t rows = co * g.k1 * g.k2, p = g.o1 * g.o2;
  const bool has_bias = bias && bias->defined();
  if (has_bias && bias->numel() != co)
    throw ShapeError("transposed conv bias " + ShapeString(bias->shape()) + " for " +
                     std::to_string(co) + " output channels");
  Tensor col({rows, p});
  MapMat(col.mutable_ptr(), rows, p).noalias() =
      CMapMat(w.ptr(), ci, rows).transpose() * CMapMat(x.ptr(), ci, p);
  const Shape out_shape = two_d ? Shape{co, g.l1, g.l2} : Shape{co, g.l1};
  Tensor y = Raise(col, g, out_shape);
  if (has_bias) {
    MapMat(y.mutable_ptr(), co, g.l1 * g.l2).colwise() +=
        Eigen::Map<const Eigen::VectorXd>(bias->ptr(), co);
  }

  std::vector<Tensor> inputs{x, w};
  if (has_bias) inputs.push_back(*bias);
  if (!NeedsRecord(inputs)) return y;
  return Record(y, inputs, [x = x.detach(), w = w.detach(), g, ci, co, rows, p, has_bias,
                            bias_shape = has_bias ? bias->shape() : Shape{}](const Tensor& gy) {
    Tensor gcol = Lower(gy, g);
    CMapMat gc(gcol.ptr(), rows, p);
    Tensor gx(x.shape()), gw(w.shape());
    MapMat(gx.mutable_ptr(), ci, p).noalias() = CMapMat(w.ptr(), ci, rows) * gc;
    MapMat(gw.mutable_ptr(), ci, rows).noalias() = CMapMat(x.ptr(), ci, p) * gc.transpose();
    std::vector<Tensor> grads{gx, gw};
    if (has_bias) grads.push_back(RowSums(gy, co).view(bias_shape));
    return grads;
  }, "transposed_conv");
}

Tensor Unfold(const Tensor& x, int axis, int64_t kernel, int64_t stride) {
  if (x.rank() != 2 && x.rank() != 3)
    throw ShapeError("unfold expects [C x T] or [C x T x F], got " + ShapeString(x.shape()));
  axis = NormAxis(axis, x.rank());
  if (axis == 0) throw ShapeError("unfold axis must be spatial");
  if (kernel < 1 || stride < 1) throw ShapeError("unfold kernel and stride must be positive");
  if (kernel > x.shape()[axis])
    throw ShapeError("unfold kernel " + std::to_string(kernel) + " exceeds axis length " +
                     std::to_string(x.shape()[axis]));
  const bool two_d = x.rank() == 3;
  Geometry g{};
  g.channels = x.dim(0);
  g.l1 = x.dim(1);
  g.l2 = two_d ? x.dim(2) : 1;
  g.k1 = axis == 1 ? kernel : 1;
  g.k2 = axis == 2 ? kernel : 1;
  g.s1 = axis == 1 ? stride : 1;
  g.s2 = axis == 2 ? stride : 1;
  g.pb1 = g.pb2 = 0;
  g.d1 = g.d2 = 1;
  g.o1 = (g.l1 - g.k1) / g.s1 + 1;
  g.o2 = (g.l2 - g.k2) / g.s2 + 1;
  Shape out_shape = two_d ? Shape{g.channels * kernel, g.o1, g.o2}
                          : Shape{g.channels * kernel, g.o1};
  Tensor y = Lower(x, g).view(out_shape);
  if (!NeedsRecord({&x})) return y;
  return Record(y, {x}, [g, shape = x.shape()](const Tensor& gy) {
    return std::vector<Tensor>{Raise(gy, g, shape)};
  }, "unfold");
}

namespace {

// Normalizes each row of a [groups x n] tensor.
Tensor NormalizeRows(const Tensor& x, double eps) {
  const int64_t groups = x.dim(0), n = x.dim(1);
  Tensor y(x.shape());
  std::vector<double> inv_std(groups);
  for (int64_t r = 0; r < groups; ++r) {
    const double* row = x.ptr() + r * n;
    const double mean = SeqSum(row, n) / static_cast<double>(n);
    double var = 0;
    for (int64_t i = 0; i < n; ++i) var += (row[i] - mean) * (row[i] - mean);
    var /= static_cast<double>(n);
    inv_std[r] = 1.0 / std::sqrt(var + eps);
    for (int64_t i = 0; i < n; ++i) y.mutable_ptr()[r * n + i] = (row[i] - mean) * inv_std[r];
  }
  if (!NeedsRecord({&x})) return y;
  return Record(y, {x}, [y = y.detach(), inv_std, groups, n](const Tensor& g) {
    Tensor gx(y.shape());
    for (int64_t r = 0; r < groups; ++r) {
      const double* gr = g.ptr() + r * n;
      const double* yr = y.ptr() + r * n;
      double mg = 0, mgy = 0;
      for (int64_t i = 0; i < n; ++i) mg += gr[i], mgy += gr[i] * yr[i];
      mg /= static_cast<double>(n);
      mgy /= static_cast<double>(n);
      for (int64_t i = 0; i < n; ++i)
        gx.mutable_ptr()[r * n + i] = inv_std[r] * (gr[i] - mg - yr[i] * mgy);
    }
    return std::vector<Tensor>{gx};
  }, "normalize");
}

}  // namespace

Tensor Normalize(const Tensor& x, const std::vector<int>& axes, double eps) {
  const int r = x.rank();
  std::vector<bool> reduced(r, false);
  for (int a : axes) reduced[NormAxis(a, r)] = true;
  std::vector<int> perm;
  Shape kept_shape;
  int64_t groups = 1, n = 1;
  for (int i = 0; i < r; ++i) {
    if (!reduced[i]) {
      perm.push_back(i);
      kept_shape.push_back(x.shape()[i]);
      groups *= x.shape()[i];
    }
  }
  for (int i = 0; i < r; ++i) {
    if (reduced[i]) {
      perm.push_back(i);
      n *= x.shape()[i];
    }
  }
  Tensor moved = Permute(x, perm);
  Tensor normed = Reshape(NormalizeRows(Reshape(moved, {groups, n}), eps), moved.shape());
  std::vector<int> inverse(r);
  for (int i = 0; i < r; ++i) inverse[perm[i]] = i;
  return Permute(normed, inverse);
}

Tensor NormLayer(const Tensor& x, const Tensor& gain, const Tensor& bias,
                 const std::vector<int>& axes, std::optional<int> time_axis, double eps) {
  if (time_axis) {
    const int t = NormAxis(*time_axis, x.rank());
    for (int a : axes)
      if (NormAxis(a, x.rank()) == t)
        throw CausalityError("normalization over the time axis mixes time steps");
  }
  return Add(Mul(Normalize(x, axes, eps), gain), bias);
}

std::vector<int64_t> NearestIndex(int64_t old_len, int64_t new_len) {
  if (old_len < 1 || new_len < 1) throw ShapeError("interpolation lengths must be positive");
  std::vector<int64_t> index(new_len);
  for (int64_t i = 0; i < new_len; ++i) index[i] = i * old_len / new_len;
  return index;
}

Tensor InterpNearest(const Tensor& x, int axis, int64_t new_len) {
  axis = NormAxis(axis, x.rank());
  if (new_len == x.shape()[axis]) return x;
  return IndexSelect(x, axis, NearestIndex(x.shape()[axis], new_len));
}

}  // namespace swiftnet::ops
