// Copyright 2026 The swiftnet-cpp Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "swiftnet/sru.h"

#include <cmath>

#include "swiftnet/autodiff.h"
#include "swiftnet/ops.h"

namespace swiftnet::sru {
namespace {

inline double Sig(double z) { return 1.0 / (1.0 + std::exp(-z)); }

Tensor RandomUniform(Shape shape, double bound, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> dist(-bound, bound);
  Tensor t(std::move(shape));
  for (int64_t i = 0; i < t.numel(); ++i) t.mutable_ptr()[i] = dist(rng);
  return t;
}

// The elementwise recurrence over precomputed input transforms.
// u [B x L x kD] holds (W x, W_f x, W_r x[, proj x]) blocks; `x` [B x L x D]
// supplies the identity highway when there is no projection block.
Tensor Recurrence(const Tensor& u, const Tensor& x, const SruCell& cell, const Tensor& c0,
                  bool reverse, Tensor* c_last) {
  const int64_t b_count = u.dim(0), len = u.dim(1), d = cell.d_hid;
  const int64_t k = cell.has_proj() ? 4 : 3;
  const double* vf = cell.v_f.ptr();
  const double* vr = cell.v_r.ptr();
  const double* bf = cell.b_f.ptr();
  const double* br = cell.b_r.ptr();

  Tensor h({b_count, len, d});
  Tensor c_all({b_count, len, d});
  std::vector<double> c(d);
  for (int64_t b = 0; b < b_count; ++b) {
    if (c0.defined()) {
      std::copy(c0.ptr() + b * d, c0.ptr() + (b + 1) * d, c.begin());
    } else {
      std::fill(c.begin(), c.end(), 0.0);
    }
    for (int64_t i = 0; i < len; ++i) {
      const int64_t s = reverse ? len - 1 - i : i;
      const double* us = u.ptr() + (b * len + s) * k * d;
      const double* hx = cell.has_proj() ? us + 3 * d : x.ptr() + (b * len + s) * d;
      double* hs = h.mutable_ptr() + (b * len + s) * d;
      double* cs = c_all.mutable_ptr() + (b * len + s) * d;
      for (int64_t j = 0; j < d; ++j) {
        const double f = Sig(us[d + j] + vf[j] * c[j] + bf[j]);
        const double r = Sig(us[2 * d + j] + vr[j] * c[j] + br[j]);
        c[j] = f * c[j] + (1.0 - f) * us[j];
        hs[j] = r * c[j] + (1.0 - r) * hx[j];
        cs[j] = c[j];
      }
    }
    if (c_last) {
      if (b == 0) *c_last = Tensor({b_count, d});
      std::copy(c.begin(), c.end(), c_last->mutable_ptr() + b * d);
    }
  }

  std::vector<Tensor> inputs{u, cell.has_proj() ? Tensor() : x, cell.v_f, cell.v_r,
                             cell.b_f, cell.b_r, c0};
  if (!autodiff::NeedsRecord(inputs)) return h;
  return autodiff::Record(h, inputs, [u = u.detach(), x = x.detach(), vf_t = cell.v_f.detach(),
                                      vr_t = cell.v_r.detach(), bf_t = cell.b_f.detach(),
                                      br_t = cell.b_r.detach(), c0 = c0.detach(), c_all,
                                      b_count, len, d, k, reverse,
                                      proj = cell.has_proj()](const Tensor& g) {
    Tensor gu(u.shape());
    Tensor gx = proj ? Tensor() : Tensor(x.shape());
    Tensor gvf({d}), gvr({d}), gbf({d}), gbr({d});
    Tensor gc0 = c0.defined() ? Tensor(c0.shape()) : Tensor();
    const double* vf = vf_t.ptr();
    const double* vr = vr_t.ptr();
    const double* bf = bf_t.ptr();
    const double* br = br_t.ptr();
    std::vector<double> dc(d), c_prev(d);
    for (int64_t b = 0; b < b_count; ++b) {
      std::fill(dc.begin(), dc.end(), 0.0);
      for (int64_t i = len - 1; i >= 0; --i) {
        const int64_t s = reverse ? len - 1 - i : i;
        if (i > 0) {
          const int64_t sp = reverse ? s + 1 : s - 1;
          std::copy(c_all.ptr() + (b * len + sp) * d, c_all.ptr() + (b * len + sp + 1) * d,
                    c_prev.begin());
        } else if (c0.defined()) {
          std::copy(c0.ptr() + b * d, c0.ptr() + (b + 1) * d, c_prev.begin());
        } else {
          std::fill(c_prev.begin(), c_prev.end(), 0.0);
        }
        const int64_t row = b * len + s;
        const double* us = u.ptr() + row * k * d;
        const double* hx = proj ? us + 3 * d : x.ptr() + row * d;
        const double* cs = c_all.ptr() + row * d;
        const double* gh = g.ptr() + row * d;
        double* gus = gu.mutable_ptr() + row * k * d;
        for (int64_t j = 0; j < d; ++j) {
          const double f = Sig(us[d + j] + vf[j] * c_prev[j] + bf[j]);
          const double r = Sig(us[2 * d + j] + vr[j] * c_prev[j] + br[j]);
          const double dcs = gh[j] * r + dc[j];
          const double dzr = gh[j] * (cs[j] - hx[j]) * r * (1.0 - r);
          const double dzf = dcs * (c_prev[j] - us[j]) * f * (1.0 - f);
          const double dhx = gh[j] * (1.0 - r);
          gus[j] = dcs * (1.0 - f);
          gus[d + j] = dzf;
          gus[2 * d + j] = dzr;
          if (proj) {
            gus[3 * d + j] = dhx;
          } else {
            gx.mutable_ptr()[row * d + j] = dhx;
          }
          gvf.mutable_ptr()[j] += dzf * c_prev[j];
          gvr.mutable_ptr()[j] += dzr * c_prev[j];
          gbf.mutable_ptr()[j] += dzf;
          gbr.mutable_ptr()[j] += dzr;
          dc[j] = dcs * f + dzf * vf[j] + dzr * vr[j];
        }
      }
      if (gc0.defined()) std::copy(dc.begin(), dc.end(), gc0.mutable_ptr() + b * d);
    }
    return std::vector<Tensor>{gu, gx, gvf, gvr, gbf, gbr, gc0};
  }, "sru_recurrence");
}

bool BiOverTimeRejected(const ScanOptions& opt) {
  return opt.direction == Direction::kBi && opt.axis == Axis::kTime && !opt.allow_noncausal;
}

}  // namespace

SruCell SruCell::Zeros(int64_t d_in, int64_t d_hid) {
  if (d_in < 1 || d_hid < 1) throw ShapeError("SRU dims must be positive");
  SruCell c;
  c.d_in = d_in;
  c.d_hid = d_hid;
  c.w = Tensor({d_in, d_hid});
  c.w_f = Tensor({d_in, d_hid});
  c.w_r = Tensor({d_in, d_hid});
  c.v_f = Tensor({d_hid});
  c.v_r = Tensor({d_hid});
  c.b_f = Tensor({d_hid});
  c.b_r = Tensor({d_hid});
  if (c.has_proj()) c.proj = Tensor({d_in, d_hid});
  return c;
}

SruCell SruCell::Random(int64_t d_in, int64_t d_hid, std::mt19937_64& rng) {
  SruCell c = Zeros(d_in, d_hid);
  const double bound = 1.0 / std::sqrt(static_cast<double>(d_in));
  c.w = RandomUniform({d_in, d_hid}, bound, rng);
  c.w_f = RandomUniform({d_in, d_hid}, bound, rng);
  c.w_r = RandomUniform({d_in, d_hid}, bound, rng);
  c.v_f = RandomUniform({d_hid}, 0.5, rng);
  c.v_r = RandomUniform({d_hid}, 0.5, rng);
  if (c.has_proj()) c.proj = RandomUniform({d_in, d_hid}, bound, rng);
  return c;
}

int64_t SruCell::param_count() const {
  return 3 * d_in * d_hid + 4 * d_hid + (has_proj() ? d_in * d_hid : 0);
}

std::vector<Tensor*> SruCell::tensors() {
  std::vector<Tensor*> t{&w, &w_f, &w_r, &v_f, &v_r, &b_f, &b_r};
  if (has_proj()) t.push_back(&proj);
  return t;
}

void SruCell::Validate() const {
  const Shape mat{d_in, d_hid}, vec{d_hid};
  auto check = [](const Tensor& t, const Shape& s, const char* name) {
    if (!t.defined() || t.shape() != s)
      throw ShapeError(std::string("SRU tensor ") + name + " must be " + ShapeString(s) +
                       ", got " + (t.defined() ? ShapeString(t.shape()) : "undefined"));
  };
  check(w, mat, "w");
  check(w_f, mat, "w_f");
  check(w_r, mat, "w_r");
  check(v_f, vec, "v_f");
  check(v_r, vec, "v_r");
  check(b_f, vec, "b_f");
  check(b_r, vec, "b_r");
  if (has_proj()) check(proj, mat, "proj");
}

Tensor ScanBatched(const SruCell& cell, const Tensor& x, bool reverse, const Tensor* c0,
                   Tensor* c_last) {
  cell.Validate();
  if (x.rank() != 3 || x.dim(2) != cell.d_in)
    throw ShapeError("SRU scan expects [B x L x " + std::to_string(cell.d_in) + "], got " +
                     ShapeString(x.shape()));
  if (c0 && c0->defined() && c0->shape() != Shape{x.dim(0), cell.d_hid})
    throw ShapeError("SRU state must be " + ShapeString({x.dim(0), cell.d_hid}) + ", got " +
                     ShapeString(c0->shape()));
  std::vector<Tensor> blocks{cell.w, cell.w_f, cell.w_r};
  if (cell.has_proj()) blocks.push_back(cell.proj);
  const Tensor u = ops::MatMul(x, ops::Concat(blocks, 1));
  return Recurrence(u, x, cell, c0 ? *c0 : Tensor(), reverse, c_last);
}

std::pair<Tensor, Tensor> SruStep(const SruCell& cell, const Tensor& c_prev, const Tensor& x_t) {
  if (x_t.numel() != cell.d_in || c_prev.numel() != cell.d_hid)
    throw ShapeError("sru_step expects c_prev [" + std::to_string(cell.d_hid) + "] and x_t [" +
                     std::to_string(cell.d_in) + "], got " + ShapeString(c_prev.shape()) +
                     " and " + ShapeString(x_t.shape()));
  Tensor c0 = ops::Reshape(c_prev, {1, cell.d_hid});
  Tensor c_t;
  Tensor h = ScanBatched(cell, ops::Reshape(x_t, {1, 1, cell.d_in}), false, &c0, &c_t);
  return {c_t.view({cell.d_hid}), ops::Reshape(h, {cell.d_hid})};
}

Tensor SruScan(const SruCell& cell, const Tensor& x, const ScanOptions& opt,
               const SruCell* backward_cell) {
  if (BiOverTimeRejected(opt))
    throw CausalityError("bidirectional SRU over the time axis reads future frames");
  if (x.rank() != 2) throw ShapeError("sru_scan expects [D_in x T], got " + ShapeString(x.shape()));
  const int64_t t = x.dim(1);
  Tensor seq = ops::Reshape(ops::Permute(x, {1, 0}), {1, t, x.dim(0)});
  auto to_channels = [t](const Tensor& h) {
    return ops::Permute(ops::Reshape(h, {t, h.dim(2)}), {1, 0});
  };
  Tensor fwd = to_channels(ScanBatched(cell, seq, false));
  if (opt.direction == Direction::kUni) return fwd;
  if (!backward_cell) throw ShapeError("bidirectional scan needs a backward cell");
  Tensor bwd = to_channels(ScanBatched(*backward_cell, seq, true));
  return ops::Concat({fwd, bwd}, 0);
}

GroupedSru GroupedSru::Random(int64_t d_in, int64_t d_hid, int64_t groups, Direction direction,
                              std::mt19937_64& rng) {
  if (groups < 1 || d_in % groups != 0 || d_hid % groups != 0)
    throw ShapeError("groups " + std::to_string(groups) + " must divide D_in " +
                     std::to_string(d_in) + " and D_hid " + std::to_string(d_hid));
  GroupedSru g;
  g.groups = groups;
  g.direction = direction;
  for (int64_t i = 0; i < groups; ++i) {
    g.forward.push_back(SruCell::Random(d_in / groups, d_hid / groups, rng));
    if (direction == Direction::kBi)
      g.backward.push_back(SruCell::Random(d_in / groups, d_hid / groups, rng));
  }
  return g;
}

int64_t GroupedSru::param_count() const {
  int64_t n = 0;
  for (const auto& c : forward) n += c.param_count();
  for (const auto& c : backward) n += c.param_count();
  return n;
}

Tensor GroupedScanBatched(const GroupedSru& g, const Tensor& x, const ScanOptions& opt,
                          const std::vector<Tensor>* c0, std::vector<Tensor>* c_last) {
  if (BiOverTimeRejected(opt))
    throw CausalityError("bidirectional SRU over the time axis reads future frames");
  const bool bi = g.direction == Direction::kBi;
  if (static_cast<int64_t>(g.forward.size()) != g.groups ||
      (bi && static_cast<int64_t>(g.backward.size()) != g.groups))
    throw ShapeError("grouped SRU needs one cell per group and direction");
  if (x.rank() != 3 || x.dim(2) != g.d_in())
    throw ShapeError("grouped scan expects [B x L x " + std::to_string(g.d_in()) + "], got " +
                     ShapeString(x.shape()));
  const size_t states = static_cast<size_t>(g.groups) * (bi ? 2 : 1);
  if (c0 && c0->size() != states) throw ShapeError("grouped SRU state count mismatch");
  if (c_last) c_last->assign(states, Tensor());

  const int64_t a = g.forward[0].d_in;
  std::vector<Tensor> parts;
  size_t si = 0;
  for (int64_t i = 0; i < g.groups; ++i) {
    Tensor xs = g.groups == 1 ? x : ops::Slice(x, 2, i * a, a);
    parts.push_back(ScanBatched(g.forward[i], xs, false, c0 ? &(*c0)[si] : nullptr,
                                c_last ? &(*c_last)[si] : nullptr));
    ++si;
    if (bi) {
      parts.push_back(ScanBatched(g.backward[i], xs, true, c0 ? &(*c0)[si] : nullptr,
                                  c_last ? &(*c_last)[si] : nullptr));
      ++si;
    }
  }
  return ops::Concat(parts, 2);
}

Tensor GroupedScan(const GroupedSru& g, const Tensor& x, const ScanOptions& opt) {
  if (x.rank() != 2)
    throw ShapeError("grouped_scan expects [D_in x T], got " + ShapeString(x.shape()));
  if (g.groups < 1 || x.dim(0) % g.groups != 0)
    throw ShapeError("channels " + std::to_string(x.dim(0)) + " not divisible by " +
                     std::to_string(g.groups) + " groups");
  ScanOptions o = opt;
  o.direction = g.direction;
  const int64_t t = x.dim(1);
  Tensor seq = ops::Reshape(ops::Permute(x, {1, 0}), {1, t, x.dim(0)});
  Tensor h = GroupedScanBatched(g, seq, o);
  return ops::Permute(ops::Reshape(h, {t, h.dim(2)}), {1, 0});
}

int64_t SruParamCount(int64_t d_in, int64_t d_hid, int64_t groups, Direction direction) {
  if (groups < 1 || d_in % groups != 0 || d_hid % groups != 0)
    throw ShapeError("groups must divide D_in and D_hid");
  const int64_t a = d_in / groups, b = d_hid / groups;
  const int64_t dirs = direction == Direction::kBi ? 2 : 1;
  return groups * dirs * (3 * a * b + 4 * b + (a != b ? a * b : 0));
}

int64_t SruStepMacs(int64_t d_in, int64_t d_hid, int64_t groups, Direction direction) {
  return SruParamCount(d_in, d_hid, groups, direction);
}

}  // namespace swiftnet::sru
