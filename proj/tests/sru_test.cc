// Copyright 2026 The swiftnet-cpp Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "swiftnet/sru.h"

#include <gtest/gtest.h>

#include <cmath>

#include "swiftnet/ops.h"
#include "test_util.h"

namespace swiftnet {
namespace {

using sru::Axis;
using sru::Direction;
using sru::ScanOptions;
using sru::SruCell;

double Sig(double z) { return 1.0 / (1.0 + std::exp(-z)); }

// Plain loop over the recurrence, x [D_in x T].
std::vector<std::vector<double>> NaiveScan(const SruCell& c, const Tensor& x) {
  const int64_t din = c.d_in, d = c.d_hid, t_len = x.dim(1);
  std::vector<double> state(d, 0.0);
  std::vector<std::vector<double>> out(t_len, std::vector<double>(d));
  for (int64_t t = 0; t < t_len; ++t)
    for (int64_t j = 0; j < d; ++j) {
      double u = 0, uf = 0, ur = 0, hx = c.has_proj() ? 0 : x.at({j, t});
      for (int64_t i = 0; i < din; ++i) {
        u += x.at({i, t}) * c.w.at({i, j});
        uf += x.at({i, t}) * c.w_f.at({i, j});
        ur += x.at({i, t}) * c.w_r.at({i, j});
        if (c.has_proj()) hx += x.at({i, t}) * c.proj.at({i, j});
      }
      const double f = Sig(uf + c.v_f.at({j}) * state[j] + c.b_f.at({j}));
      const double r = Sig(ur + c.v_r.at({j}) * state[j] + c.b_r.at({j}));
      state[j] = f * state[j] + (1 - f) * u;
      out[t][j] = r * state[j] + (1 - r) * hx;
    }
  return out;
}

Tensor Reversed(const Tensor& x) {
  std::vector<int64_t> idx(x.dim(1));
  for (int64_t i = 0; i < x.dim(1); ++i) idx[i] = x.dim(1) - 1 - i;
  return ops::IndexSelect(x, 1, idx);
}

TEST(Sru, ZeroCellHalvesInput) {
  std::mt19937_64 rng(1);
  const Tensor x = testing::RandomTensor({6, 11}, rng);
  const Tensor h = sru::SruScan(SruCell::Zeros(6, 6), x);
  EXPECT_LT(MaxAbsDiff(h, ops::Scale(x, 0.5)), 1e-15);
}

TEST(Sru, SaturatedForgetGateCarriesState) {
  std::mt19937_64 rng(2);
  SruCell c = SruCell::Random(4, 4, rng);
  c.b_f = Tensor::Full({4}, 60.0);
  c.b_r = Tensor::Full({4}, 60.0);
  const Tensor c0 = testing::RandomTensor({1, 4}, rng);
  const Tensor x = testing::RandomTensor({1, 15, 4}, rng);
  Tensor c_last;
  const Tensor h = sru::ScanBatched(c, x, false, &c0, &c_last);
  EXPECT_LT(MaxAbsDiff(c_last, c0), 1e-12);
  for (int64_t t = 0; t < 15; ++t)
    for (int64_t j = 0; j < 4; ++j) EXPECT_NEAR(h.at({0, t, j}), c0.at({0, j}), 1e-12);
}

TEST(Sru, MatchesNaiveLoop) {
  std::mt19937_64 rng(3);
  for (int64_t dh : {6, 9}) {
    const SruCell c = SruCell::Random(6, dh, rng);
    const Tensor x = testing::RandomTensor({6, 200}, rng);
    const Tensor h = sru::SruScan(c, x);
    const auto ref = NaiveScan(c, x);
    double err = 0;
    for (int64_t t = 0; t < 200; ++t)
      for (int64_t j = 0; j < dh; ++j) err = std::max(err, std::abs(h.at({j, t}) - ref[t][j]));
    EXPECT_LT(err, 1e-12) << dh;
  }
}

TEST(Sru, StepMatchesScan) {
  std::mt19937_64 rng(4);
  const SruCell c = SruCell::Random(5, 5, rng);
  const Tensor x = testing::RandomTensor({5, 8}, rng);
  const Tensor h = sru::SruScan(c, x);
  Tensor state = Tensor::Zeros({5});
  for (int64_t t = 0; t < 8; ++t) {
    auto [next, out] = sru::SruStep(c, state, ops::Reshape(ops::Slice(x, 1, t, 1), {5}));
    for (int64_t j = 0; j < 5; ++j) EXPECT_NEAR(out.at({j}), h.at({j, t}), 1e-14);
    state = next;
  }
}

TEST(Sru, BidirectionalLengthOneIsSymmetric) {
  std::mt19937_64 rng(5);
  const SruCell c = SruCell::Random(4, 4, rng);
  const Tensor x = testing::RandomTensor({4, 1}, rng);
  const Tensor h = sru::SruScan(c, x, ScanOptions{Direction::kBi, Axis::kFreq}, &c);
  EXPECT_LT(MaxAbsDiff(ops::Slice(h, 0, 0, 4), ops::Slice(h, 0, 4, 4)), 1e-15);
}

TEST(Sru, ReversingInputSwapsDirections) {
  std::mt19937_64 rng(6);
  const SruCell f = SruCell::Random(4, 3, rng), b = SruCell::Random(4, 3, rng);
  const Tensor x = testing::RandomTensor({4, 9}, rng);
  const ScanOptions opt{Direction::kBi, Axis::kFreq};
  const Tensor h = sru::SruScan(f, x, opt, &b);
  const Tensor hr = sru::SruScan(b, Reversed(x), opt, &f);
  EXPECT_LT(MaxAbsDiff(Reversed(ops::Slice(hr, 0, 0, 3)), ops::Slice(h, 0, 3, 3)), 1e-14);
  EXPECT_LT(MaxAbsDiff(Reversed(ops::Slice(hr, 0, 3, 3)), ops::Slice(h, 0, 0, 3)), 1e-14);
}

TEST(Sru, BidirectionalOverTimeIsRejected) {
  std::mt19937_64 rng(7);
  const SruCell c = SruCell::Random(4, 4, rng);
  const Tensor x = testing::RandomTensor({4, 5}, rng);
  EXPECT_THROW(sru::SruScan(c, x, ScanOptions{Direction::kBi, Axis::kTime}, &c), CausalityError);
  auto g = sru::GroupedSru::Random(4, 4, 2, Direction::kBi, rng);
  EXPECT_THROW(sru::GroupedScan(g, x, ScanOptions{Direction::kBi, Axis::kTime}), CausalityError);
  ScanOptions control{Direction::kBi, Axis::kTime, true};
  EXPECT_EQ(sru::GroupedScan(g, x, control).dim(0), 8);
}

TEST(GroupedSru, SingleGroupEqualsPlainScan) {
  std::mt19937_64 rng(8);
  const auto g = sru::GroupedSru::Random(6, 6, 1, Direction::kUni, rng);
  const Tensor x = testing::RandomTensor({6, 12}, rng);
  EXPECT_LT(MaxAbsDiff(sru::GroupedScan(g, x), sru::SruScan(g.forward[0], x)), 1e-15);
}

TEST(GroupedSru, GroupsAreIndependent) {
  std::mt19937_64 rng(9);
  const auto g = sru::GroupedSru::Random(8, 8, 2, Direction::kUni, rng);
  const Tensor x = testing::RandomTensor({8, 10}, rng);
  const Tensor h = sru::GroupedScan(g, x);
  Tensor xp = x.clone();
  for (int64_t i = 4 * 10; i < 8 * 10; ++i) xp.mutable_ptr()[i] += 1.0;  // group 1 inputs only
  const Tensor hp = sru::GroupedScan(g, xp);
  EXPECT_EQ(MaxAbsDiff(ops::Slice(h, 0, 0, 4), ops::Slice(hp, 0, 0, 4)), 0.0);
  EXPECT_GT(MaxAbsDiff(ops::Slice(h, 0, 4, 4), ops::Slice(hp, 0, 4, 4)), 1e-3);
  EXPECT_LT(MaxAbsDiff(ops::Slice(h, 0, 4, 4), sru::SruScan(g.forward[1], ops::Slice(x, 0, 4, 4))),
            1e-15);
}

TEST(GroupedSru, ParameterCounts) {
  EXPECT_EQ(sru::SruParamCount(64, 64, 1, Direction::kUni), 12544);
  EXPECT_EQ(sru::SruParamCount(64, 64, 2, Direction::kUni), 6400);
  EXPECT_EQ(sru::SruParamCount(64, 64, 4, Direction::kUni), 3328);
  EXPECT_EQ(sru::SruParamCount(64, 64, 2, Direction::kBi), 12800);
  std::mt19937_64 rng(10);
  for (int64_t g : {1, 2, 4, 8}) {
    const auto s = sru::GroupedSru::Random(64, 64, g, Direction::kUni, rng);
    EXPECT_EQ(s.param_count(), sru::SruParamCount(64, 64, g, Direction::kUni));
    const double ratio = static_cast<double>(s.param_count()) /
                         static_cast<double>(sru::SruParamCount(64, 64, 1, Direction::kUni));
    EXPECT_GE(ratio, 1.0 / g);
    EXPECT_LE(ratio, 1.0 / g + 4.0 * 64 / 12544);
  }
  EXPECT_THROW(sru::GroupedSru::Random(64, 64, 3, Direction::kUni, rng), ShapeError);
}

TEST(Sru, GradientsMatchFiniteDifference) {
  std::mt19937_64 rng(11);
  SruCell c = SruCell::Random(8, 8, rng);
  c.b_f = testing::RandomTensor({8}, rng, 0.3);
  const Tensor x = testing::RandomTensor({8, 10}, rng);
  const Tensor r = testing::RandomTensor({8, 10}, rng);
  auto loss = [&](const std::vector<Tensor>& p) {
    SruCell cc = c;
    cc.w = p[1], cc.w_f = p[2], cc.w_r = p[3], cc.v_f = p[4], cc.v_r = p[5], cc.b_f = p[6],
    cc.b_r = p[7];
    return testing::Project(sru::SruScan(cc, p[0]), r);
  };
  const auto res = testing::CheckGradients({x, c.w, c.w_f, c.w_r, c.v_f, c.v_r, c.b_f, c.b_r},
                                           loss, 160, 12);
  EXPECT_LT(res.max_error, 1e-6);
}

TEST(Sru, ProjectionGradients) {
  std::mt19937_64 rng(13);
  SruCell c = SruCell::Random(5, 3, rng);
  const Tensor x = testing::RandomTensor({4, 6, 5}, rng), c0 = testing::RandomTensor({4, 3}, rng);
  const Tensor r = testing::RandomTensor({4, 6, 3}, rng);
  auto loss = [&](const std::vector<Tensor>& p) {
    SruCell cc = c;
    cc.proj = p[1];
    return testing::Project(sru::ScanBatched(cc, p[0], true, &p[2]), r);
  };
  EXPECT_LT(testing::CheckGradients({x, c.proj, c0}, loss, 80, 14).max_error, 1e-6);
}

}  // namespace
}  // namespace swiftnet
