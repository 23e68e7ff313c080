// Copyright 2026 The swiftnet-cpp Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "swiftnet/ops.h"

#include <gtest/gtest.h>

#include "test_util.h"

namespace swiftnet {
namespace {

using testing::CheckGradients;
using testing::Project;
using testing::RandomTensor;

void ExpectValues(const Tensor& t, const std::vector<double>& want, double tol = 1e-12) {
  ASSERT_EQ(t.numel(), static_cast<int64_t>(want.size())) << ShapeString(t.shape());
  for (size_t i = 0; i < want.size(); ++i) EXPECT_NEAR(t.data()[i], want[i], tol) << "at " << i;
}

TEST(Elementwise, Examples) {
  ExpectValues(ops::Add(Tensor::Vector({1, 2}), Tensor::Vector({3, 4})), {4, 6});
  ExpectValues(ops::Sqrt(Tensor::Vector({9, 16})), {3, 4});
  ExpectValues(ops::PRelu(Tensor::Vector({-4, 2}), Tensor::Vector({0.25})), {-1, 2});
  ExpectValues(ops::Elementwise(ops::ElementwiseOp::kDiv, Tensor::Vector({1, 3}),
                                Tensor::Vector({2, 4})),
               {0.5, 0.75});
}

TEST(Elementwise, BroadcastErrorNamesBothShapes) {
  try {
    ops::Add(Tensor({2, 3}), Tensor({4}));
    FAIL() << "expected ShapeError";
  } catch (const ShapeError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("[2x3]"), std::string::npos) << msg;
    EXPECT_NE(msg.find("[4]"), std::string::npos) << msg;
  }
}

TEST(Elementwise, BroadcastSumIdentity) {
  std::mt19937_64 rng(1);
  const Tensor a = RandomTensor({3, 1}, rng), b = RandomTensor({4}, rng);
  const double lhs = ops::Sum(ops::Add(a, b)).item();
  const double rhs = ops::Sum(a).item() * 4 + ops::Sum(b).item() * 3;
  EXPECT_NEAR(lhs, rhs, 1e-12);
}

TEST(Elementwise, GradientsMatchFiniteDifference) {
  std::mt19937_64 rng(2);
  const Tensor a = RandomTensor({3, 4}, rng);
  const Tensor b = testing::RandomUniform({4}, rng, 0.5, 2.0);
  const Tensor pos = testing::RandomUniform({3, 4}, rng, 0.5, 2.0);
  const Tensor alpha = testing::RandomUniform({4}, rng, 0.1, 0.4);
  const Tensor r = RandomTensor({3, 4}, rng);
  auto loss = [&](const std::vector<Tensor>& p) {
    Tensor y = ops::Add(ops::Mul(p[0], p[1]), ops::Div(p[0], p[1]));
    y = ops::Add(y, ops::Sub(ops::Sigmoid(p[0]), ops::Tanh(p[0])));
    y = ops::Add(y, ops::Sqrt(p[2]));
    y = ops::Add(y, ops::Log(p[2]));
    y = ops::Add(y, ops::Exp(ops::Scale(p[0], 0.3)));
    y = ops::Add(y, ops::PRelu(p[0], p[3]));
    return Project(y, r);
  };
  const auto res = CheckGradients({a, b, pos, alpha}, loss, 120, 3);
  EXPECT_LT(res.max_error, 1e-6);
}

TEST(MatMul, Examples) {
  const Tensor m = Tensor::Matrix({{1, 2}, {3, 4}});
  ExpectValues(ops::MatMul(Tensor::Matrix({{1, 0}, {0, 1}}), m), {1, 2, 3, 4});
  ExpectValues(ops::MatMul(Tensor::Matrix({{1, 2}}), Tensor::Matrix({{3}, {4}})), {11});
  EXPECT_THROW(ops::MatMul(Tensor({2, 3}), Tensor({2, 3})), ShapeError);
}

TEST(MatMul, MatchesNaiveTripleLoop) {
  std::mt19937_64 rng(4);
  const Tensor a = RandomTensor({5, 7}, rng), b = RandomTensor({7, 3}, rng);
  const Tensor c = ops::MatMul(a, b);
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 3; ++j) {
      double s = 0;
      for (int k = 0; k < 7; ++k) s += a.at({i, k}) * b.at({k, j});
      EXPECT_NEAR(c.at({i, j}), s, 1e-12);
    }
}

TEST(MatMul, BatchedAndGradients) {
  std::mt19937_64 rng(5);
  const Tensor a = RandomTensor({2, 3, 4}, rng), b = RandomTensor({2, 4, 5}, rng);
  const Tensor shared = RandomTensor({4, 5}, rng);
  const Tensor c = ops::MatMul(a, b);
  EXPECT_EQ(c.shape(), (Shape{2, 3, 5}));
  EXPECT_NEAR(c.at({1, 2, 4}),
              [&] {
                double s = 0;
                for (int k = 0; k < 4; ++k) s += a.at({1, 2, k}) * b.at({1, k, 4});
                return s;
              }(),
              1e-12);
  const Tensor r = RandomTensor({2, 3, 5}, rng);
  auto loss = [&](const std::vector<Tensor>& p) {
    return ops::Add(Project(ops::MatMul(p[0], p[1]), r), Project(ops::MatMul(p[0], p[2]), r));
  };
  EXPECT_LT(CheckGradients({a, b, shared}, loss, 120, 6).max_error, 1e-6);
}

TEST(Linear, GradientsMatchFiniteDifference) {
  std::mt19937_64 rng(6);
  const Tensor x = RandomTensor({2, 3, 4}, rng), w = RandomTensor({5, 4}, rng);
  const Tensor b = RandomTensor({5}, rng), r = RandomTensor({2, 3, 5}, rng);
  auto loss = [&](const std::vector<Tensor>& p) { return Project(ops::Linear(p[0], p[1], p[2]), r); };
  EXPECT_LT(CheckGradients({x, w, b}, loss, 100, 7).max_error, 1e-6);
}

TEST(Conv, Examples) {
  const Tensor x = Tensor({1, 3}, {1, 2, 3});
  ExpectValues(ops::Conv(x, Tensor({1, 1, 1}, {2}), Tensor::Vector({0})), {2, 4, 6});
  ops::ConvSpec causal;
  causal.pad_before = {1};
  causal.pad_after = {0};
  ExpectValues(ops::Conv(x, Tensor({1, 1, 2}, {1, 1}), std::nullopt, causal), {1, 3, 5});
  ops::ConvSpec stride2;
  stride2.stride = {2};
  EXPECT_EQ(ops::Conv(Tensor::Zeros({1, 8}), Tensor({1, 1, 1}, {1}), std::nullopt, stride2).dim(1),
            4);
  EXPECT_THROW(ops::Conv(x, Tensor::Zeros({1, 1, 4}), std::nullopt), ShapeError);
}

TEST(Conv, OutputLengthFormula) {
  ops::ConvSpec s;
  s.stride = {2, 3};
  s.pad_before = {1, 0};
  s.pad_after = {2, 1};
  const Tensor y = ops::Conv(Tensor::Zeros({2, 9, 10}), Tensor::Zeros({3, 2, 3, 2}), std::nullopt, s);
  EXPECT_EQ(y.shape(), (Shape{3, (9 + 3 - 3) / 2 + 1, (10 + 1 - 2) / 3 + 1}));
}

TEST(Conv, AdjointIdentity) {
  std::mt19937_64 rng(8);
  ops::ConvSpec s;
  s.stride = {2, 1};
  s.pad_before = {2, 1};
  s.pad_after = {0, 1};
  s.dilation = {1, 2};
  const Tensor x = RandomTensor({3, 9, 8}, rng), w = RandomTensor({4, 3, 3, 2}, rng);
  const Tensor y0 = ops::Conv(x, w, std::nullopt, s);
  const Tensor y = RandomTensor(y0.shape(), rng);
  autodiff::Tape tape;
  autodiff::TapeScope scope(tape);
  const Tensor xw = tape.Watch(x);
  const auto g = tape.Backward(Project(ops::Conv(xw, w, std::nullopt, s), y));
  double lhs = 0, rhs = 0;
  for (int64_t i = 0; i < y0.numel(); ++i) lhs += y0.data()[i] * y.data()[i];
  for (int64_t i = 0; i < x.numel(); ++i) rhs += x.data()[i] * g.of(xw).data()[i];
  EXPECT_NEAR(lhs, rhs, 1e-10);
}

TEST(Conv, GradientsMatchFiniteDifference) {
  std::mt19937_64 rng(9);
  ops::ConvSpec s;
  s.stride = {1, 2};
  s.pad_before = {2, 0};
  s.pad_after = {0, 1};
  const Tensor x = RandomTensor({2, 6, 7}, rng), w = RandomTensor({3, 2, 3, 2}, rng);
  const Tensor b = RandomTensor({3}, rng);
  const Tensor r = RandomTensor(ops::Conv(x, w, b, s).shape(), rng);
  auto loss = [&](const std::vector<Tensor>& p) { return Project(ops::Conv(p[0], p[1], p[2], s), r); };
  EXPECT_LT(CheckGradients({x, w, b}, loss, 120, 10).max_error, 1e-6);

  // Pointwise fast path.
  const Tensor w1 = RandomTensor({3, 2, 1, 1}, rng);
  const Tensor r1 = RandomTensor({3, 6, 7}, rng);
  auto loss1 = [&](const std::vector<Tensor>& p) { return Project(ops::Conv(p[0], p[1], p[2]), r1); };
  EXPECT_LT(CheckGradients({x, w1, b}, loss1, 100, 11).max_error, 1e-6);
}

TEST(TransposedConv, Examples) {
  ExpectValues(ops::TransposedConv(Tensor({1, 3}, {1, 2, 3}), Tensor({1, 1, 1}, {1}), std::nullopt),
               {1, 2, 3});
  ExpectValues(ops::TransposedConv(Tensor({1, 2}, {1, 2}), Tensor({1, 1, 2}, {1, 1}), std::nullopt),
               {1, 3, 2});
  ops::TransposedConvSpec bad;
  bad.trim_before = {2};
  bad.trim_after = {1};
  EXPECT_THROW(ops::TransposedConv(Tensor({1, 2}, {1, 2}), Tensor({1, 1, 2}, {1, 1}), std::nullopt, bad),
               ShapeError);
}

TEST(TransposedConv, CausalTrimIgnoresFuture) {
  std::mt19937_64 rng(12);
  ops::TransposedConvSpec s;
  s.trim_after = {3};
  const Tensor w = RandomTensor({2, 3, 4}, rng);
  const Tensor x = RandomTensor({2, 10}, rng);
  const Tensor y = ops::TransposedConv(x, w, std::nullopt, s);
  EXPECT_EQ(y.dim(1), 10);
  Tensor xp = x.clone();
  xp.mutable_ptr()[5] += 1.0;
  xp.mutable_ptr()[10 + 5] -= 2.0;
  const Tensor yp = ops::TransposedConv(xp, w, std::nullopt, s);
  for (int c = 0; c < 3; ++c) {
    for (int t = 0; t < 5; ++t) EXPECT_EQ(y.at({c, t}), yp.at({c, t}));
    EXPECT_NE(y.at({c, 5}), yp.at({c, 5}));
  }
}

TEST(TransposedConv, GradientsMatchFiniteDifference) {
  std::mt19937_64 rng(13);
  ops::TransposedConvSpec s;
  s.stride = {2, 1};
  s.trim_before = {0, 1};
  s.trim_after = {1, 1};
  const Tensor x = RandomTensor({3, 4, 5}, rng), w = RandomTensor({3, 2, 3, 3}, rng);
  const Tensor b = RandomTensor({2}, rng);
  const Tensor r = RandomTensor(ops::TransposedConv(x, w, b, s).shape(), rng);
  auto loss = [&](const std::vector<Tensor>& p) {
    return Project(ops::TransposedConv(p[0], p[1], p[2], s), r);
  };
  EXPECT_LT(CheckGradients({x, w, b}, loss, 120, 14).max_error, 1e-6);
}

TEST(Unfold, Examples) {
  const Tensor u = ops::Unfold(Tensor({1, 4}, {1, 2, 3, 4}), 1, 2);
  EXPECT_EQ(u.shape(), (Shape{2, 3}));
  // Window p is column p: channel j holds x[p + j].
  ExpectValues(u, {1, 2, 3, 2, 3, 4});
  EXPECT_EQ(ops::Unfold(Tensor::Zeros({5, 12, 3}), 1, 8).shape(), (Shape{40, 5, 3}));
  EXPECT_EQ(ops::Unfold(Tensor::Zeros({5, 12}), 1, 3, 2).dim(1), 5);
  EXPECT_THROW(ops::Unfold(Tensor::Zeros({1, 3}), 1, 4), ShapeError);
}

TEST(Unfold, FoldRecoversConstantUpToOverlapCount) {
  const int64_t k = 8, len = 20;
  const Tensor x = Tensor::Full({1, len}, 2.5);
  const Tensor u = ops::Unfold(x, 1, k);  // [k x len - k + 1]
  // Folding back: transposed conv with an identity tap per window offset.
  Tensor w = Tensor::Zeros({k, 1, k});
  for (int64_t j = 0; j < k; ++j) w.mutable_ptr()[j * k + j] = 1.0;
  const Tensor folded = ops::TransposedConv(u, w, std::nullopt);
  ASSERT_EQ(folded.dim(1), len);
  for (int64_t t = 0; t < len; ++t) {
    const int64_t count = std::min(t, len - k) - std::max<int64_t>(0, t - k + 1) + 1;
    EXPECT_NEAR(folded.at({0, t}), 2.5 * static_cast<double>(count), 1e-12) << t;
  }
}

TEST(Unfold, GradientsMatchFiniteDifference) {
  std::mt19937_64 rng(15);
  const Tensor x = RandomTensor({2, 9, 4}, rng);
  const Tensor r1 = RandomTensor({8, 3, 4}, rng), r2 = RandomTensor({6, 9, 2}, rng);
  auto loss = [&](const std::vector<Tensor>& p) {
    return ops::Add(Project(ops::Unfold(p[0], 1, 4, 2), r1), Project(ops::Unfold(p[0], 2, 3), r2));
  };
  EXPECT_LT(CheckGradients({x}, loss, 100, 16).max_error, 1e-6);
}

TEST(NormLayer, ZeroMeanUnitVariancePerFrame) {
  std::mt19937_64 rng(17);
  const Tensor x = RandomTensor({4, 6, 5}, rng, 3.0);
  const Tensor y = ops::Normalize(x, {0, 2});
  for (int t = 0; t < 6; ++t) {
    double mean = 0, var = 0;
    for (int c = 0; c < 4; ++c)
      for (int f = 0; f < 5; ++f) mean += y.at({c, t, f});
    mean /= 20;
    for (int c = 0; c < 4; ++c)
      for (int f = 0; f < 5; ++f) var += (y.at({c, t, f}) - mean) * (y.at({c, t, f}) - mean);
    var /= 20;
    EXPECT_NEAR(mean, 0.0, 1e-9);
    EXPECT_NEAR(var, 1.0, 1e-5);  // eps 1e-5 against a variance near 9
  }
  const Tensor c = ops::Normalize(Tensor::Full({3, 2}, 7.0), {0});
  for (double v : c.data()) EXPECT_EQ(v, 0.0);
}

TEST(NormLayer, FrameLocal) {
  std::mt19937_64 rng(18);
  const Tensor x = RandomTensor({4, 6, 5}, rng);
  const Tensor gain = RandomTensor({4, 1, 1}, rng), bias = RandomTensor({4, 1, 1}, rng);
  const Tensor y = ops::NormLayer(x, gain, bias, {0, 2}, 1);
  // Perturbing frame 3 leaves every other frame unchanged.
  Tensor xp = x.clone();
  for (int c = 0; c < 4; ++c) xp.mutable_ptr()[(c * 6 + 3) * 5 + 1] += 5.0;
  const Tensor yp = ops::NormLayer(xp, gain, bias, {0, 2}, 1);
  for (int c = 0; c < 4; ++c)
    for (int t = 0; t < 6; ++t)
      for (int f = 0; f < 5; ++f)
        if (t != 3) EXPECT_EQ(y.at({c, t, f}), yp.at({c, t, f}));
  // Permuting frames permutes the output frames.
  const std::vector<int64_t> perm = {5, 2, 0, 4, 1, 3};
  const Tensor ys = ops::NormLayer(ops::IndexSelect(x, 1, perm), gain, bias, {0, 2}, 1);
  EXPECT_LT(MaxAbsDiff(ys, ops::IndexSelect(y, 1, perm)), 1e-15);
}

TEST(NormLayer, RejectsTimeAxis) {
  EXPECT_THROW(ops::NormLayer(Tensor::Zeros({2, 3}), Tensor::Full({2, 1}, 1.0),
                              Tensor::Zeros({2, 1}), {0, 1}, 1),
               CausalityError);
}

TEST(NormLayer, GradientsMatchFiniteDifference) {
  std::mt19937_64 rng(19);
  const Tensor x = RandomTensor({3, 4, 5}, rng);
  const Tensor gain = RandomTensor({3, 1, 1}, rng), bias = RandomTensor({3, 1, 1}, rng);
  const Tensor r = RandomTensor({3, 4, 5}, rng);
  auto loss = [&](const std::vector<Tensor>& p) {
    return Project(ops::NormLayer(p[0], p[1], p[2], {0, 2}, 1), r);
  };
  EXPECT_LT(CheckGradients({x, gain, bias}, loss, 120, 20).max_error, 1e-6);
}

TEST(InterpNearest, Examples) {
  ExpectValues(ops::InterpNearest(Tensor({1, 2}, {1, 2}), 1, 4), {1, 1, 2, 2});
  const Tensor x = Tensor::Vector({3, 1, 4}).view({1, 3});
  EXPECT_EQ(MaxAbsDiff(ops::InterpNearest(x, 1, 3), x), 0.0);
  const auto idx = ops::NearestIndex(50, 250);
  for (int64_t i = 0; i < 250; ++i) EXPECT_EQ(idx[i], i / 5);
  for (int64_t old_len : {3, 65, 125})
    for (int64_t new_len : {5, 129, 250}) {
      const auto m = ops::NearestIndex(old_len, new_len);
      for (int64_t i = 0; i < new_len; ++i) EXPECT_EQ(m[i], i * old_len / new_len);
    }
}

TEST(ShapeOps, GradientsMatchFiniteDifference) {
  std::mt19937_64 rng(21);
  const Tensor a = RandomTensor({3, 4, 2}, rng), b = RandomTensor({3, 2, 2}, rng);
  const Tensor r = RandomTensor({2, 8, 3}, rng);
  auto loss = [&](const std::vector<Tensor>& p) {
    Tensor y = ops::Concat({p[0], p[1]}, 1);             // [3 x 6 x 2]
    y = ops::Pad(y, 1, 1, 1);                            // [3 x 8 x 2]
    y = ops::Permute(y, {2, 1, 0});                      // [2 x 8 x 3]
    y = ops::Add(y, ops::InterpNearest(ops::Slice(y, 1, 2, 4), 1, 8));
    y = ops::Add(y, ops::IndexSelect(y, 0, {1, 1}));
    return ops::Add(Project(y, r), ops::Sum(ops::Reshape(ops::SumAxis(p[0], 1), {6})));
  };
  EXPECT_LT(CheckGradients({a, b}, loss, 100, 22).max_error, 1e-6);
}

}  // namespace
}  // namespace swiftnet
