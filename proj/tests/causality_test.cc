// Copyright 2026 The swiftnet-cpp Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "swiftnet/causality.h"

#include <gtest/gtest.h>

#include "swiftnet/causal.h"
#include "swiftnet/ops.h"

namespace swiftnet {
namespace {

causality::Options Small(int64_t bound) {
  causality::Options o;
  o.trials = 20;
  o.hop = 16;
  o.min_hops = 4;
  o.max_hops = 12;
  o.bound = bound;
  return o;
}

TEST(Causality, CausalConvHasZeroLookback) {
  const Tensor w(Shape{1, 1, 5}, {0.1, -0.2, 0.3, 0.4, 1.0});
  const auto rep = causality::Verify(
      [&](const Tensor& x) { return causal::CausalConv(x, w); }, Small(0));
  EXPECT_FALSE(rep.violation());
  EXPECT_EQ(rep.latency_samples, 0);
  EXPECT_TRUE(rep.constant);
  EXPECT_EQ(rep.max_prefix_violation, 0.0);
}

TEST(Causality, LookaheadIsMeasuredAndFlagged) {
  // y[n] = x[n] + x[n + 3]: three samples of lookahead.
  auto ahead = [](const Tensor& x) {
    const int64_t t = x.numel();
    return ops::Add(x, ops::Pad(ops::Slice(x, 1, 3, t - 3), 1, 0, 3));
  };
  const auto ok = causality::Verify(ahead, Small(3));
  EXPECT_FALSE(ok.violation());
  EXPECT_EQ(ok.latency_samples, 3);
  EXPECT_EQ(ok.latency_frames, 1);
  const auto bad = causality::Verify(ahead, Small(2));
  EXPECT_EQ(bad.violations, 20);
  EXPECT_GT(bad.max_prefix_violation, 0.0);
}

TEST(Causality, ToyModelHasConstantBoundedLookback) {
  const Model m = Model::Create(SepConfig::Toy(), 31);
  auto opt = causality::ModelOptions(m.cfg, 6, 3);
  opt.min_hops = 8;
  opt.max_hops = 20;
  const auto rep = causality::Verify(causality::ModelFn(m), opt);
  EXPECT_FALSE(rep.violation()) << causality::FormatReport(rep);
  EXPECT_TRUE(rep.constant);
  EXPECT_GT(rep.latency_samples, 0);
  EXPECT_LE(rep.latency_samples, m.cfg.stft.win_len - m.cfg.stft.hop);
}

TEST(Causality, BidirectionalTimePathIsDetected) {
  SepConfig cfg = SepConfig::Toy();
  cfg.time_bidirectional = true;
  const Model m = Model::Create(cfg, 32);
  auto opt = causality::ModelOptions(cfg, 4, 4);
  opt.min_hops = 12;
  opt.max_hops = 20;
  const auto rep = causality::Verify(causality::ModelFn(m), opt);
  EXPECT_TRUE(rep.violation());
  EXPECT_GT(rep.latency_samples, opt.bound);
}

TEST(Causality, ReportFormat) {
  const auto rep = causality::Verify([](const Tensor& x) { return x; }, Small(0));
  const std::string s = causality::FormatReport(rep);
  EXPECT_NE(s.find("latency 0 samples\n"), std::string::npos);
  EXPECT_NE(s.find("violations 0 count\n"), std::string::npos);
  EXPECT_THROW(causality::Verify([](const Tensor& x) { return x; }, causality::Options{0}),
               ConfigError);
}

}  // namespace
}  // namespace swiftnet
