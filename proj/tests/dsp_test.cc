// Copyright 2026 The swiftnet-cpp Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "swiftnet/dsp.h"

#include <gtest/gtest.h>

#include <cmath>

#include "swiftnet/ops.h"
#include "test_util.h"

namespace swiftnet {
namespace {

using dsp::StftConfig;

Tensor Noise(int64_t n, uint64_t seed) {
  std::mt19937_64 rng(seed);
  return testing::RandomTensor({1, n}, rng, 0.3);
}

TEST(Stft, Geometry) {
  StftConfig cfg;
  EXPECT_EQ(cfg.num_bins(), 129);
  const auto s = dsp::Stft(Noise(32000, 1), cfg);
  EXPECT_EQ(s.real.shape(), (Shape{250, 129}));
  EXPECT_EQ(dsp::Stft(Noise(32001, 1), cfg).real.dim(0), 251);
  EXPECT_THROW(dsp::Stft(Noise(1000, 1), StftConfig{300, 128, 16000}), ConfigError);
}

TEST(Stft, ZeroInputGivesZeroSpectrum) {
  const auto s = dsp::Stft(Tensor::Zeros({1, 1000}), StftConfig{});
  for (double v : s.real.data()) EXPECT_EQ(v, 0.0);
  for (double v : s.imag.data()) EXPECT_EQ(v, 0.0);
}

TEST(Stft, DcBinEqualsWindowSumOnCoveredFrames) {
  StftConfig cfg;
  const int64_t len = 2048;
  const auto s = dsp::Stft(Tensor::Full({1, len}, 1.0), cfg);
  double wsum = 0;
  for (double w : dsp::HannWindow(cfg.win_len)) wsum += w;
  for (int64_t t = 1; t * cfg.hop + cfg.hop <= len; ++t) {
    EXPECT_NEAR(s.real.at({t, 0}), wsum, 1e-9) << t;
    EXPECT_NEAR(s.imag.at({t, 0}), 0.0, 1e-9);
  }
}

TEST(Stft, AnalysisIsCausal) {
  StftConfig cfg;
  const Tensor x = Noise(4096, 2);
  const auto s = dsp::Stft(x, cfg);
  for (int64_t t : {1, 7, 20}) {
    Tensor xp = x.clone();
    for (int64_t n = t * cfg.hop; n < x.numel(); ++n) xp.mutable_ptr()[n] += 1.0;
    const auto sp = dsp::Stft(xp, cfg);
    for (int64_t f = 0; f < t; ++f)
      for (int k = 0; k < cfg.num_bins(); ++k) {
        EXPECT_EQ(s.real.at({f, k}), sp.real.at({f, k}));
        EXPECT_EQ(s.imag.at({f, k}), sp.imag.at({f, k}));
      }
    EXPECT_NE(s.real.at({t, 3}), sp.real.at({t, 3}));
  }
}

TEST(Istft, RoundTrip) {
  StftConfig cfg;
  for (int64_t len : {32000, 32000 - 37, 130}) {
    const Tensor x = Noise(len, 3 + len);
    const auto s = dsp::Stft(x, cfg);
    const Tensor y = dsp::Istft(s.real, s.imag, cfg, len);
    EXPECT_LT(MaxAbsDiff(y, x.view({1, len})), 1e-9) << len;
  }
}

TEST(Istft, ZeroAndLinearity) {
  StftConfig cfg;
  const auto s = dsp::Stft(Noise(3000, 4), cfg);
  const Tensor silent = dsp::Istft(ops::Scale(s.real, 0), ops::Scale(s.imag, 0), cfg, 3000);
  for (double v : silent.data()) EXPECT_EQ(v, 0.0);
  const Tensor y1 = dsp::Istft(s.real, s.imag, cfg, 3000);
  const Tensor y2 = dsp::Istft(ops::Scale(s.real, 2), ops::Scale(s.imag, 2), cfg, 3000);
  EXPECT_LT(MaxAbsDiff(y2, ops::Scale(y1, 2)), 1e-12);
  EXPECT_THROW(dsp::Istft(s.real, s.imag, cfg, s.real.dim(0) * cfg.hop + 1), ShapeError);
}

TEST(Istft, GradientsMatchFiniteDifference) {
  StftConfig cfg{16, 8, 16000};
  std::mt19937_64 rng(5);
  const Tensor re = testing::RandomTensor({6, 9}, rng), im = testing::RandomTensor({6, 9}, rng);
  const Tensor r = testing::RandomTensor({1, 45}, rng);
  auto loss = [&](const std::vector<Tensor>& p) {
    return testing::Project(dsp::Istft(p[0], p[1], cfg, 45), r);
  };
  EXPECT_LT(testing::CheckGradients({re, im}, loss, 120, 6).max_error, 1e-6);
}

TEST(PowerSpec, Examples) {
  EXPECT_DOUBLE_EQ(dsp::PowerSpec(Tensor::Vector({3}), Tensor::Vector({4})).item(), 5.0);
  const Tensor g = dsp::PowerSpec(Tensor::Vector({-2, 3}), Tensor::Vector({0, 0}));
  EXPECT_EQ(g.data()[0], 2.0);
  EXPECT_EQ(g.data()[1], 3.0);
  const auto s = dsp::Stft(Noise(2000, 7), StftConfig{});
  const Tensor p = dsp::PowerSpec(s.real, s.imag);
  for (int64_t i = 0; i < p.numel(); ++i)
    EXPECT_NEAR(p.data()[i], std::sqrt(s.real.data()[i] * s.real.data()[i] +
                                       s.imag.data()[i] * s.imag.data()[i]),
                1e-12);
}

TEST(PowerSpec, InvariantUnderPhaseRotation) {
  const auto s = dsp::Stft(Noise(2000, 8), StftConfig{});
  const double th = 0.7;
  const Tensor rr = ops::Sub(ops::Scale(s.real, std::cos(th)), ops::Scale(s.imag, std::sin(th)));
  const Tensor ri = ops::Add(ops::Scale(s.real, std::sin(th)), ops::Scale(s.imag, std::cos(th)));
  EXPECT_LT(MaxAbsDiff(dsp::PowerSpec(rr, ri), dsp::PowerSpec(s.real, s.imag)), 1e-12);
}

TEST(PowerSpec, ParsevalAgainstWindowedEnergy) {
  StftConfig cfg;
  const int64_t len = 4096;
  const Tensor x = Noise(len, 9);
  const auto s = dsp::Stft(x, cfg);
  const auto w = dsp::HannWindow(cfg.win_len);
  double spec = 0, wave = 0;
  const int64_t bins = cfg.num_bins();
  for (int64_t t = 0; t < s.real.dim(0); ++t) {
    for (int64_t k = 0; k < bins; ++k) {
      const double m = s.real.at({t, k}) * s.real.at({t, k}) + s.imag.at({t, k}) * s.imag.at({t, k});
      spec += (k == 0 || k == bins - 1) ? m : 2 * m;
    }
    for (int n = 0; n < cfg.win_len; ++n) {
      const int64_t i = t * cfg.hop - (cfg.win_len - cfg.hop) + n;
      if (i >= 0 && i < len) wave += w[n] * w[n] * x.data()[i] * x.data()[i];
    }
  }
  spec /= cfg.win_len;
  EXPECT_NEAR(spec / wave, 1.0, 0.01);
}

TEST(StackFeatures, ChannelOrder) {
  const auto s = dsp::Stft(Noise(32000, 10), StftConfig{});
  const Tensor g = dsp::PowerSpec(s.real, s.imag);
  const Tensor st = dsp::StackFeatures(g, s.real, s.imag);
  EXPECT_EQ(st.shape(), (Shape{3, 250, 129}));
  EXPECT_EQ(MaxAbsDiff(ops::Reshape(ops::Slice(st, 0, 0, 1), {250, 129}), g), 0.0);
  const Tensor swapped = dsp::StackFeatures(s.imag, g, s.real);
  EXPECT_EQ(MaxAbsDiff(ops::Slice(swapped, 0, 1, 1), ops::Slice(st, 0, 0, 1)), 0.0);
  EXPECT_EQ(MaxAbsDiff(ops::Slice(swapped, 0, 0, 1), ops::Slice(st, 0, 2, 1)), 0.0);
  EXPECT_THROW(dsp::StackFeatures(g, s.real, Tensor::Zeros({2, 129})), ShapeError);
}

TEST(StreamingStft, MatchesBatchForAnyChunking) {
  StftConfig cfg;
  const int64_t len = 5000;
  const Tensor x = Noise(len, 11);
  const auto batch = dsp::Stft(x, cfg);
  dsp::StreamingStft s(cfg);
  std::vector<dsp::StreamingStft::Frame> frames;
  int64_t pos = 0, step = 1;
  while (pos < len) {
    const int64_t n = std::min(len - pos, step);
    for (auto& f : s.Push(x.ptr() + pos, n)) frames.push_back(f);
    pos += n;
    step = step * 3 % 301 + 1;
  }
  for (auto& f : s.Finish()) frames.push_back(f);
  ASSERT_EQ(static_cast<int64_t>(frames.size()), batch.real.dim(0));
  for (size_t t = 0; t < frames.size(); ++t)
    for (int k = 0; k < cfg.num_bins(); ++k) {
      EXPECT_NEAR(frames[t].real[k], batch.real.at({static_cast<int64_t>(t), k}), 1e-12);
      EXPECT_NEAR(frames[t].imag[k], batch.imag.at({static_cast<int64_t>(t), k}), 1e-12);
    }
}

TEST(StreamingIstft, MatchesBatch) {
  StftConfig cfg;
  const int64_t len = 3000;
  std::mt19937_64 rng(12);
  const int64_t frames = cfg.num_frames(len);
  const Tensor re = testing::RandomTensor({frames, 129}, rng);
  const Tensor im = testing::RandomTensor({frames, 129}, rng);
  const Tensor batch = dsp::Istft(re, im, cfg, len);
  dsp::StreamingIstft s(cfg);
  std::vector<double> out;
  for (int64_t t = 0; t < frames; ++t) {
    const auto block = s.Push(re.ptr() + t * 129, im.ptr() + t * 129);
    // Frame t completes original samples [(t - 1) hop, t hop).
    EXPECT_EQ(static_cast<int64_t>(block.size()), t == 0 ? 0 : cfg.hop);
    out.insert(out.end(), block.begin(), block.end());
  }
  const auto tail = s.Finish();
  out.insert(out.end(), tail.begin(), tail.end());
  ASSERT_GE(static_cast<int64_t>(out.size()), len);
  for (int64_t n = 0; n < len; ++n) EXPECT_NEAR(out[n], batch.data()[n], 1e-12) << n;
}

}  // namespace
}  // namespace swiftnet
