// Copyright 2026 The swiftnet-cpp Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "swiftnet/synth.h"

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "swiftnet/wav.h"

namespace swiftnet {
namespace {

std::string Slurp(const std::filesystem::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream s;
  s << f.rdbuf();
  return s.str();
}

synth::SynthSpec Small() {
  synth::SynthSpec s;
  s.num_pairs = 3;
  s.visual_channels = 16;
  return s;
}

TEST(Synth, SpecGeometry) {
  const synth::SynthSpec s;
  EXPECT_EQ(s.num_samples(), 32000);
  EXPECT_EQ(s.num_video_frames(), 50);
  const auto p = synth::GeneratePair(Small(), 0);
  EXPECT_EQ(p.target_visual.shape(), (Shape{16, 50}));
  EXPECT_EQ(p.mix.size(), 32000u);
}

TEST(Synth, MixIsExactSumOfPcmSources) {
  for (int i = 0; i < 3; ++i) {
    const auto p = synth::GeneratePair(Small(), i);
    for (size_t n = 0; n < p.mix.size(); ++n) {
      ASSERT_EQ(p.mix[n], p.target[n] + p.interferer[n]);
      ASSERT_EQ(wav::FromPcm(wav::ToPcm(p.target[n])), p.target[n]);
      ASSERT_EQ(wav::FromPcm(wav::ToPcm(p.mix[n])), p.mix[n]);
    }
    EXPECT_GE(p.snr_db, -2.5);
    EXPECT_LE(p.snr_db, 2.5);
    double et = 0, ei = 0;
    for (size_t n = 0; n < p.mix.size(); ++n)
      et += p.target[n] * p.target[n], ei += p.interferer[n] * p.interferer[n];
    EXPECT_NEAR(10 * std::log10(et / ei), p.snr_db, 0.05);
  }
}

TEST(Synth, DeterministicAndIndexDependent) {
  const auto a = synth::GeneratePair(Small(), 1), b = synth::GeneratePair(Small(), 1);
  EXPECT_EQ(a.mix, b.mix);
  EXPECT_EQ(MaxAbsDiff(a.target_visual, b.target_visual), 0.0);
  EXPECT_NE(a.mix, synth::GeneratePair(Small(), 2).mix);
  auto other = Small();
  other.seed = 2;
  EXPECT_NE(a.mix, synth::GeneratePair(other, 1).mix);
}

TEST(Synth, VisualsTrackTheirOwnSpeaker) {
  const auto p = synth::GeneratePair(Small(), 0);
  EXPECT_GT(MaxAbsDiff(p.target_visual, p.interferer_visual), 0.1);
  EXPECT_EQ(MaxAbsDiff(synth::VisualFeatures(p.target, 16, 16000, 25), p.target_visual), 0.0);
}

TEST(Synth, GenerateWritesByteIdenticalCorpora) {
  const auto root = std::filesystem::path(::testing::TempDir());
  const auto a = root / "corpus_a", b = root / "corpus_b";
  std::filesystem::remove_all(a);
  std::filesystem::remove_all(b);
  const auto ma = synth::Generate(Small(), a.string());
  synth::Generate(Small(), b.string());
  ASSERT_EQ(ma.size(), 3u);
  for (const auto& e : ma)
    for (const auto& f : {e.mix, e.target, e.interferer, e.target_visual, e.interferer_visual}) {
      ASSERT_TRUE(std::filesystem::exists(a / f)) << f;
      EXPECT_EQ(Slurp(a / f), Slurp(b / f)) << f;
    }
  EXPECT_EQ(Slurp(a / "manifest.txt"), Slurp(b / "manifest.txt"));

  const auto back = synth::ReadManifest(a.string());
  ASSERT_EQ(back.size(), 3u);
  EXPECT_EQ(back[2].mix, ma[2].mix);
  const auto ex = synth::LoadCorpus(a.string());
  ASSERT_EQ(ex.size(), 6u);
  EXPECT_EQ(ex[0].mix.shape(), (Shape{1, 32000}));
  EXPECT_EQ(ex[0].visual.shape(), (Shape{16, 50}));
}

TEST(Synth, SpecParsing) {
  const auto s = synth::ParseSpec("num_pairs = 4\nvisual_channels = 32\nseed = 9\n");
  EXPECT_EQ(s.num_pairs, 4);
  EXPECT_EQ(s.visual_channels, 32);
  EXPECT_EQ(s.seed, 9u);
  EXPECT_THROW(synth::ParseSpec("pairs = 4\n"), ConfigError);
  EXPECT_THROW(synth::ParseSpec("visual_channels = 4\n"), ConfigError);
  EXPECT_THROW(synth::ParseSpec("snr_min_db = 3\nsnr_max_db = 1\n"), ConfigError);
}

}  // namespace
}  // namespace swiftnet
