// Copyright 2026 The swiftnet-cpp Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "swiftnet/config.h"

#include <gtest/gtest.h>

namespace swiftnet {
namespace {

TEST(Config, EmptyTextGivesDefaults) {
  const auto [sep, train] = ParseConfig("# nothing here\n\n");
  EXPECT_EQ(sep.audio_channels, 64);
  EXPECT_EQ(sep.enc_channels, 384);
  EXPECT_EQ(sep.visual_channels, 512);
  EXPECT_EQ(sep.groups, 2);
  EXPECT_EQ(sep.repeats, 6);
  EXPECT_EQ(sep.unfold_kernel, 8);
  EXPECT_EQ(sep.stft.win_len, 256);
  EXPECT_EQ(sep.stft.hop, 128);
  EXPECT_EQ(sep.frames_per_video(), 5);
  EXPECT_DOUBLE_EQ(train.lr, 1e-3);
  EXPECT_DOUBLE_EQ(train.weight_decay, 0.1);
  EXPECT_EQ(train.plateau_patience, 5);
  EXPECT_DOUBLE_EQ(train.lr_decay, 0.5);
}

TEST(Config, ParsesValuesAndComments) {
  const auto [sep, train] = ParseConfig("groups = 4  # wider\nrepeats=12\nlr = 5e-4\nuse_bias = false\n");
  EXPECT_EQ(sep.groups, 4);
  EXPECT_EQ(sep.repeats, 12);
  EXPECT_FALSE(sep.use_bias);
  EXPECT_DOUBLE_EQ(train.lr, 5e-4);
}

TEST(Config, FormatRoundTrips) {
  SepConfig s = SepConfig::Toy();
  s.groups = 4;
  TrainConfig t;
  t.crop_seconds = 0.5;
  const auto [s2, t2] = ParseConfig(FormatConfig(s, t));
  EXPECT_EQ(FormatConfig(s2, t2), FormatConfig(s, t));
  EXPECT_EQ(s2.groups, 4);
  EXPECT_DOUBLE_EQ(t2.crop_seconds, 0.5);
}

TEST(Config, RejectsGroupsThatDoNotDivide) {
  try {
    ParseConfig("groups = 3\n");
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("groups"), std::string::npos);
  }
}

TEST(Config, RejectsBadInput) {
  EXPECT_THROW(ParseConfig("gruops = 2\n"), ConfigError);
  EXPECT_THROW(ParseConfig("groups = two\n"), ConfigError);
  EXPECT_THROW(ParseConfig("lr = fast\n"), ConfigError);
  EXPECT_THROW(ParseConfig("use_bias = maybe\n"), ConfigError);
  EXPECT_THROW(ParseConfig("groups\n"), ConfigError);
  EXPECT_THROW(ParseConfig("heads = 5\n"), ConfigError);
  EXPECT_THROW(ParseConfig("enc_channels = 33\n"), ConfigError);
  EXPECT_THROW(ParseConfig("lr = 0\n"), ConfigError);
  EXPECT_THROW(ParseConfig("video_fps = 30\n"), ConfigError);
  EXPECT_THROW(LoadConfig("/nonexistent/swiftnet.cfg"), ConfigError);
}

TEST(Config, ToyIsValid) {
  EXPECT_NO_THROW(SepConfig::Toy().Validate());
  EXPECT_NO_THROW(TrainConfig{}.Validate());
}

}  // namespace
}  // namespace swiftnet
