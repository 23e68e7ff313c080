// Copyright 2026 The swiftnet-cpp Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include <gtest/gtest.h>

#include <cstring>
#include <random>

#include "swiftnet/swnv.h"
#include "swiftnet/wav.h"

namespace swiftnet {
namespace {

void PutU16(std::vector<uint8_t>& b, size_t at, uint16_t v) { std::memcpy(&b[at], &v, 2); }

TEST(Wav, PcmMapping) {
  EXPECT_EQ(wav::FromPcm(-32768), -1.0);
  EXPECT_EQ(wav::FromPcm(16384), 0.5);
  EXPECT_EQ(wav::ToPcm(-1.0), -32768);
  EXPECT_EQ(wav::ToPcm(2.0), 32767);
  EXPECT_EQ(wav::ToPcm(0.5), 16384);
  EXPECT_EQ(wav::ToPcm(1.4 / 32768), 1);
}

TEST(Wav, RoundTripIsBitExact) {
  std::mt19937_64 rng(1);
  std::uniform_int_distribution<int> d(-32768, 32767);
  std::vector<double> s(1001);
  for (auto& v : s) v = wav::FromPcm(static_cast<int16_t>(d(rng)));
  s[0] = -1.0;
  const auto bytes = wav::Encode(s);
  EXPECT_EQ(bytes.size(), 44u + 2 * s.size());
  const auto a = wav::Parse(bytes);
  EXPECT_EQ(a.sample_rate, 16000);
  EXPECT_EQ(a.samples, s);
  EXPECT_EQ(wav::Encode(a.samples), bytes);

  const std::string path = ::testing::TempDir() + "/io.wav";
  wav::Write(path, s);
  EXPECT_EQ(wav::Read(path).samples, s);
}

TEST(Wav, RejectsUnsupportedFormats) {
  const auto good = wav::Encode(std::vector<double>(10, 0.25));
  auto stereo = good;
  PutU16(stereo, 22, 2);
  EXPECT_THROW(wav::Parse(stereo), FormatError);
  auto pcm8 = good;
  PutU16(pcm8, 34, 8);
  EXPECT_THROW(wav::Parse(pcm8), FormatError);
  auto flt = good;
  PutU16(flt, 20, 3);
  EXPECT_THROW(wav::Parse(flt), FormatError);
  EXPECT_THROW(wav::Parse(wav::Encode(std::vector<double>(10), 8000)), FormatError);
  auto magic = good;
  magic[0] = 'X';
  EXPECT_THROW(wav::Parse(magic), FormatError);
  EXPECT_THROW(wav::Read(::testing::TempDir() + "/missing.wav"), FormatError);
}

TEST(Wav, RejectsTruncation) {
  const auto good = wav::Encode(std::vector<double>(10, 0.25));
  for (size_t cut : {4u, 30u, 43u, 50u}) {
    std::vector<uint8_t> b(good.begin(), good.begin() + cut);
    EXPECT_THROW(wav::Parse(b), FormatError) << cut;
  }
}

TEST(Swnv, RoundTripAndTruncation) {
  Tensor f({3, 4});
  for (int i = 0; i < 12; ++i) f.mutable_ptr()[i] = 0.25 * i - 1.0;
  const auto bytes = swnv::Encode(f);
  EXPECT_EQ(bytes.size(), 16u + 12 * 4);
  const Tensor back = swnv::Parse(bytes);
  EXPECT_EQ(back.shape(), f.shape());
  EXPECT_EQ(MaxAbsDiff(back, f), 0.0);

  const std::string path = ::testing::TempDir() + "/io.swnv";
  swnv::Write(path, f);
  EXPECT_EQ(MaxAbsDiff(swnv::Read(path), f), 0.0);

  std::vector<uint8_t> shortb(bytes.begin(), bytes.end() - 1);
  EXPECT_THROW(swnv::Parse(shortb), FormatError);
  auto longb = bytes;
  longb.push_back(0);
  EXPECT_THROW(swnv::Parse(longb), FormatError);
  auto magic = bytes;
  magic[3] = 'W';
  EXPECT_THROW(swnv::Parse(magic), FormatError);
  EXPECT_THROW(swnv::Parse({}), FormatError);
}

}  // namespace
}  // namespace swiftnet
