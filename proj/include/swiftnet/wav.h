// Copyright 2026 The swiftnet-cpp Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

// RIFF/WAVE, PCM16 mono only. Samples map to s / 32768.

#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace swiftnet::wav {

inline constexpr int kSampleRate = 16000;

struct Audio {
  int sample_rate = kSampleRate;
  std::vector<double> samples;
};

// Throws FormatError for anything but PCM16 mono at `expected_rate`.
Audio Read(const std::string& path, int expected_rate = kSampleRate);
Audio Parse(const std::vector<uint8_t>& bytes, int expected_rate = kSampleRate);

// Values are rounded to the nearest PCM16 code and clipped to [-1, 32767/32768].
void Write(const std::string& path, const std::vector<double>& samples,
           int sample_rate = kSampleRate);
std::vector<uint8_t> Encode(const std::vector<double>& samples, int sample_rate = kSampleRate);

int16_t ToPcm(double v);
inline double FromPcm(int16_t s) { return s / 32768.0; }

}  // namespace swiftnet::wav
