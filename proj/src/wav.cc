// Copyright 2026 The swiftnet-cpp Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "swiftnet/wav.h"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>

#include "swiftnet/tensor.h"

namespace swiftnet::wav {
namespace {

uint32_t U32(const uint8_t* p) { return p[0] | p[1] << 8 | p[2] << 16 | uint32_t(p[3]) << 24; }
uint16_t U16(const uint8_t* p) { return static_cast<uint16_t>(p[0] | p[1] << 8); }

void Put32(std::vector<uint8_t>& b, uint32_t v) {
  for (int i = 0; i < 4; ++i) b.push_back(static_cast<uint8_t>(v >> (8 * i)));
}
void Put16(std::vector<uint8_t>& b, uint16_t v) {
  b.push_back(static_cast<uint8_t>(v));
  b.push_back(static_cast<uint8_t>(v >> 8));
}

}  // namespace

int16_t ToPcm(double v) {
  const double s = std::nearbyint(v * 32768.0);
  return static_cast<int16_t>(std::clamp(s, -32768.0, 32767.0));
}

Audio Parse(const std::vector<uint8_t>& bytes, int expected_rate) {
  if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
      std::memcmp(bytes.data() + 8, "WAVE", 4) != 0)
    throw FormatError("not a RIFF/WAVE file");
  bool have_fmt = false;
  Audio out;
  size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const uint8_t* h = bytes.data() + pos;
    const uint32_t size = U32(h + 4);
    const size_t body = pos + 8;
    if (size > bytes.size() - body)
      throw FormatError("chunk '" + std::string(reinterpret_cast<const char*>(h), 4) +
                        "' declares " + std::to_string(size) + " bytes, only " +
                        std::to_string(bytes.size() - body) + " present");
    if (std::memcmp(h, "fmt ", 4) == 0) {
      if (size < 16) throw FormatError("fmt chunk too short");
      const uint8_t* f = bytes.data() + body;
      const uint16_t format = U16(f), channels = U16(f + 2), bits = U16(f + 14);
      out.sample_rate = static_cast<int>(U32(f + 4));
      if (format != 1) throw FormatError("unsupported encoding " + std::to_string(format) +
                                         " (need PCM)");
      if (channels != 1)
        throw FormatError("expected mono, got " + std::to_string(channels) + " channels");
      if (bits != 16) throw FormatError("expected 16-bit samples, got " + std::to_string(bits));
      if (out.sample_rate != expected_rate)
        throw FormatError("expected " + std::to_string(expected_rate) + " Hz, got " +
                          std::to_string(out.sample_rate));
      have_fmt = true;
    } else if (std::memcmp(h, "data", 4) == 0) {
      if (!have_fmt) throw FormatError("data chunk before fmt chunk");
      if (size % 2 != 0) throw FormatError("odd data chunk length");
      out.samples.resize(size / 2);
      for (size_t i = 0; i < out.samples.size(); ++i)
        out.samples[i] = FromPcm(static_cast<int16_t>(U16(bytes.data() + body + 2 * i)));
      return out;
    }
    pos = body + size + (size & 1);
  }
  throw FormatError(have_fmt ? "missing data chunk" : "missing fmt chunk");
}

Audio Read(const std::string& path, int expected_rate) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw FormatError("cannot open '" + path + "'");
  std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  try {
    return Parse(bytes, expected_rate);
  } catch (const FormatError& e) {
    throw FormatError(path + ": " + e.what());
  }
}

std::vector<uint8_t> Encode(const std::vector<double>& samples, int sample_rate) {
  const uint32_t data = static_cast<uint32_t>(samples.size() * 2);
  std::vector<uint8_t> b;
  b.reserve(44 + data);
  b.insert(b.end(), {'R', 'I', 'F', 'F'});
  Put32(b, 36 + data);
  b.insert(b.end(), {'W', 'A', 'V', 'E', 'f', 'm', 't', ' '});
  Put32(b, 16);
  Put16(b, 1);
  Put16(b, 1);
  Put32(b, static_cast<uint32_t>(sample_rate));
  Put32(b, static_cast<uint32_t>(sample_rate) * 2);
  Put16(b, 2);
  Put16(b, 16);
  b.insert(b.end(), {'d', 'a', 't', 'a'});
  Put32(b, data);
  for (double v : samples) Put16(b, static_cast<uint16_t>(ToPcm(v)));
  return b;
}

void Write(const std::string& path, const std::vector<double>& samples, int sample_rate) {
  const auto bytes = Encode(samples, sample_rate);
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("cannot write '" + path + "'");
  f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!f) throw Error("write failed for '" + path + "'");
}

}  // namespace swiftnet::wav
