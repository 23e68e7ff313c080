// Copyright 2026 The swiftnet-cpp Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "swiftnet/swnv.h"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

namespace swiftnet::swnv {
namespace {

uint32_t U32(const uint8_t* p) { return p[0] | p[1] << 8 | p[2] << 16 | uint32_t(p[3]) << 24; }

void Put32(std::vector<uint8_t>& b, uint32_t v) {
  for (int i = 0; i < 4; ++i) b.push_back(static_cast<uint8_t>(v >> (8 * i)));
}

}  // namespace

Tensor Parse(const std::vector<uint8_t>& bytes) {
  if (bytes.size() < 16 || std::memcmp(bytes.data(), "SWNV", 4) != 0)
    throw FormatError("not a SWNV visual feature file");
  const uint32_t version = U32(bytes.data() + 4);
  if (version != kVersion) throw FormatError("unsupported SWNV version " + std::to_string(version));
  const uint64_t cv = U32(bytes.data() + 8), tv = U32(bytes.data() + 12);
  if (cv == 0 || tv == 0) throw FormatError("SWNV dimensions must be positive");
  const uint64_t expected = 16 + 4 * cv * tv;
  if (bytes.size() != expected)
    throw FormatError("SWNV payload length mismatch: expected " + std::to_string(expected) +
                      " bytes, got " + std::to_string(bytes.size()));
  Tensor out({static_cast<int64_t>(cv), static_cast<int64_t>(tv)});
  for (uint64_t i = 0; i < cv * tv; ++i)
    out.mutable_ptr()[i] = std::bit_cast<float>(U32(bytes.data() + 16 + 4 * i));
  return out;
}

Tensor Read(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw FormatError("cannot open '" + path + "'");
  std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  try {
    return Parse(bytes);
  } catch (const FormatError& e) {
    throw FormatError(path + ": " + e.what());
  }
}

std::vector<uint8_t> Encode(const Tensor& features) {
  if (features.rank() != 2) throw ShapeError("visual features must be [C_v x T_v]");
  std::vector<uint8_t> b = {'S', 'W', 'N', 'V'};
  Put32(b, kVersion);
  Put32(b, static_cast<uint32_t>(features.dim(0)));
  Put32(b, static_cast<uint32_t>(features.dim(1)));
  for (double v : features.data()) Put32(b, std::bit_cast<uint32_t>(static_cast<float>(v)));
  return b;
}

void Write(const std::string& path, const Tensor& features) {
  const auto bytes = Encode(features);
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("cannot write '" + path + "'");
  f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!f) throw Error("write failed for '" + path + "'");
}

}  // namespace swiftnet::swnv
