// Copyright 2026 The swiftnet-cpp Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

// Visual feature files: "SWNV", u32 version, u32 C_v, u32 T_v, then C_v * T_v
// little-endian f32 values, row-major [C_v x T_v]. 25 frames per second.

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "swiftnet/tensor.h"

namespace swiftnet::swnv {

inline constexpr uint32_t kVersion = 1;
inline constexpr int kFps = 25;

Tensor Parse(const std::vector<uint8_t>& bytes);
Tensor Read(const std::string& path);
// Values are stored as f32.
std::vector<uint8_t> Encode(const Tensor& features);
void Write(const std::string& path, const Tensor& features);

}  // namespace swiftnet::swnv
