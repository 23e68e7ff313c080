// Copyright 2026 The swiftnet-cpp Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

// Named weight bundle of one separator instance and its binary file format.
//
// SWNW layout (little-endian): "SWNW", u32 version, then records until end of
// file: u16 name length, name bytes, u8 rank, u32 dims[rank], f64 payload.

#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "swiftnet/autodiff.h"
#include "swiftnet/config.h"
#include "swiftnet/sru.h"
#include "swiftnet/tensor.h"

namespace swiftnet {

inline constexpr uint32_t kWeightsVersion = 1;

enum class InitKind { kZeros, kOnes, kConstant, kUniform };

struct ParamSpec {
  std::string name;
  Shape shape;
  InitKind init = InitKind::kUniform;
  double value = 0.0;  // constant for kConstant, bound for kUniform
};

// Every tensor the model expects for `cfg`, in canonical order.
std::vector<ParamSpec> ParamLayout(const SepConfig& cfg);

class ModelParams {
 public:
  ModelParams() = default;

  bool contains(const std::string& name) const { return index_.count(name) > 0; }
  const Tensor& at(const std::string& name) const;
  // Replaces an existing tensor; the shape must not change.
  void set(const std::string& name, Tensor value);
  // Adds a new tensor (used while building a layout).
  void add(const std::string& name, Tensor value);

  const std::vector<std::string>& names() const { return names_; }
  size_t size() const { return names_.size(); }
  int64_t scalar_count() const;
  // Scalar count of tensors whose name starts with `prefix`.
  int64_t scalar_count(const std::string& prefix) const;

  // Copy whose tensors are leaves on `tape`.
  ModelParams Watched(autodiff::Tape& tape) const;
  // Deep copy with independent storage.
  ModelParams Clone() const;

 private:
  std::vector<std::string> names_;
  std::vector<Tensor> values_;
  std::unordered_map<std::string, size_t> index_;
};

// Deterministic initialization from `seed`.
ModelParams InitParams(const SepConfig& cfg, uint64_t seed);

// Builds an SRU cell view over the tensors stored under `prefix`.
sru::SruCell CellFrom(const ModelParams& params, const std::string& prefix);
sru::GroupedSru GroupedFrom(const ModelParams& params, const std::string& prefix, int64_t groups,
                            sru::Direction direction);

void SaveWeights(const std::string& path, const ModelParams& params);
// Validates that the file holds exactly the tensors of ParamLayout(cfg).
ModelParams LoadWeights(const std::string& path, const SepConfig& cfg);
// Reads names and shapes without a config (used by profilers and tests).
ModelParams ReadWeightsFile(const std::string& path);

}  // namespace swiftnet
