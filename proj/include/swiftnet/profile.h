// Copyright 2026 The swiftnet-cpp Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

// Parameter and multiply-accumulate accounting, and wall-clock latency.
//
// MAC convention: convolutions and linear maps cost C_out * C_in * prod(k) per
// output position (transposed convolutions per input position); an SRU step
// costs the cell's weight count per sequence position; attention costs
// 4 C_a^2 per position for the projections plus 2 C_a per visible key per
// query. Softmax, sigmoid, normalization and elementwise ops are free.

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "swiftnet/config.h"
#include "swiftnet/model.h"

namespace swiftnet::profile {

struct CostReport {
  std::string name;
  int64_t params = 0;
  int64_t macs = 0;
  double latency_ms = -1;  // negative when not measured
  std::vector<CostReport> breakdown;  // sums to params and macs when non-empty
};

// Exact scalar count of a weight bundle.
int64_t CountParams(const ModelParams& params);
// Count implied by the config's layout (no weights needed).
int64_t CountParams(const SepConfig& cfg);

// C_in * C_out * kernel elements per position.
int64_t ConvMacs(int64_t c_in, int64_t c_out, int64_t kernel, int64_t positions);

// Per-module report for one forward pass over `samples` input samples (video
// frames follow from the configured rate). Params come from the layout.
CostReport Analyze(const SepConfig& cfg, int64_t samples);
int64_t CountMacs(const SepConfig& cfg, int64_t samples);

// Median wall-clock milliseconds of a batch forward over `seconds` of audio,
// after `warmup` untimed runs.
double MeasureLatency(const Model& model, double seconds = 2.0, int reps = 3, int warmup = 1);

// `name value unit` lines, breakdown entries prefixed with their parents.
std::string FormatReport(const CostReport& r);

}  // namespace swiftnet::profile
