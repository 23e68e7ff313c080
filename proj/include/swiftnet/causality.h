// Copyright 2026 The swiftnet-cpp Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

// Perturbation-based causality check for waveform-to-waveform systems.
//
// Each trial draws a random signal and a hop-aligned cut c, replaces every
// sample at or after c with fresh noise, and finds the first output index that
// moved by more than the tolerance. The trial's lookback is how far before the
// cut that index lies (zero when nothing before c changed). The measured
// latency is the largest lookback; a trial whose lookback exceeds the allowed
// bound is a violation.

#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "swiftnet/model.h"
#include "swiftnet/tensor.h"

namespace swiftnet::causality {

// [1 x T] -> [1 x T]. Must be deterministic.
using WaveFn = std::function<Tensor(const Tensor&)>;

struct Options {
  int trials = 100;
  int64_t hop = 128;
  // Signal lengths are drawn from [min_hops, max_hops] hops.
  int64_t min_hops = 32;
  int64_t max_hops = 48;
  double tolerance = 1e-12;
  // Largest lookback (samples) that is not a violation.
  int64_t bound = 0;
  uint64_t seed = 1;
};

struct Trial {
  int64_t length = 0;
  int64_t cut = 0;
  int64_t first_changed = 0;  // == length when no output changed
  int64_t lookback = 0;
  double prefix_violation = 0;  // max |diff| before cut - bound
};

struct Report {
  std::vector<Trial> trials;
  int64_t latency_samples = 0;
  int64_t latency_frames = 0;  // ceil(latency / hop)
  bool constant = true;        // every trial saw the same lookback
  int64_t bound = 0;
  double max_prefix_violation = 0;
  int violations = 0;
  bool violation() const { return violations > 0; }
};

Report Verify(const WaveFn& fn, const Options& opt);

// Batch forward of `model` with deterministic random visual features sized to
// each trial's length.
WaveFn ModelFn(const Model& model, uint64_t visual_seed = 7);

// Default harness for a separator: bound = win_len - hop (the analysis frame
// reaches one hop past its synthesis block).
Options ModelOptions(const SepConfig& cfg, int trials, uint64_t seed);

// `name value unit` lines plus one line per trial.
std::string FormatReport(const Report& r);

}  // namespace swiftnet::causality
