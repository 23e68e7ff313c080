// Copyright 2026 The swiftnet-cpp Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

// Synthetic two-speaker corpus. Each "speaker" is an AM harmonic tone, a
// band-pass noise or a chirp under a slow amplitude envelope; the two speakers
// of a pair use different source kinds and disjoint envelope rate bands.
// Visual features are a fixed nonlinear map of the per-frame (40 ms) log RMS of
// a speaker's signal over the current and two previous frames.

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "swiftnet/tensor.h"

namespace swiftnet::synth {

struct SynthSpec {
  int num_pairs = 8;
  double duration_s = 2.0;
  int64_t visual_channels = 512;
  double snr_min_db = -2.5;
  double snr_max_db = 2.5;
  uint64_t seed = 1;
  int sample_rate = 16000;
  int fps = 25;

  void Validate() const;
  int64_t num_samples() const;
  int64_t num_video_frames() const;
};

// key = value text; keys are the field names above.
SynthSpec ParseSpec(const std::string& text);
SynthSpec LoadSpec(const std::string& path);

struct Pair {
  std::vector<double> mix, target, interferer;  // mix == target + interferer exactly
  Tensor target_visual, interferer_visual;     // [C_v x T_v]
  double snr_db = 0;
};

// Pure function of (spec, index).
Pair GeneratePair(const SynthSpec& spec, int index);
// Envelope features of a waveform, [channels x T_v].
Tensor VisualFeatures(const std::vector<double>& wave, int64_t channels, int sample_rate, int fps);

struct ManifestEntry {
  std::string name;
  std::string mix, target, interferer, target_visual, interferer_visual;  // relative to corpus dir
  double snr_db = 0;
};

// Writes <out>/pair_NNN/{mix,target,interferer}.wav, {target,interferer}.swnv
// and <out>/manifest.txt.
std::vector<ManifestEntry> Generate(const SynthSpec& spec, const std::string& out_dir);
std::vector<ManifestEntry> ReadManifest(const std::string& dir);

// One training example: mixture, the wanted source, and that source's visual cue.
struct Example {
  Tensor mix;     // [1 x T]
  Tensor target;  // [1 x T]
  Tensor visual;  // [C_v x T_v]
};

// Both directions of every pair (target and interferer as the wanted source).
std::vector<Example> ExamplesFromPair(const Pair& p);
std::vector<Example> LoadCorpus(const std::string& dir);

}  // namespace swiftnet::synth
