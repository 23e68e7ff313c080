// Copyright 2026 The swiftnet-cpp Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <cstdint>
#include <string>
#include <utility>

#include "swiftnet/dsp.h"

namespace swiftnet {

struct SepConfig {
  int64_t audio_channels = 64;       // C_a, separator width
  int64_t enc_channels = 384;        // encoder embedding, split in half for the complex mask
  int64_t visual_channels = 512;     // C_v
  int64_t lightvid_channels = 64;    // C_h
  int64_t lightvid_sru_hidden = 64;
  int64_t groups = 2;                // G
  int64_t repeats = 6;               // N
  int64_t heads = 4;
  int64_t hid_freq = 32;             // per direction, summed over groups
  int64_t hid_time = 64;             // summed over groups
  int64_t unfold_kernel = 8;
  int64_t ffn_hidden = 256;
  int64_t dec_kernel_time = 3;
  int64_t dec_kernel_freq = 3;
  bool use_bias = true;
  // Debug switch: runs the FTGS time path as a bidirectional scan. The
  // resulting model is not causal; it exists for negative controls.
  bool time_bidirectional = false;
  dsp::StftConfig stft;
  int video_fps = 25;

  // Throws ConfigError naming the violated invariant.
  void Validate() const;
  // Audio frames per video frame (5 at 16 kHz / hop 128 / 25 fps).
  int64_t frames_per_video() const;
  // Small widths for gradient checks and the toy trainer.
  static SepConfig Toy();
};

struct TrainConfig {
  double lr = 1e-3;
  double weight_decay = 0.1;
  int plateau_patience = 5;
  double lr_decay = 0.5;
  int epochs = 50;
  int batch_size = 1;
  uint64_t seed = 1;
  double grad_clip = 5.0;  // global norm; <= 0 disables
  double crop_seconds = 0.0;  // random training crops; 0 uses whole utterances

  void Validate() const;
};

// Parses `key = value` lines; `#` starts a comment. Unknown keys, malformed
// values and invariant violations raise ConfigError.
std::pair<SepConfig, TrainConfig> ParseConfig(const std::string& text);
std::pair<SepConfig, TrainConfig> LoadConfig(const std::string& path);
std::string FormatConfig(const SepConfig& sep, const TrainConfig& train);

}  // namespace swiftnet
