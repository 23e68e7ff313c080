// Copyright 2026 The swiftnet-cpp Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

// Separator blocks and full-utterance forward pass.
//
// Audio features are [channels x frames x bins]; visual features are
// [C_v x T_v] at video rate. Pipeline:
//   stft -> (power, real, imag) -> 1x1 conv -> per-frame norm -> PReLU = E0
//   E0 -> bottleneck -> FTGS -> SAF(LightVid(E_v)) -> (N-1) x FTGS
//      -> mask head -> complex mask against E0 -> transposed conv -> istft

#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "swiftnet/config.h"
#include "swiftnet/params.h"
#include "swiftnet/tensor.h"

namespace swiftnet {

struct Model {
  SepConfig cfg;
  ModelParams params;

  static Model Create(const SepConfig& cfg, uint64_t seed);
  // Validates the weights against cfg.
  static Model Load(const std::string& path, const SepConfig& cfg);
};

// Video frame used by audio frame t: zero-order hold at the configured rate,
// clamped to the last available frame. Equals nearest-neighbour interpolation
// when frames == frames_per_video * video_frames.
std::vector<int64_t> VideoIndex(int64_t frames, int64_t video_frames, int64_t frames_per_video);

// waveform [T] or [1 x T] -> E0 [enc_channels x T' x F].
Tensor EncodeAudio(const Model& m, const Tensor& waveform);
// Stacked (power, real, imag) [3 x T' x F] -> E0. Frame-local.
Tensor EncodeFeatures(const Model& m, const Tensor& stacked);
// E0 -> [C_a x T' x F].
Tensor Bottleneck(const Model& m, const Tensor& e0);

// [C_v x T_v] -> [C_v x T_v].
Tensor LightVid(const Model& m, const Tensor& ev);

// [C_a x T x F] -> [C_a x T x F] with the single shared FTGS weight set.
Tensor Ftgs(const Model& m, const Tensor& e);

// Refined visual features modulate audio features: E * gamma + beta, with
// (gamma, beta) held per video frame and broadcast over frequency.
Tensor Saf(const Model& m, const Tensor& ev_bar, const Tensor& e1);
// (gamma, beta) at video rate, each [C_a x T_v].
std::pair<Tensor, Tensor> SafModulation(const Model& m, const Tensor& ev_bar);

// E_N [C_a x T x F] -> (M_r, M_i), each [enc_channels/2 x T x F].
std::pair<Tensor, Tensor> MaskHead(const Model& m, const Tensor& e);

// Complex product (E_r + j E_i)(M_r + j M_i).
std::pair<Tensor, Tensor> ComplexMultiply(const Tensor& er, const Tensor& ei, const Tensor& mr,
                                          const Tensor& mi);
// Splits E0 into channel halves (real first) and applies the mask.
std::pair<Tensor, Tensor> ComplexMask(const Tensor& e0, const Tensor& mr, const Tensor& mi);

// (R_r, R_i) -> estimated spectrogram (real, imag), each [T' x F].
std::pair<Tensor, Tensor> DecodeSpectrum(const Model& m, const Tensor& rr, const Tensor& ri);
// (R_r, R_i) -> waveform [1 x out_len].
Tensor Decode(const Model& m, const Tensor& rr, const Tensor& ri, int64_t out_len);

// waveform [T] or [1 x T], visual [C_v x T_v] -> estimate [1 x T].
Tensor Forward(const Model& m, const Tensor& waveform, const Tensor& ev);

namespace blocks {

std::optional<Tensor> Bias(const ModelParams& p, const std::string& name);
// Normalize over `axes`, then gain and optional bias.
Tensor AffineNorm(const ModelParams& p, const Tensor& x, const std::string& prefix,
                  const std::vector<int>& axes, int time_axis);

// FTGS stages, exposed for the frame-incremental runtime.
Tensor FtgsDown(const Model& m, const Tensor& e);
// A0 [C_a x T_d x F_d] -> A_f; frame-local.
Tensor FtgsFreqPath(const Model& m, const Tensor& a0);
// A_f [C_a x T_d x F_d] -> A_t, causal along frames.
Tensor FtgsTimePath(const Model& m, const Tensor& af);
// [C_a x T x F] per-bin causal attention + feed-forward.
Tensor FtgsAttention(const Model& m, const Tensor& at);
// Feed-forward sublayer over the last axis of x [..., C_a], with residual.
Tensor FtgsFeedForward(const Model& m, const Tensor& x);
// Gate from the block input; E + sigmoid(gate(E)) * up.
Tensor FtgsReconstruct(const Model& m, const Tensor& e, const Tensor& up);

}  // namespace blocks

}  // namespace swiftnet
