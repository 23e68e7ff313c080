// Copyright 2026 The swiftnet-cpp Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

// Frame-incremental inference. One STFT hop is the unit of work: every
// completed analysis frame runs through the encoder, all FTGS applications,
// the mask head and the decoder, and the synthesis stage emits one hop of
// output. The concatenated emissions match Forward() on the whole input.
//
// Visual frames are queued and consumed at the configured rate with
// zero-order hold: an audio frame whose video frame has not arrived yet reuses
// the newest one. Audio frames wait (without emitting) until the first visual
// frame is available.

#pragma once

#include <cstdint>
#include <deque>
#include <span>
#include <vector>

#include "swiftnet/causal.h"
#include "swiftnet/dsp.h"
#include "swiftnet/model.h"
#include "swiftnet/tensor.h"

namespace swiftnet {

struct StreamFootprint {
  // Carries, ring buffers and analysis/synthesis buffers; independent of
  // stream duration.
  size_t fixed_bytes = 0;
  // Attention key/value caches, which grow by one entry per downsampled frame.
  size_t kv_cache_bytes = 0;
  int64_t kv_cache_entries = 0;  // per frequency bin and FTGS application
};

class StreamState {
 public:
  // The model must outlive the stream. Throws CausalityError for configs that
  // cannot run incrementally.
  static StreamState Open(const Model& model);

  // Queues visual frames, [C_v x k] (any k >= 0).
  void PushVideo(const Tensor& frames);
  // Consumes audio samples (any count; partial hops stay buffered) and returns
  // every output sample that is final.
  std::vector<double> Push(std::span<const double> samples);
  std::vector<double> Push(std::span<const double> samples, const Tensor& video) {
    PushVideo(video);
    return Push(samples);
  }
  // Flushes the partial hop plus one hop of zeros (as Forward does) and the
  // synthesis tail. Total emitted samples equal total pushed samples. The
  // stream is closed afterwards.
  std::vector<double> Finish();

  int64_t frames_processed() const { return frames_processed_; }
  int64_t samples_pushed() const { return samples_in_; }
  int64_t samples_emitted() const { return samples_emitted_; }
  int64_t video_frames_used() const { return video_used_; }
  // Input samples consumed when the first output sample was emitted (-1 before).
  int64_t first_emission_input() const { return first_emission_input_; }
  StreamFootprint footprint() const;

 private:
  struct FtgsState {
    std::deque<std::vector<double>> af_history;  // last k-1 A_f frames, [C_a x F_d] each
    std::deque<Tensor> h_history;                // last k scan outputs, [F_d x H] each
    std::vector<Tensor> carries;                 // per group, [F_d x hid/G]
    std::vector<causal::KvCache> caches;         // per downsampled bin
    Tensor att;                                  // newest attention output [C_a x 1 x F_d]
  };

  explicit StreamState(const Model& model);
  Tensor RunFtgs(FtgsState& s, const Tensor& x);
  Tensor TimePathStep(FtgsState& s, const Tensor& af);
  Tensor AttentionStep(FtgsState& s, const Tensor& at);
  void AdvanceVideo(int64_t needed);
  void ProcessFrames(std::vector<double>& out);
  std::vector<double> ProcessFrame(const dsp::StreamingStft::Frame& frame);
  void Emit(std::vector<double>& out, const std::vector<double>& block);

  const Model* model_;
  int64_t fpv_;
  int64_t bins_, bins_down_;
  std::vector<Tensor> fold_taps_;  // time fold weight per tap j, [H x C_a]

  dsp::StreamingStft stft_;
  dsp::StreamingIstft istft_;
  std::deque<dsp::StreamingStft::Frame> pending_frames_;
  std::deque<std::vector<double>> pending_video_;

  Tensor lv_carry_;  // LightVid SRU state [1 x hidden]
  std::vector<double> gamma_, beta_;
  int64_t video_used_ = 0;

  std::vector<FtgsState> ftgs_;
  std::deque<Tensor> dec_real_, dec_imag_;  // last kt-1 masked frames, [C_e/2 x 1 x F]

  int64_t samples_in_ = 0;
  int64_t frames_processed_ = 0;
  int64_t samples_emitted_ = 0;
  int64_t first_emission_input_ = -1;
  bool finished_ = false;
};

}  // namespace swiftnet
