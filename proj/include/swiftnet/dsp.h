// Copyright 2026 The swiftnet-cpp Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

// Causal short-time Fourier analysis and synthesis.
//
// The waveform is left-padded with (win_len - hop) zeros and right-padded to a
// hop multiple, so frame t spans original samples
// [t*hop - (win_len - hop), t*hop + hop) and a signal of T samples yields
// ceil(T / hop) frames. Spectrograms are [frames x bins] tensors.

#pragma once

#include <complex>
#include <vector>

#include "swiftnet/tensor.h"

namespace swiftnet::dsp {

struct StftConfig {
  int win_len = 256;
  int hop = 128;
  int sample_rate = 16000;

  int num_bins() const { return win_len / 2 + 1; }
  // Frames produced for `samples` input samples.
  int64_t num_frames(int64_t samples) const { return (samples + hop - 1) / hop; }
  void Validate() const;
};

// Periodic Hann window, w[n] = 0.5 - 0.5 cos(2 pi n / N).
std::vector<double> HannWindow(int n);

// In-place radix-2 FFT; size must be a power of two.
void Fft(std::vector<std::complex<double>>& a, bool inverse);
// Real input of length n (power of two) -> n/2 + 1 bins.
std::vector<std::complex<double>> Rfft(const std::vector<double>& x);
// Hermitian half spectrum of n/2 + 1 bins -> n real samples, scaled by 1/n.
// Imaginary parts of the DC and Nyquist bins are ignored.
std::vector<double> Irfft(const std::vector<std::complex<double>>& spec, int n);

struct Spectrogram {
  Tensor real;  // [T' x F]
  Tensor imag;
};

// Analysis of a waveform given as [T] or [1 x T]. The input is treated as
// data; no gradient is recorded.
Spectrogram Stft(const Tensor& waveform, const StftConfig& cfg);

// Windowed overlap-add synthesis, normalized by the summed squared window
// (zero where that sum is below 1e-8), trimmed to out_len. Differentiable in
// both spectrogram inputs. Returns [1 x out_len].
Tensor Istft(const Tensor& real, const Tensor& imag, const StftConfig& cfg, int64_t out_len);

// Elementwise magnitude sqrt(re^2 + im^2).
Tensor PowerSpec(const Tensor& real, const Tensor& imag);

// [3 x T' x F] with channel order (power, real, imag).
Tensor StackFeatures(const Tensor& power, const Tensor& real, const Tensor& imag);

// Incremental analysis. Push any number of samples; every completed frame is
// returned as a pair of [F] vectors. Finish() zero-pads a partial hop.
class StreamingStft {
 public:
  explicit StreamingStft(const StftConfig& cfg);

  struct Frame {
    std::vector<double> real, imag;
  };
  std::vector<Frame> Push(const double* samples, size_t n);
  std::vector<Frame> Finish();

  int64_t samples_seen() const { return samples_seen_; }
  int64_t frames_emitted() const { return frames_emitted_; }
  size_t buffered() const { return pending_.size(); }

 private:
  Frame Analyze();

  StftConfig cfg_;
  std::vector<double> window_;
  std::vector<double> history_;  // last win_len - hop samples
  std::vector<double> pending_;  // < hop samples waiting for a full hop
  int64_t samples_seen_ = 0;
  int64_t frames_emitted_ = 0;
};

// Incremental overlap-add. Each pushed frame finalizes one hop of output;
// the first (win_len - hop) padded samples are dropped. Finish() emits the
// trailing region covered by fewer frames.
class StreamingIstft {
 public:
  explicit StreamingIstft(const StftConfig& cfg);

  std::vector<double> Push(const double* real, const double* imag);
  std::vector<double> Finish();

  int64_t samples_emitted() const { return samples_emitted_; }

 private:
  std::vector<double> TakeBlock(int64_t count);

  StftConfig cfg_;
  std::vector<double> window_;
  std::vector<double> acc_;   // overlap-add numerator, win_len samples
  std::vector<double> wsum_;  // summed squared window, win_len samples
  int64_t to_skip_;
  int64_t samples_emitted_ = 0;
};

}  // namespace swiftnet::dsp
