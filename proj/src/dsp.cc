// Copyright 2026 The swiftnet-cpp Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "swiftnet/dsp.h"

#include <cmath>
#include <numbers>

#include "swiftnet/autodiff.h"
#include "swiftnet/ops.h"

namespace swiftnet::dsp {
namespace {

constexpr double kWsumFloor = 1e-8;

bool IsPowerOfTwo(int n) { return n > 0 && (n & (n - 1)) == 0; }

const double* WaveformData(const Tensor& x, int64_t& length) {
  if (!x.defined() || x.numel() == 0) throw ShapeError("empty waveform");
  if (x.rank() == 1) {
    length = x.dim(0);
  } else if (x.rank() == 2 && x.dim(0) == 1) {
    length = x.dim(1);
  } else {
    throw ShapeError("waveform must be [T] or [1 x T], got " + ShapeString(x.shape()));
  }
  return x.ptr();
}

// Squared-window sum over the padded signal of `frames` frames.
std::vector<double> WindowSquareSum(const std::vector<double>& w, int hop, int64_t frames) {
  const int win = static_cast<int>(w.size());
  std::vector<double> s((frames - 1) * hop + win, 0.0);
  for (int64_t t = 0; t < frames; ++t)
    for (int n = 0; n < win; ++n) s[t * hop + n] += w[n] * w[n];
  return s;
}

}  // namespace

void StftConfig::Validate() const {
  if (!IsPowerOfTwo(win_len)) throw ConfigError("win_len must be a power of two");
  if (hop <= 0 || hop > win_len || win_len % hop != 0)
    throw ConfigError("hop must divide win_len");
  if (sample_rate <= 0) throw ConfigError("sample_rate must be positive");
}

std::vector<double> HannWindow(int n) {
  std::vector<double> w(n);
  for (int i = 0; i < n; ++i) w[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * i / n);
  return w;
}

void Fft(std::vector<std::complex<double>>& a, bool inverse) {
  const int n = static_cast<int>(a.size());
  if (!IsPowerOfTwo(n)) throw ShapeError("FFT size must be a power of two");
  for (int i = 1, j = 0; i < n; ++i) {
    int bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  for (int len = 2; len <= n; len <<= 1) {
    const double ang = 2.0 * std::numbers::pi / len * (inverse ? 1.0 : -1.0);
    for (int i = 0; i < n; i += len) {
      for (int k = 0; k < len / 2; ++k) {
        const std::complex<double> wk(std::cos(ang * k), std::sin(ang * k));
        const std::complex<double> u = a[i + k];
        const std::complex<double> v = a[i + k + len / 2] * wk;
        a[i + k] = u + v;
        a[i + k + len / 2] = u - v;
      }
    }
  }
}

std::vector<std::complex<double>> Rfft(const std::vector<double>& x) {
  const int n = static_cast<int>(x.size());
  std::vector<std::complex<double>> a(x.begin(), x.end());
  Fft(a, false);
  a.resize(n / 2 + 1);
  return a;
}

std::vector<double> Irfft(const std::vector<std::complex<double>>& spec, int n) {
  if (static_cast<int>(spec.size()) != n / 2 + 1)
    throw ShapeError("irfft expects n/2 + 1 bins");
  std::vector<std::complex<double>> a(n);
  a[0] = spec[0].real();
  a[n / 2] = spec[n / 2].real();
  for (int k = 1; k < n / 2; ++k) {
    a[k] = spec[k];
    a[n - k] = std::conj(spec[k]);
  }
  Fft(a, true);
  std::vector<double> x(n);
  for (int i = 0; i < n; ++i) x[i] = a[i].real() / n;
  return x;
}

Spectrogram Stft(const Tensor& waveform, const StftConfig& cfg) {
  cfg.Validate();
  int64_t len = 0;
  const double* x = WaveformData(waveform, len);
  const int win = cfg.win_len, hop = cfg.hop, bins = cfg.num_bins();
  const int64_t frames = cfg.num_frames(len);
  const int64_t lead = win - hop;
  const std::vector<double> w = HannWindow(win);

  Tensor re({frames, bins}), im({frames, bins});
  std::vector<double> buf(win);
  for (int64_t t = 0; t < frames; ++t) {
    const int64_t start = t * hop - lead;
    for (int n = 0; n < win; ++n) {
      const int64_t s = start + n;
      buf[n] = (s >= 0 && s < len) ? x[s] * w[n] : 0.0;
    }
    const auto spec = Rfft(buf);
    for (int k = 0; k < bins; ++k) {
      re.mutable_ptr()[t * bins + k] = spec[k].real();
      im.mutable_ptr()[t * bins + k] = spec[k].imag();
    }
  }
  return {re, im};
}

Tensor Istft(const Tensor& real, const Tensor& imag, const StftConfig& cfg, int64_t out_len) {
  cfg.Validate();
  if (real.rank() != 2 || real.shape() != imag.shape() || real.dim(1) != cfg.num_bins())
    throw ShapeError("istft expects matching [T' x " + std::to_string(cfg.num_bins()) +
                     "] inputs, got " + ShapeString(real.shape()) + " and " +
                     ShapeString(imag.shape()));
  const int win = cfg.win_len, hop = cfg.hop, bins = cfg.num_bins();
  const int64_t frames = real.dim(0);
  const int64_t lead = win - hop;
  if (out_len < 1 || out_len > frames * hop)
    throw ShapeError("istft out_len " + std::to_string(out_len) + " exceeds the " +
                     std::to_string(frames * hop) + " synthesizable samples");
  const std::vector<double> w = HannWindow(win);
  const std::vector<double> wsum = WindowSquareSum(w, hop, frames);

  std::vector<double> acc(wsum.size(), 0.0);
  std::vector<std::complex<double>> spec(bins);
  for (int64_t t = 0; t < frames; ++t) {
    for (int k = 0; k < bins; ++k)
      spec[k] = {real.ptr()[t * bins + k], imag.ptr()[t * bins + k]};
    const std::vector<double> frame = Irfft(spec, win);
    for (int n = 0; n < win; ++n) acc[t * hop + n] += frame[n] * w[n];
  }
  Tensor y({1, out_len});
  for (int64_t s = 0; s < out_len; ++s) {
    const double d = wsum[s + lead];
    y.mutable_ptr()[s] = d < kWsumFloor ? 0.0 : acc[s + lead] / d;
  }
  if (!autodiff::NeedsRecord({&real, &imag})) return y;

  return autodiff::Record(y, {real, imag}, [=](const Tensor& g) {
    Tensor gr({frames, bins}), gi({frames, bins});
    std::vector<double> gpad(wsum.size(), 0.0);
    for (int64_t s = 0; s < out_len; ++s) {
      const double d = wsum[s + lead];
      gpad[s + lead] = d < kWsumFloor ? 0.0 : g.ptr()[s] / d;
    }
    std::vector<double> buf(win);
    for (int64_t t = 0; t < frames; ++t) {
      for (int n = 0; n < win; ++n) buf[n] = gpad[t * hop + n] * w[n];
      const auto spec = Rfft(buf);
      for (int k = 0; k < bins; ++k) {
        const double c = (k == 0 || k == win / 2) ? 1.0 : 2.0;
        gr.mutable_ptr()[t * bins + k] = c / win * spec[k].real();
        gi.mutable_ptr()[t * bins + k] = c / win * spec[k].imag();
      }
    }
    return std::vector<Tensor>{gr, gi};
  }, "istft");
}

Tensor PowerSpec(const Tensor& real, const Tensor& imag) {
  if (real.shape() != imag.shape())
    throw ShapeError("power_spec shape mismatch " + ShapeString(real.shape()) + " vs " +
                     ShapeString(imag.shape()));
  Tensor g(real.shape());
  for (int64_t i = 0; i < real.numel(); ++i)
    g.mutable_ptr()[i] = std::sqrt(real.ptr()[i] * real.ptr()[i] + imag.ptr()[i] * imag.ptr()[i]);
  return g;
}

Tensor StackFeatures(const Tensor& power, const Tensor& real, const Tensor& imag) {
  if (power.shape() != real.shape() || power.shape() != imag.shape() || power.rank() != 2)
    throw ShapeError("stack_features needs three equal [T' x F] inputs, got " +
                     ShapeString(power.shape()) + ", " + ShapeString(real.shape()) + ", " +
                     ShapeString(imag.shape()));
  Shape s{1, power.dim(0), power.dim(1)};
  return ops::Concat({power.view(s), real.view(s), imag.view(s)}, 0);
}

StreamingStft::StreamingStft(const StftConfig& cfg)
    : cfg_(cfg), window_(HannWindow(cfg.win_len)), history_(cfg.win_len - cfg.hop, 0.0) {
  cfg_.Validate();
}

StreamingStft::Frame StreamingStft::Analyze() {
  const int win = cfg_.win_len;
  std::vector<double> buf(win);
  const size_t h = history_.size();
  for (size_t n = 0; n < h; ++n) buf[n] = history_[n] * window_[n];
  for (int n = 0; n < cfg_.hop; ++n) buf[h + n] = pending_[n] * window_[h + n];
  const auto spec = Rfft(buf);
  Frame f;
  f.real.resize(spec.size());
  f.imag.resize(spec.size());
  for (size_t k = 0; k < spec.size(); ++k) {
    f.real[k] = spec[k].real();
    f.imag[k] = spec[k].imag();
  }
  // Slide: history keeps the most recent win_len - hop samples.
  std::vector<double> joined(history_);
  joined.insert(joined.end(), pending_.begin(), pending_.begin() + cfg_.hop);
  history_.assign(joined.end() - h, joined.end());
  pending_.erase(pending_.begin(), pending_.begin() + cfg_.hop);
  ++frames_emitted_;
  return f;
}

std::vector<StreamingStft::Frame> StreamingStft::Push(const double* samples, size_t n) {
  pending_.insert(pending_.end(), samples, samples + n);
  samples_seen_ += static_cast<int64_t>(n);
  std::vector<Frame> out;
  while (pending_.size() >= static_cast<size_t>(cfg_.hop)) out.push_back(Analyze());
  return out;
}

std::vector<StreamingStft::Frame> StreamingStft::Finish() {
  std::vector<Frame> out;
  if (!pending_.empty()) {
    pending_.resize(cfg_.hop, 0.0);
    out.push_back(Analyze());
  }
  return out;
}

StreamingIstft::StreamingIstft(const StftConfig& cfg)
    : cfg_(cfg),
      window_(HannWindow(cfg.win_len)),
      acc_(cfg.win_len, 0.0),
      wsum_(cfg.win_len, 0.0),
      to_skip_(cfg.win_len - cfg.hop) {
  cfg_.Validate();
}

std::vector<double> StreamingIstft::TakeBlock(int64_t count) {
  std::vector<double> block;
  for (int64_t n = 0; n < count; ++n) {
    if (to_skip_ > 0) {
      --to_skip_;
      continue;
    }
    block.push_back(wsum_[n] < kWsumFloor ? 0.0 : acc_[n] / wsum_[n]);
  }
  samples_emitted_ += static_cast<int64_t>(block.size());
  return block;
}

std::vector<double> StreamingIstft::Push(const double* real, const double* imag) {
  const int win = cfg_.win_len, hop = cfg_.hop, bins = cfg_.num_bins();
  std::vector<std::complex<double>> spec(bins);
  for (int k = 0; k < bins; ++k) spec[k] = {real[k], imag[k]};
  const std::vector<double> frame = Irfft(spec, win);
  for (int n = 0; n < win; ++n) {
    acc_[n] += frame[n] * window_[n];
    wsum_[n] += window_[n] * window_[n];
  }
  std::vector<double> block = TakeBlock(hop);
  acc_.erase(acc_.begin(), acc_.begin() + hop);
  wsum_.erase(wsum_.begin(), wsum_.begin() + hop);
  acc_.resize(win, 0.0);
  wsum_.resize(win, 0.0);
  return block;
}

std::vector<double> StreamingIstft::Finish() {
  std::vector<double> tail = TakeBlock(cfg_.win_len - cfg_.hop);
  std::fill(acc_.begin(), acc_.end(), 0.0);
  std::fill(wsum_.begin(), wsum_.end(), 0.0);
  return tail;
}

}  // namespace swiftnet::dsp
