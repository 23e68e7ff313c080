// Copyright 2026 The swiftnet-cpp Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "swiftnet/model.h"

#include <algorithm>

#include "swiftnet/causal.h"
#include "swiftnet/dsp.h"
#include "swiftnet/ops.h"
#include "swiftnet/sru.h"

namespace swiftnet {

using ops::Add;
using ops::Conv;
using ops::Mul;
using ops::Permute;

namespace blocks {

std::optional<Tensor> Bias(const ModelParams& p, const std::string& name) {
  if (!p.contains(name)) return std::nullopt;
  return p.at(name);
}

Tensor AffineNorm(const ModelParams& p, const Tensor& x, const std::string& prefix,
                  const std::vector<int>& axes, int time_axis) {
  for (int a : axes)
    if (a == time_axis) throw CausalityError("normalization over the time axis mixes time steps");
  Tensor y = Mul(ops::Normalize(x, axes), p.at(prefix + ".gain"));
  if (auto b = Bias(p, prefix + ".bias")) y = Add(y, *b);
  return y;
}

Tensor FtgsDown(const Model& m, const Tensor& e) {
  ops::ConvSpec spec;
  spec.stride = {2, 2};
  return Conv(e, m.params.at("ftgs.down.w"), Bias(m.params, "ftgs.down.b"), spec);
}

Tensor FtgsFreqPath(const Model& m, const Tensor& a0) {
  const auto& p = m.params;
  const int64_t k = m.cfg.unfold_kernel;
  Tensor windows = ops::Unfold(ops::Pad(a0, 2, 0, k - 1), 2, k);  // [k C_a x T_d x F_d]
  Tensor seq = Permute(windows, {1, 2, 0});                        // frames x bins x ch
  sru::ScanOptions opt;
  opt.direction = sru::Direction::kBi;
  opt.axis = sru::Axis::kFreq;
  const auto gsru = GroupedFrom(p, "ftgs.freq", m.cfg.groups, sru::Direction::kBi);
  Tensor h = sru::GroupedScanBatched(gsru, seq, opt);  // [T_d x F_d x 2 hid_freq]
  Tensor hc = Permute(h, {2, 0, 1});
  ops::TransposedConvSpec fold;
  fold.trim_after = {0, k - 1};
  Tensor folded = ops::TransposedConv(hc, p.at("ftgs.freq.fold.w"),
                                      Bias(p, "ftgs.freq.fold.b"), fold);
  return Add(folded, a0);
}

Tensor FtgsTimePath(const Model& m, const Tensor& af) {
  const auto& p = m.params;
  const int64_t k = m.cfg.unfold_kernel;
  Tensor windows = ops::Unfold(ops::Pad(af, 1, k - 1, 0), 1, k);  // window t ends at t
  Tensor seq = Permute(windows, {2, 1, 0});                        // bins x frames x ch
  sru::ScanOptions opt;
  opt.axis = sru::Axis::kTime;
  opt.direction = m.cfg.time_bidirectional ? sru::Direction::kBi : sru::Direction::kUni;
  opt.allow_noncausal = m.cfg.time_bidirectional;
  const auto gsru = GroupedFrom(p, "ftgs.time", m.cfg.groups, opt.direction);
  Tensor h = sru::GroupedScanBatched(gsru, seq, opt);  // [F_d x T_d x H]
  Tensor hc = Permute(h, {2, 1, 0});
  ops::TransposedConvSpec fold;
  fold.trim_after = {k - 1, 0};
  Tensor folded = ops::TransposedConv(hc, p.at("ftgs.time.fold.w"),
                                      Bias(p, "ftgs.time.fold.b"), fold);
  return Add(folded, af);
}

Tensor FtgsFeedForward(const Model& m, const Tensor& x) {
  const auto& p = m.params;
  Tensor hidden = ops::Linear(x, p.at("ftgs.ffn.w1"), Bias(p, "ftgs.ffn.b1"));
  hidden = ops::PRelu(hidden, p.at("ftgs.ffn.prelu"));
  return Add(x, ops::Linear(hidden, p.at("ftgs.ffn.w2"), Bias(p, "ftgs.ffn.b2")));
}

Tensor FtgsAttention(const Model& m, const Tensor& at) {
  const auto& p = m.params;
  Tensor x = Permute(at, {2, 1, 0});  // bins x frames x C_a
  auto proj = [&](const char* name, const Tensor& in) {
    const std::string base = std::string("ftgs.attn.") + name;
    return ops::Linear(in, p.at(base + ".w"), Bias(p, base + ".b"));
  };
  Tensor att = causal::CausalAttention(proj("q", x), proj("k", x), proj("v", x),
                                       static_cast<int>(m.cfg.heads));
  Tensor x1 = Add(x, proj("o", att));
  return Permute(FtgsFeedForward(m, x1), {2, 1, 0});
}

Tensor FtgsReconstruct(const Model& m, const Tensor& e, const Tensor& up) {
  Tensor gate = ops::Sigmoid(Conv(e, m.params.at("ftgs.gate.w"), Bias(m.params, "ftgs.gate.b")));
  return Add(e, Mul(gate, up));
}

}  // namespace blocks

using blocks::Bias;

Model Model::Create(const SepConfig& cfg, uint64_t seed) { return {cfg, InitParams(cfg, seed)}; }

Model Model::Load(const std::string& path, const SepConfig& cfg) {
  return {cfg, LoadWeights(path, cfg)};
}

std::vector<int64_t> VideoIndex(int64_t frames, int64_t video_frames, int64_t frames_per_video) {
  if (frames < 1 || video_frames < 1 || frames_per_video < 1)
    throw ShapeError("video alignment needs positive lengths");
  std::vector<int64_t> idx(frames);
  for (int64_t t = 0; t < frames; ++t) idx[t] = std::min(t / frames_per_video, video_frames - 1);
  return idx;
}

Tensor EncodeFeatures(const Model& m, const Tensor& stacked) {
  const auto& p = m.params;
  Tensor e = Conv(stacked, p.at("enc.conv.w"), Bias(p, "enc.conv.b"));
  e = blocks::AffineNorm(p, e, "enc.norm", {0, 2}, 1);
  return ops::PRelu(e, p.at("enc.prelu"));
}

Tensor EncodeAudio(const Model& m, const Tensor& waveform) {
  const auto spec = dsp::Stft(waveform, m.cfg.stft);
  const Tensor power = dsp::PowerSpec(spec.real, spec.imag);
  return EncodeFeatures(m, dsp::StackFeatures(power, spec.real, spec.imag));
}

Tensor Bottleneck(const Model& m, const Tensor& e0) {
  return Conv(e0, m.params.at("bottleneck.w"), Bias(m.params, "bottleneck.b"));
}

Tensor LightVid(const Model& m, const Tensor& ev) {
  const auto& p = m.params;
  if (ev.rank() != 2 || ev.dim(0) != m.cfg.visual_channels)
    throw ShapeError("visual features must be [" + std::to_string(m.cfg.visual_channels) +
                     " x T_v], got " + ShapeString(ev.shape()));
  Tensor x = Mul(ev, p.at("lv.dw.scale"));
  if (auto b = Bias(p, "lv.dw.bias")) x = Add(x, *b);
  x = blocks::AffineNorm(p, x, "lv.norm", {0}, 1);
  x = Conv(x, p.at("lv.down.w"), Bias(p, "lv.down.b"));
  x = sru::SruScan(CellFrom(p, "lv.sru"), x);
  x = Conv(x, p.at("lv.up.w"), Bias(p, "lv.up.b"));
  return Add(ev, x);
}

Tensor Ftgs(const Model& m, const Tensor& e) {
  if (e.rank() != 3 || e.dim(0) != m.cfg.audio_channels)
    throw ShapeError("FTGS input must be [" + std::to_string(m.cfg.audio_channels) +
                     " x T x F], got " + ShapeString(e.shape()));
  Tensor a0 = blocks::FtgsDown(m, e);
  Tensor af = blocks::FtgsFreqPath(m, a0);
  Tensor at = blocks::FtgsTimePath(m, af);
  Tensor att = blocks::FtgsAttention(m, at);
  Tensor up = ops::InterpNearest(ops::InterpNearest(att, 1, e.dim(1)), 2, e.dim(2));
  return blocks::FtgsReconstruct(m, e, up);
}

std::pair<Tensor, Tensor> SafModulation(const Model& m, const Tensor& ev_bar) {
  const int64_t ca = m.cfg.audio_channels;
  Tensor gb = Conv(ev_bar, m.params.at("saf.w"), Bias(m.params, "saf.b"));
  return {ops::Slice(gb, 0, 0, ca), ops::Slice(gb, 0, ca, ca)};
}

Tensor Saf(const Model& m, const Tensor& ev_bar, const Tensor& e1) {
  auto [gamma, beta] = SafModulation(m, ev_bar);
  const int64_t ca = e1.dim(0), t = e1.dim(1);
  const auto idx = VideoIndex(t, gamma.dim(1), m.cfg.frames_per_video());
  gamma = ops::Reshape(ops::IndexSelect(gamma, 1, idx), {ca, t, 1});
  beta = ops::Reshape(ops::IndexSelect(beta, 1, idx), {ca, t, 1});
  return Add(Mul(e1, gamma), beta);
}

std::pair<Tensor, Tensor> MaskHead(const Model& m, const Tensor& e) {
  const auto& p = m.params;
  Tensor x = ops::PRelu(e, p.at("mask.prelu"));
  x = Conv(x, p.at("mask.conv.w"), Bias(p, "mask.conv.b"));
  return {Conv(x, p.at("mask.real.w"), Bias(p, "mask.real.b")),
          Conv(x, p.at("mask.imag.w"), Bias(p, "mask.imag.b"))};
}

std::pair<Tensor, Tensor> ComplexMultiply(const Tensor& er, const Tensor& ei, const Tensor& mr,
                                          const Tensor& mi) {
  if (er.shape() != ei.shape() || er.shape() != mr.shape() || er.shape() != mi.shape())
    throw ShapeError("complex mask shape mismatch: " + ShapeString(er.shape()) + ", " +
                     ShapeString(ei.shape()) + ", " + ShapeString(mr.shape()) + ", " +
                     ShapeString(mi.shape()));
  return {ops::Sub(Mul(er, mr), Mul(ei, mi)), Add(Mul(er, mi), Mul(ei, mr))};
}

std::pair<Tensor, Tensor> ComplexMask(const Tensor& e0, const Tensor& mr, const Tensor& mi) {
  const int64_t half = e0.dim(0) / 2;
  return ComplexMultiply(ops::Slice(e0, 0, 0, half), ops::Slice(e0, 0, half, half), mr, mi);
}

std::pair<Tensor, Tensor> DecodeSpectrum(const Model& m, const Tensor& rr, const Tensor& ri) {
  const int64_t kt = m.cfg.dec_kernel_time, kf = m.cfg.dec_kernel_freq;
  ops::TransposedConvSpec spec;
  spec.trim_before = {0, kf / 2};
  spec.trim_after = {kt - 1, kf / 2};
  Tensor y = ops::TransposedConv(ops::Concat({rr, ri}, 0), m.params.at("dec.w"),
                                 Bias(m.params, "dec.b"), spec);  // [2 x T x F]
  const Shape tf{y.dim(1), y.dim(2)};
  return {ops::Reshape(ops::Slice(y, 0, 0, 1), tf), ops::Reshape(ops::Slice(y, 0, 1, 1), tf)};
}

Tensor Decode(const Model& m, const Tensor& rr, const Tensor& ri, int64_t out_len) {
  auto [yr, yi] = DecodeSpectrum(m, rr, ri);
  return dsp::Istft(yr, yi, m.cfg.stft, out_len);
}

Tensor Forward(const Model& m, const Tensor& waveform, const Tensor& ev) {
  const int64_t len = waveform.numel();
  if (len == 0) throw ShapeError("empty waveform");
  // One extra hop of zeros gives the final input hop a second synthesis frame;
  // a single frame would divide it by a squared window that falls to ~2e-8.
  Tensor padded = ops::Pad(ops::Reshape(waveform, {1, len}), 1, 0, m.cfg.stft.hop);
  Tensor e0 = EncodeAudio(m, padded);
  Tensor a = Ftgs(m, Bottleneck(m, e0));
  a = Saf(m, LightVid(m, ev), a);
  for (int64_t i = 1; i < m.cfg.repeats; ++i) a = Ftgs(m, a);
  auto [mr, mi] = MaskHead(m, a);
  auto [rr, ri] = ComplexMask(e0, mr, mi);
  return Decode(m, rr, ri, len);
}

}  // namespace swiftnet
