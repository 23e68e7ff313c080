// Copyright 2026 The swiftnet-cpp Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "swiftnet/stream.h"

#include <algorithm>
#include <cmath>

#include "swiftnet/ops.h"
#include "swiftnet/sru.h"

namespace swiftnet {

using blocks::Bias;

StreamState StreamState::Open(const Model& model) { return StreamState(model); }

StreamState::StreamState(const Model& model)
    : model_(&model), stft_(model.cfg.stft), istft_(model.cfg.stft) {
  const SepConfig& cfg = model.cfg;
  cfg.Validate();
  if (cfg.time_bidirectional)
    throw CausalityError("a bidirectional time path cannot run incrementally");
  for (const auto& spec : ParamLayout(cfg))
    if (!model.params.contains(spec.name) || model.params.at(spec.name).shape() != spec.shape)
      throw ShapeError("weights do not match the config at '" + spec.name + "'");

  fpv_ = cfg.frames_per_video();
  bins_ = cfg.stft.num_bins();
  bins_down_ = (bins_ + 1) / 2;
  const int64_t k = cfg.unfold_kernel, ca = cfg.audio_channels;

  // fold.w is [H x C_a x k x 1]; tap j maps h[d - j] to output frame d.
  const Tensor& fold = model.params.at("ftgs.time.fold.w");
  const int64_t h = fold.dim(0);
  for (int64_t j = 0; j < k; ++j) {
    Tensor tap({h, ca});
    for (int64_t ci = 0; ci < h; ++ci)
      for (int64_t co = 0; co < ca; ++co) tap.mutable_ptr()[ci * ca + co] = fold.at({ci, co, j, 0});
    fold_taps_.push_back(std::move(tap));
  }

  const int64_t hid_g = cfg.hid_time / cfg.groups;
  ftgs_.resize(cfg.repeats);
  for (auto& s : ftgs_) {
    for (int64_t j = 0; j + 1 < k; ++j)
      s.af_history.emplace_back(static_cast<size_t>(ca * bins_down_), 0.0);
    for (int64_t j = 0; j < k; ++j) s.h_history.push_back(Tensor::Zeros({bins_down_, h}));
    s.carries.assign(cfg.groups, Tensor::Zeros({bins_down_, hid_g}));
    s.caches.assign(bins_down_, causal::KvCache(ca, static_cast<int>(cfg.heads)));
  }

  lv_carry_ = Tensor::Zeros({1, cfg.lightvid_sru_hidden});
  const int64_t half = cfg.enc_channels / 2;
  for (int64_t j = 0; j + 1 < cfg.dec_kernel_time; ++j) {
    dec_real_.push_back(Tensor::Zeros({half, 1, bins_}));
    dec_imag_.push_back(Tensor::Zeros({half, 1, bins_}));
  }
}

void StreamState::PushVideo(const Tensor& frames) {
  if (finished_) throw Error("stream already finished");
  const int64_t cv = model_->cfg.visual_channels;
  if (frames.rank() != 2 || frames.dim(0) != cv)
    throw ShapeError("visual frames must be [" + std::to_string(cv) + " x k], got " +
                     ShapeString(frames.shape()));
  const int64_t k = frames.dim(1);
  for (int64_t t = 0; t < k; ++t) {
    std::vector<double> v(cv);
    for (int64_t c = 0; c < cv; ++c) v[c] = frames.ptr()[c * k + t];
    for (double x : v)
      if (!std::isfinite(x)) throw FormatError("visual frame contains non-finite values");
    pending_video_.push_back(std::move(v));
  }
}

// Runs LightVid and the SAF projection on queued video frames until frame
// `needed` has been consumed or the queue is empty.
void StreamState::AdvanceVideo(int64_t needed) {
  const Model& m = *model_;
  const auto& p = m.params;
  const int64_t cv = m.cfg.visual_channels;
  while (video_used_ <= needed && !pending_video_.empty()) {
    Tensor ev({cv, 1}, std::move(pending_video_.front()));
    pending_video_.pop_front();
    Tensor x = ops::Mul(ev, p.at("lv.dw.scale"));
    if (auto b = Bias(p, "lv.dw.bias")) x = ops::Add(x, *b);
    x = blocks::AffineNorm(p, x, "lv.norm", {0}, 1);
    x = ops::Conv(x, p.at("lv.down.w"), Bias(p, "lv.down.b"));  // [C_h x 1]
    Tensor next;
    Tensor h = sru::ScanBatched(CellFrom(p, "lv.sru"), x.view({1, 1, x.dim(0)}), false,
                                &lv_carry_, &next);
    lv_carry_ = next;
    x = ops::Conv(h.view({h.dim(2), 1}), p.at("lv.up.w"), Bias(p, "lv.up.b"));
    auto [gamma, beta] = SafModulation(m, ops::Add(ev, x));
    gamma_ = gamma.ToVector();
    beta_ = beta.ToVector();
    ++video_used_;
  }
}

Tensor StreamState::TimePathStep(FtgsState& s, const Tensor& af) {
  const Model& m = *model_;
  const int64_t k = m.cfg.unfold_kernel, ca = m.cfg.audio_channels, fd = bins_down_;
  // Window ending at the current frame, channel layout c * k + j as in Unfold.
  s.af_history.push_back(af.ToVector());
  Tensor win({fd, 1, k * ca});
  double* w = win.mutable_ptr();
  for (int64_t j = 0; j < k; ++j) {
    const std::vector<double>& frame = s.af_history[j];
    for (int64_t c = 0; c < ca; ++c)
      for (int64_t f = 0; f < fd; ++f) w[f * k * ca + c * k + j] = frame[c * fd + f];
  }
  s.af_history.pop_front();

  sru::ScanOptions opt;
  opt.axis = sru::Axis::kTime;
  const auto gsru = GroupedFrom(m.params, "ftgs.time", m.cfg.groups, sru::Direction::kUni);
  std::vector<Tensor> next;
  Tensor h = sru::GroupedScanBatched(gsru, win, opt, &s.carries, &next);
  s.carries = std::move(next);
  s.h_history.push_back(h.view({fd, h.dim(2)}));
  s.h_history.pop_front();

  Tensor folded = ops::MatMul(s.h_history[k - 1], fold_taps_[0]);  // [F_d x C_a]
  for (int64_t j = 1; j < k; ++j)
    folded = ops::Add(folded, ops::MatMul(s.h_history[k - 1 - j], fold_taps_[j]));
  if (auto b = Bias(m.params, "ftgs.time.fold.b")) folded = ops::Add(folded, b->view({1, ca}));
  return ops::Add(ops::Permute(folded, {1, 0}).view({ca, 1, fd}), af);
}

Tensor StreamState::AttentionStep(FtgsState& s, const Tensor& at) {
  const Model& m = *model_;
  const auto& p = m.params;
  const int64_t ca = m.cfg.audio_channels, fd = bins_down_;
  Tensor x = ops::Permute(at.view({ca, fd}), {1, 0});  // [F_d x C_a]
  auto proj = [&](const char* name, const Tensor& in) {
    const std::string base = std::string("ftgs.attn.") + name;
    return ops::Linear(in, p.at(base + ".w"), Bias(p, base + ".b"));
  };
  const Tensor q = proj("q", x), kk = proj("k", x), v = proj("v", x);
  Tensor att({fd, ca});
  for (int64_t f = 0; f < fd; ++f) {
    const auto row = causal::IncrementalAttention(s.caches[f], q.ptr() + f * ca,
                                                  kk.ptr() + f * ca, v.ptr() + f * ca);
    std::copy(row.begin(), row.end(), att.mutable_ptr() + f * ca);
  }
  Tensor y = blocks::FtgsFeedForward(m, ops::Add(x, proj("o", att)));
  return ops::Permute(y, {1, 0}).view({ca, 1, fd});
}

// One FTGS application on a single frame x [C_a x 1 x F]. Even frames produce
// a new downsampled frame; odd frames reuse the previous one.
Tensor StreamState::RunFtgs(FtgsState& s, const Tensor& x) {
  const Model& m = *model_;
  if (frames_processed_ % 2 == 0) {
    Tensor a0 = blocks::FtgsDown(m, x);
    Tensor af = blocks::FtgsFreqPath(m, a0);
    s.att = AttentionStep(s, TimePathStep(s, af));
  }
  return blocks::FtgsReconstruct(m, x, ops::InterpNearest(s.att, 2, bins_));
}

std::vector<double> StreamState::ProcessFrame(const dsp::StreamingStft::Frame& frame) {
  const Model& m = *model_;
  const int64_t f = bins_;
  Tensor re({1, f}, frame.real), im({1, f}, frame.imag);
  Tensor e0 = EncodeFeatures(m, dsp::StackFeatures(dsp::PowerSpec(re, im), re, im));
  Tensor a = RunFtgs(ftgs_[0], Bottleneck(m, e0));

  const int64_t ca = m.cfg.audio_channels;
  Tensor gamma({ca, 1, 1}, gamma_), beta({ca, 1, 1}, beta_);
  a = ops::Add(ops::Mul(a, gamma), beta);
  for (size_t i = 1; i < ftgs_.size(); ++i) a = RunFtgs(ftgs_[i], a);

  auto [mr, mi] = MaskHead(m, a);
  auto [rr, ri] = ComplexMask(e0, mr, mi);
  dec_real_.push_back(rr);
  dec_imag_.push_back(ri);
  auto [yr, yi] = DecodeSpectrum(m, ops::Concat(std::vector<Tensor>(dec_real_.begin(), dec_real_.end()), 1),
                                 ops::Concat(std::vector<Tensor>(dec_imag_.begin(), dec_imag_.end()), 1));
  dec_real_.pop_front();
  dec_imag_.pop_front();
  const int64_t last = yr.dim(0) - 1;
  ++frames_processed_;
  return istft_.Push(yr.ptr() + last * f, yi.ptr() + last * f);
}

void StreamState::Emit(std::vector<double>& out, const std::vector<double>& block) {
  if (block.empty()) return;
  if (first_emission_input_ < 0) first_emission_input_ = stft_.samples_seen();
  out.insert(out.end(), block.begin(), block.end());
  samples_emitted_ += static_cast<int64_t>(block.size());
}

void StreamState::ProcessFrames(std::vector<double>& out) {
  while (!pending_frames_.empty()) {
    AdvanceVideo(frames_processed_ / fpv_);
    if (video_used_ == 0) return;  // wait for the first visual frame
    Emit(out, ProcessFrame(pending_frames_.front()));
    pending_frames_.pop_front();
  }
}

std::vector<double> StreamState::Push(std::span<const double> samples) {
  if (finished_) throw Error("stream already finished");
  samples_in_ += static_cast<int64_t>(samples.size());
  for (auto& fr : stft_.Push(samples.data(), samples.size()))
    pending_frames_.push_back(std::move(fr));
  std::vector<double> out;
  ProcessFrames(out);
  return out;
}

std::vector<double> StreamState::Finish() {
  if (finished_) throw Error("stream already finished");
  // Same trailing hop of zeros as the batch forward.
  const std::vector<double> pad(static_cast<size_t>(model_->cfg.stft.hop), 0.0);
  for (auto& fr : stft_.Push(pad.data(), pad.size())) pending_frames_.push_back(std::move(fr));
  for (auto& fr : stft_.Finish()) pending_frames_.push_back(std::move(fr));
  std::vector<double> out;
  ProcessFrames(out);
  if (!pending_frames_.empty())
    throw Error("stream finished without any visual frame for " +
                std::to_string(pending_frames_.size()) + " pending audio frames");
  finished_ = true;
  if (frames_processed_ == 0) return out;
  Emit(out, istft_.Finish());
  // The synthesis tail covers the zero padding past the last input sample.
  const int64_t extra = samples_emitted_ - samples_in_;
  if (extra > 0) {
    out.resize(out.size() - static_cast<size_t>(extra));
    samples_emitted_ -= extra;
  }
  return out;
}

StreamFootprint StreamState::footprint() const {
  StreamFootprint fp;
  const auto d = sizeof(double);
  size_t fixed = 0;
  for (const auto& s : ftgs_) {
    for (const auto& v : s.af_history) fixed += v.size() * d;
    for (const auto& t : s.h_history) fixed += t.numel() * d;
    for (const auto& t : s.carries) fixed += t.numel() * d;
    fixed += s.att.numel() * d;
    for (const auto& c : s.caches) {
      fp.kv_cache_bytes += c.bytes();
      fp.kv_cache_entries = c.length();
    }
  }
  for (const auto& t : dec_real_) fixed += t.numel() * d;
  for (const auto& t : dec_imag_) fixed += t.numel() * d;
  fixed += (lv_carry_.numel() + gamma_.size() + beta_.size()) * d;
  // Analysis history plus one hop of pending samples, and the synthesis
  // accumulator and window sum.
  const auto& st = model_->cfg.stft;
  fixed += static_cast<size_t>(st.win_len + 2 * st.win_len) * d;
  fp.fixed_bytes = fixed;
  return fp;
}

}  // namespace swiftnet
