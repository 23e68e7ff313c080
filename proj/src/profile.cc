// Copyright 2026 The swiftnet-cpp Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "swiftnet/profile.h"

#include <Eigen/Core>
#include <algorithm>
#include <chrono>
#include <random>
#include <sstream>

#include "swiftnet/autodiff.h"
#include "swiftnet/params.h"
#include "swiftnet/sru.h"

namespace swiftnet::profile {
namespace {

int64_t LayoutCount(const std::vector<ParamSpec>& layout, const std::string& prefix) {
  int64_t n = 0;
  for (const auto& s : layout)
    if (s.name.compare(0, prefix.size(), prefix) == 0) n += NumElements(s.shape);
  return n;
}

CostReport Leaf(const std::vector<ParamSpec>& layout, const std::string& name,
                const std::string& prefix, int64_t macs) {
  CostReport r;
  r.name = name;
  r.params = LayoutCount(layout, prefix);
  r.macs = macs;
  return r;
}

void Total(CostReport& r) {
  r.params = 0;
  r.macs = 0;
  for (const auto& c : r.breakdown) {
    r.params += c.params;
    r.macs += c.macs;
  }
}

void Format(const CostReport& r, const std::string& path, std::ostringstream& o) {
  o << path << ".params " << r.params << " count\n" << path << ".macs " << r.macs << " MACs\n";
  for (const auto& c : r.breakdown) Format(c, path + "." + c.name, o);
}

}  // namespace

int64_t CountParams(const ModelParams& params) { return params.scalar_count(); }

int64_t ConvMacs(int64_t c_in, int64_t c_out, int64_t kernel, int64_t positions) {
  return c_in * c_out * kernel * positions;
}

int64_t CountParams(const SepConfig& cfg) { return LayoutCount(ParamLayout(cfg), ""); }

CostReport Analyze(const SepConfig& cfg, int64_t samples) {
  cfg.Validate();
  if (samples < 1) throw ShapeError("cost analysis needs a positive input length");
  const auto layout = ParamLayout(cfg);
  // Forward appends one hop of zeros, so it analyzes one frame more than the input has.
  const int64_t t_in = cfg.stft.num_frames(samples);
  const int64_t t = t_in + 1, f = cfg.stft.num_bins();
  const int64_t td = (t + 1) / 2, fd = (f + 1) / 2, p = td * fd, pf = t * f;
  const int64_t fpv = cfg.frames_per_video(), tv = (t_in + fpv - 1) / fpv;
  const int64_t ca = cfg.audio_channels, ce = cfg.enc_channels, cv = cfg.visual_channels;
  const int64_t ch = cfg.lightvid_channels, hs = cfg.lightvid_sru_hidden, k = cfg.unfold_kernel;
  const int64_t g = cfg.groups, n = cfg.repeats;
  const auto time_dir = cfg.time_bidirectional ? sru::Direction::kBi : sru::Direction::kUni;
  const int64_t time_out = cfg.hid_time * (cfg.time_bidirectional ? 2 : 1);

  CostReport r;
  r.name = "model";
  r.breakdown.push_back(Leaf(layout, "encoder", "enc.", ConvMacs(3, ce, 1, pf)));
  r.breakdown.push_back(Leaf(layout, "bottleneck", "bottleneck.", ce * ca * pf));
  r.breakdown.push_back(Leaf(
      layout, "lightvid", "lv.",
      (cv + cv * ch + sru::SruStepMacs(ch, hs, 1, sru::Direction::kUni) + hs * cv) * tv));

  CostReport ftgs;
  ftgs.name = "ftgs";
  ftgs.breakdown.push_back(Leaf(layout, "down", "ftgs.down.", n * ca * ca * p));
  ftgs.breakdown.push_back(Leaf(
      layout, "freq", "ftgs.freq.",
      n * (sru::SruStepMacs(k * ca, cfg.hid_freq, g, sru::Direction::kBi) + 2 * cfg.hid_freq * ca * k) *
          p));
  ftgs.breakdown.push_back(Leaf(
      layout, "time", "ftgs.time.",
      n * (sru::SruStepMacs(k * ca, cfg.hid_time, g, time_dir) + time_out * ca * k) * p));
  ftgs.breakdown.push_back(
      Leaf(layout, "attn", "ftgs.attn.", n * (4 * ca * ca * p + fd * 2 * ca * td * (td + 1) / 2)));
  ftgs.breakdown.push_back(Leaf(layout, "ffn", "ftgs.ffn.", n * 2 * ca * cfg.ffn_hidden * p));
  ftgs.breakdown.push_back(Leaf(layout, "gate", "ftgs.gate.", n * ca * ca * pf));
  Total(ftgs);
  r.breakdown.push_back(ftgs);

  r.breakdown.push_back(Leaf(layout, "saf", "saf.", cv * 2 * ca * tv));
  r.breakdown.push_back(Leaf(layout, "mask", "mask.", (ca * ce + 2 * ce * (ce / 2)) * pf));
  r.breakdown.push_back(Leaf(layout, "decoder", "dec.",
                             ce * 2 * cfg.dec_kernel_time * cfg.dec_kernel_freq * pf));
  Total(r);
  return r;
}

int64_t CountMacs(const SepConfig& cfg, int64_t samples) { return Analyze(cfg, samples).macs; }

double MeasureLatency(const Model& model, double seconds, int reps, int warmup) {
  if (reps < 1 || warmup < 0 || !(seconds > 0)) throw ConfigError("invalid latency settings");
  Eigen::setNbThreads(1);
  const auto& cfg = model.cfg;
  const int64_t samples = static_cast<int64_t>(seconds * cfg.stft.sample_rate);
  const int64_t fpv = cfg.frames_per_video();
  const int64_t tv = (cfg.stft.num_frames(samples) + fpv - 1) / fpv;
  std::mt19937_64 rng(11);
  std::normal_distribution<double> nd(0.0, 0.1);
  Tensor x({1, samples}), ev({cfg.visual_channels, tv});
  for (int64_t i = 0; i < x.numel(); ++i) x.mutable_ptr()[i] = nd(rng);
  for (int64_t i = 0; i < ev.numel(); ++i) ev.mutable_ptr()[i] = nd(rng);

  autodiff::NoGradScope no_grad;
  std::vector<double> ms;
  for (int i = 0; i < warmup + reps; ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    Tensor y = Forward(model, x, ev);
    const auto t1 = std::chrono::steady_clock::now();
    if (i >= warmup) ms.push_back(std::chrono::duration<double, std::milli>(t1 - t0).count());
  }
  std::sort(ms.begin(), ms.end());
  const size_t m = ms.size();
  return m % 2 ? ms[m / 2] : 0.5 * (ms[m / 2 - 1] + ms[m / 2]);
}

std::string FormatReport(const CostReport& r) {
  std::ostringstream o;
  o << "params " << r.params << " count\n"
    << "macs " << r.macs << " MACs\n"
    << "gmacs " << static_cast<double>(r.macs) / 1e9 << " GMACs\n";
  if (r.latency_ms >= 0) o << "latency " << r.latency_ms << " ms\n";
  for (const auto& c : r.breakdown) Format(c, c.name, o);
  return o.str();
}

}  // namespace swiftnet::profile
