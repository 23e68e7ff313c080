// Copyright 2026 The swiftnet-cpp Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "swiftnet/causality.h"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "swiftnet/autodiff.h"

namespace swiftnet::causality {

Report Verify(const WaveFn& fn, const Options& opt) {
  if (opt.trials < 1 || opt.hop < 1 || opt.min_hops < 2 || opt.max_hops < opt.min_hops)
    throw ConfigError("invalid causality harness options");
  std::mt19937_64 rng(opt.seed);
  std::normal_distribution<double> noise(0.0, 0.3);
  std::uniform_int_distribution<int64_t> hops(opt.min_hops, opt.max_hops);

  Report rep;
  rep.bound = opt.bound;
  for (int i = 0; i < opt.trials; ++i) {
    Trial tr;
    const int64_t n_hops = hops(rng);
    tr.length = n_hops * opt.hop;
    tr.cut = std::uniform_int_distribution<int64_t>(1, n_hops - 1)(rng) * opt.hop;

    Tensor x({1, tr.length});
    for (int64_t n = 0; n < tr.length; ++n) x.mutable_ptr()[n] = noise(rng);
    Tensor xp = x.clone();
    for (int64_t n = tr.cut; n < tr.length; ++n) xp.mutable_ptr()[n] = noise(rng);

    const Tensor y0 = fn(x), y1 = fn(xp);
    if (y0.numel() != tr.length || y1.numel() != tr.length)
      throw ShapeError("causality harness expects length-preserving functions");
    tr.first_changed = tr.length;
    for (int64_t n = 0; n < tr.length; ++n) {
      const double d = std::abs(y0.ptr()[n] - y1.ptr()[n]);
      if (d > opt.tolerance && n < tr.first_changed) tr.first_changed = n;
      if (n < tr.cut - opt.bound) tr.prefix_violation = std::max(tr.prefix_violation, d);
    }
    tr.lookback = std::max<int64_t>(0, tr.cut - tr.first_changed);
    if (tr.lookback > opt.bound) ++rep.violations;
    rep.max_prefix_violation = std::max(rep.max_prefix_violation, tr.prefix_violation);
    rep.trials.push_back(tr);
  }
  for (const auto& t : rep.trials) {
    rep.latency_samples = std::max(rep.latency_samples, t.lookback);
    if (t.lookback != rep.trials.front().lookback) rep.constant = false;
  }
  rep.latency_frames = (rep.latency_samples + opt.hop - 1) / opt.hop;
  return rep;
}

WaveFn ModelFn(const Model& model, uint64_t visual_seed) {
  return [&model, visual_seed](const Tensor& x) {
    autodiff::NoGradScope no_grad;
    const auto& cfg = model.cfg;
    const int64_t frames = cfg.stft.num_frames(x.numel());
    const int64_t tv = (frames + cfg.frames_per_video() - 1) / cfg.frames_per_video();
    std::mt19937_64 rng(visual_seed);
    std::normal_distribution<double> nd(0.0, 1.0);
    Tensor ev({cfg.visual_channels, tv});
    for (int64_t i = 0; i < ev.numel(); ++i) ev.mutable_ptr()[i] = nd(rng);
    return Forward(model, x, ev);
  };
}

Options ModelOptions(const SepConfig& cfg, int trials, uint64_t seed) {
  Options o;
  o.trials = trials;
  o.seed = seed;
  o.hop = cfg.stft.hop;
  o.bound = cfg.stft.win_len - cfg.stft.hop;
  o.min_hops = 32;
  o.max_hops = 48;
  return o;
}

std::string FormatReport(const Report& r) {
  std::ostringstream o;
  o << "trials " << r.trials.size() << " count\n"
    << "latency " << r.latency_samples << " samples\n"
    << "latency_frames " << r.latency_frames << " frames\n"
    << "latency_constant " << (r.constant ? 1 : 0) << " bool\n"
    << "bound " << r.bound << " samples\n"
    << "max_prefix_violation " << r.max_prefix_violation << " abs\n"
    << "violations " << r.violations << " count\n";
  for (size_t i = 0; i < r.trials.size(); ++i) {
    const auto& t = r.trials[i];
    o << "trial " << i << " length=" << t.length << " cut=" << t.cut
      << " first_changed=" << t.first_changed << " lookback=" << t.lookback << "\n";
  }
  return o.str();
}

}  // namespace swiftnet::causality
