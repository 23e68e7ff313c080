// Copyright 2026 The swiftnet-cpp Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "swiftnet/trainer.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <random>

#include "swiftnet/autodiff.h"
#include "swiftnet/metrics.h"
#include "swiftnet/ops.h"

namespace swiftnet::train {

AdamW::AdamW(double lr_, double weight_decay_, double beta1, double beta2, double eps)
    : lr(lr_), weight_decay(weight_decay_), beta1_(beta1), beta2_(beta2), eps_(eps) {}

void AdamW::Step(ModelParams& params, const std::vector<Tensor>& grads) {
  const auto& names = params.names();
  if (grads.size() != names.size()) throw ShapeError("one gradient per parameter expected");
  if (m_.empty()) {
    for (const auto& n : names) {
      m_.emplace_back(params.at(n).numel(), 0.0);
      v_.emplace_back(params.at(n).numel(), 0.0);
    }
  }
  ++t_;
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  const double decay = 1.0 - lr * weight_decay;
  for (size_t i = 0; i < names.size(); ++i) {
    const Tensor& p = params.at(names[i]);
    if (grads[i].numel() != p.numel())
      throw ShapeError("gradient shape mismatch for '" + names[i] + "'");
    Tensor next(p.shape());
    double* out = next.mutable_ptr();
    const double* w = p.ptr();
    const double* g = grads[i].ptr();
    auto& m = m_[i];
    auto& v = v_[i];
    for (int64_t j = 0; j < p.numel(); ++j) {
      m[j] = beta1_ * m[j] + (1 - beta1_) * g[j];
      v[j] = beta2_ * v[j] + (1 - beta2_) * g[j] * g[j];
      const double mh = m[j] / c1, vh = v[j] / c2;
      out[j] = w[j] * decay - lr * mh / (std::sqrt(vh) + eps_);
    }
    params.set(names[i], std::move(next));
  }
}

PlateauSchedule::PlateauSchedule(double lr, int patience, double factor)
    : lr_(lr), patience_(patience), factor_(factor) {
  if (!(lr > 0) || patience < 1 || !(factor > 0 && factor <= 1))
    throw ConfigError("invalid plateau schedule");
}

double PlateauSchedule::Update(double val_loss) {
  if (val_loss < best_) {
    best_ = val_loss;
    bad_epochs_ = 0;
  } else if (++bad_epochs_ >= patience_) {
    lr_ *= factor_;
    bad_epochs_ = 0;
  }
  return lr_;
}

std::string FormatLogEntry(const LogEntry& e) {
  char buf[160];
  std::snprintf(buf, sizeof(buf), "epoch=%lld train_loss=%.6f val_loss=%.6f lr=%.6g steps=%lld",
                static_cast<long long>(e.epoch), e.train_loss, e.val_loss, e.lr,
                static_cast<long long>(e.steps));
  return buf;
}

double Loss(const Model& model, const synth::Example& ex, std::vector<Tensor>* grads) {
  if (!grads) {
    autodiff::NoGradScope no_grad;
    return -metrics::SiSnrLoss(Forward(model, ex.mix, ex.visual), ex.target).item();
  }
  autodiff::Tape tape;
  autodiff::TapeScope scope(tape);
  Model watched{model.cfg, model.params.Watched(tape)};
  const Tensor loss = ops::Neg(metrics::SiSnrLoss(Forward(watched, ex.mix, ex.visual), ex.target));
  const double value = loss.item();
  const auto g = tape.Backward(loss);
  grads->clear();
  for (const auto& n : watched.params.names()) grads->push_back(g.of(watched.params.at(n)));
  return value;
}

double ClipGlobalNorm(std::vector<Tensor>& grads, double max_norm) {
  double sq = 0;
  for (const auto& g : grads)
    for (double v : g.data()) sq += v * v;
  const double norm = std::sqrt(sq);
  if (max_norm > 0 && norm > max_norm) {
    const double s = max_norm / norm;
    for (auto& g : grads) g = ops::Scale(g, s);
  }
  return norm;
}

void CheckFinite(const ModelParams& params, const std::vector<Tensor>& grads) {
  const auto& names = params.names();
  for (size_t i = 0; i < names.size(); ++i) {
    auto bad = [](const Tensor& t) {
      const auto d = t.data();
      return std::any_of(d.begin(), d.end(), [](double v) { return !std::isfinite(v); });
    };
    if (i < grads.size() && bad(grads[i]))
      throw TrainingError("non-finite gradient in parameter '" + names[i] + "'");
    if (bad(params.at(names[i])))
      throw TrainingError("non-finite value in parameter '" + names[i] + "'");
  }
}

namespace {

// Random crop aligned to video frames so the visual cue stays in step.
synth::Example Crop(const synth::Example& ex, const SepConfig& cfg, double seconds,
                    std::mt19937_64& rng) {
  const int64_t per_video = cfg.stft.sample_rate / cfg.video_fps;
  const int64_t total = ex.mix.numel();
  const int64_t want = static_cast<int64_t>(seconds * cfg.stft.sample_rate) / per_video;
  const int64_t have = total / per_video;
  if (seconds <= 0 || want < 1 || want >= have || ex.visual.dim(1) < have) return ex;
  const int64_t start = std::uniform_int_distribution<int64_t>(0, have - want)(rng);
  const int64_t len = want * per_video;
  synth::Example out;
  out.mix = ops::Slice(ex.mix, 1, start * per_video, len);
  out.target = ops::Slice(ex.target, 1, start * per_video, len);
  out.visual = ops::Slice(ex.visual, 1, start, want);
  return out;
}

double MeanLoss(const Model& model, const std::vector<synth::Example>& set) {
  double s = 0;
  for (const auto& ex : set) s += Loss(model, ex);
  return s / static_cast<double>(set.size());
}

}  // namespace

std::vector<LogEntry> Train(Model& model, const std::vector<synth::Example>& train_set,
                            const std::vector<synth::Example>& val_set, const TrainConfig& tc,
                            const Options& opt) {
  tc.Validate();
  if (train_set.empty()) throw ConfigError("training set is empty");
  std::mt19937_64 rng(tc.seed);
  AdamW adam(tc.lr, tc.weight_decay);
  PlateauSchedule schedule(tc.lr, static_cast<int>(tc.plateau_patience), tc.lr_decay);
  std::vector<LogEntry> log;
  std::vector<size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), 0);
  int64_t steps = 0;

  for (int64_t epoch = 1; epoch <= tc.epochs && steps < opt.max_steps; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double train_sum = 0;
    int64_t seen = 0;
    for (size_t b = 0; b < order.size() && steps < opt.max_steps;
         b += static_cast<size_t>(tc.batch_size)) {
      const size_t end = std::min(order.size(), b + static_cast<size_t>(tc.batch_size));
      std::vector<Tensor> acc, grads;
      for (size_t i = b; i < end; ++i) {
        const double loss = Loss(model, Crop(train_set[order[i]], model.cfg, tc.crop_seconds, rng),
                                 &grads);
        if (!std::isfinite(loss)) {
          CheckFinite(model.params, grads);
          throw TrainingError("non-finite loss at step " + std::to_string(steps + 1));
        }
        train_sum += loss;
        ++seen;
        if (acc.empty()) {
          acc = grads;
        } else {
          for (size_t j = 0; j < acc.size(); ++j) acc[j] = ops::Add(acc[j], grads[j]);
        }
      }
      const double inv = 1.0 / static_cast<double>(end - b);
      for (auto& g : acc) g = ops::Scale(g, inv);
      CheckFinite(model.params, acc);
      ClipGlobalNorm(acc, tc.grad_clip);
      adam.Step(model.params, acc);
      ++steps;
    }
    LogEntry e;
    e.epoch = epoch;
    e.train_loss = train_sum / static_cast<double>(std::max<int64_t>(seen, 1));
    e.val_loss = val_set.empty() ? e.train_loss : MeanLoss(model, val_set);
    e.lr = adam.lr;
    e.steps = steps;
    if (!std::isfinite(e.val_loss)) {
      CheckFinite(model.params, {});
      throw TrainingError("non-finite validation loss at epoch " + std::to_string(epoch));
    }
    adam.lr = schedule.Update(e.val_loss);
    log.push_back(e);
    if (opt.log) *opt.log << FormatLogEntry(e) << "\n" << std::flush;
    if (opt.on_epoch && !opt.on_epoch(e)) break;
  }
  return log;
}

double MeanSiSnri(const Model& model, const std::vector<synth::Example>& examples) {
  autodiff::NoGradScope no_grad;
  double s = 0;
  for (const auto& ex : examples) {
    const Tensor est = Forward(model, ex.mix, ex.visual);
    s += metrics::SiSnrImprovement(est.data(), ex.mix.data(), ex.target.data());
  }
  return s / static_cast<double>(examples.size());
}

}  // namespace swiftnet::train
