// Copyright 2026 The swiftnet-cpp Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

// Full-utterance trainer: negative SI-SNR loss, AdamW with decoupled weight
// decay, global-norm clipping, and plateau halving of the learning rate.

#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

#include "swiftnet/config.h"
#include "swiftnet/model.h"
#include "swiftnet/synth.h"

namespace swiftnet::train {

// Raised when a loss or gradient stops being finite.
class TrainingError : public Error {
 public:
  using Error::Error;
};

class AdamW {
 public:
  AdamW(double lr, double weight_decay, double beta1 = 0.9, double beta2 = 0.999,
        double eps = 1e-8);

  // `grads` follows params.names() order.
  void Step(ModelParams& params, const std::vector<Tensor>& grads);

  double lr;
  double weight_decay;
  int64_t steps() const { return t_; }

 private:
  double beta1_, beta2_, eps_;
  int64_t t_ = 0;
  std::vector<std::vector<double>> m_, v_;
};

class PlateauSchedule {
 public:
  PlateauSchedule(double lr, int patience, double factor);
  // Feeds one validation loss and returns the learning rate for the next epoch.
  double Update(double val_loss);
  double lr() const { return lr_; }

 private:
  double lr_;
  int patience_;
  double factor_;
  double best_ = std::numeric_limits<double>::infinity();
  int bad_epochs_ = 0;
};

struct LogEntry {
  int64_t epoch = 0;
  double train_loss = 0;
  double val_loss = 0;
  double lr = 0;
  int64_t steps = 0;
};

std::string FormatLogEntry(const LogEntry& e);

struct Options {
  int64_t max_steps = std::numeric_limits<int64_t>::max();
  std::ostream* log = nullptr;  // one FormatLogEntry line per epoch
  // Called after every epoch; returning false stops training.
  std::function<bool(const LogEntry&)> on_epoch;
};

// Negative SI-SNR of the model estimate; gradients in params.names() order
// are written to `grads` when given.
double Loss(const Model& model, const synth::Example& ex, std::vector<Tensor>* grads = nullptr);

// Scales `grads` so their global L2 norm is at most `max_norm`; returns the
// norm before clipping.
double ClipGlobalNorm(std::vector<Tensor>& grads, double max_norm);

// Throws TrainingError naming the first parameter whose gradient or value is
// not finite.
void CheckFinite(const ModelParams& params, const std::vector<Tensor>& grads);

std::vector<LogEntry> Train(Model& model, const std::vector<synth::Example>& train_set,
                            const std::vector<synth::Example>& val_set, const TrainConfig& tc,
                            const Options& opt = {});

// Mean SI-SNR improvement (dB) over the examples, batch forward.
double MeanSiSnri(const Model& model, const std::vector<synth::Example>& examples);

}  // namespace swiftnet::train
