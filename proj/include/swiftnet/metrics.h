// Copyright 2026 The swiftnet-cpp Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

// Separation quality in dB. Values are clamped to [-60, 60]; no mean removal.

#pragma once

#include <span>

#include "swiftnet/tensor.h"

namespace swiftnet::metrics {

inline constexpr double kEps = 1e-10;
inline constexpr double kClampDb = 60.0;

double SiSnr(std::span<const double> est, std::span<const double> ref);
double Sdr(std::span<const double> est, std::span<const double> ref);
// metric(est, ref) - metric(mix, ref).
double SiSnrImprovement(std::span<const double> est, std::span<const double> mix,
                        std::span<const double> ref);
double SdrImprovement(std::span<const double> est, std::span<const double> mix,
                      std::span<const double> ref);

// Differentiable SI-SNR over flat tensors (same formula, no clamp) for losses.
Tensor SiSnrLoss(const Tensor& est, const Tensor& ref);

}  // namespace swiftnet::metrics
