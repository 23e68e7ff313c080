// Copyright 2026 The swiftnet-cpp Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "swiftnet/metrics.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "swiftnet/ops.h"

namespace swiftnet::metrics {
namespace {

void CheckPair(std::span<const double> est, std::span<const double> ref) {
  if (est.size() != ref.size())
    throw ShapeError("metric inputs differ in length: " + std::to_string(est.size()) + " vs " +
                     std::to_string(ref.size()));
  if (std::all_of(ref.begin(), ref.end(), [](double v) { return v == 0.0; }))
    throw Error("reference signal is identically zero");
}

double Dot(std::span<const double> a, std::span<const double> b) {
  double s = 0;
  for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double Clamp(double db) {
  if (std::isnan(db)) return -kClampDb;
  return std::clamp(db, -kClampDb, kClampDb);
}

}  // namespace

double SiSnr(std::span<const double> est, std::span<const double> ref) {
  CheckPair(est, ref);
  const double alpha = Dot(est, ref) / Dot(ref, ref);
  double target = 0, noise = 0;
  for (size_t i = 0; i < ref.size(); ++i) {
    const double s = alpha * ref[i];
    target += s * s;
    noise += (est[i] - s) * (est[i] - s);
  }
  // The guard scales with the target energy so that scaling `est` is exact.
  return Clamp(10.0 * std::log10(target / (noise + kEps * target)));
}

double Sdr(std::span<const double> est, std::span<const double> ref) {
  CheckPair(est, ref);
  double err = 0;
  for (size_t i = 0; i < ref.size(); ++i) err += (est[i] - ref[i]) * (est[i] - ref[i]);
  return Clamp(10.0 * std::log10(Dot(ref, ref) / (err + kEps)));
}

double SiSnrImprovement(std::span<const double> est, std::span<const double> mix,
                        std::span<const double> ref) {
  return SiSnr(est, ref) - SiSnr(mix, ref);
}

double SdrImprovement(std::span<const double> est, std::span<const double> mix,
                      std::span<const double> ref) {
  return Sdr(est, ref) - Sdr(mix, ref);
}

Tensor SiSnrLoss(const Tensor& est, const Tensor& ref) {
  if (est.numel() != ref.numel())
    throw ShapeError("SI-SNR inputs differ: " + ShapeString(est.shape()) + " vs " +
                     ShapeString(ref.shape()));
  const Tensor e = ops::Reshape(est, {est.numel()});
  const Tensor r = ops::Reshape(ref, {ref.numel()});
  const Tensor alpha = ops::Div(ops::Sum(ops::Mul(e, r)), ops::Sum(ops::Square(r)));
  const Tensor s = ops::Mul(r, alpha);
  const Tensor target = ops::Sum(ops::Square(s));
  const Tensor noise =
      ops::Add(ops::Sum(ops::Square(ops::Sub(e, s))), ops::Scale(target, kEps));
  return ops::Scale(ops::Log(ops::Div(target, noise)), 10.0 / std::log(10.0));
}

}  // namespace swiftnet::metrics
