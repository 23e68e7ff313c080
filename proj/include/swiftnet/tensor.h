// Copyright 2026 The swiftnet-cpp Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <cstdint>
#include <initializer_list>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace swiftnet {

using Shape = std::vector<int64_t>;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Incompatible shapes or dimensions.
class ShapeError : public Error {
 public:
  using Error::Error;
};

// Malformed file payloads (wav, visual features, weights, configs).
class FormatError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

// Raised when an operation would let future frames influence the past.
class CausalityError : public Error {
 public:
  using Error::Error;
};

std::string ShapeString(const Shape& shape);
int64_t NumElements(const Shape& shape);
Shape ContiguousStrides(const Shape& shape);

namespace autodiff {
struct Slot;
}

// Dense row-major tensor of 64-bit floats. Storage is shared between copies
// and is never mutated once a tensor has been handed to an operation.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape shape);
  Tensor(Shape shape, std::vector<double> data);

  static Tensor Zeros(Shape shape);
  static Tensor Full(Shape shape, double value);
  static Tensor Scalar(double value);
  static Tensor Vector(std::initializer_list<double> values);
  static Tensor Matrix(std::initializer_list<std::initializer_list<double>> rows);

  bool defined() const { return data_ != nullptr; }
  const Shape& shape() const { return shape_; }
  int rank() const { return static_cast<int>(shape_.size()); }
  int64_t dim(int axis) const;
  int64_t numel() const { return data_ ? static_cast<int64_t>(data_->size()) : 0; }
  Shape strides() const { return ContiguousStrides(shape_); }

  std::span<const double> data() const;
  const double* ptr() const { return data_->data(); }
  // Only valid on a freshly constructed tensor that has not been shared yet.
  double* mutable_ptr() { return data_->data(); }

  double item() const;
  double at(std::initializer_list<int64_t> index) const;
  std::vector<double> ToVector() const { return *data_; }

  // Same storage, no tape slot.
  Tensor detach() const;
  // Same storage under a new shape with equal element count; no tape slot.
  Tensor view(Shape shape) const;
  Tensor clone() const;
  bool requires_grad() const { return slot_ != nullptr; }
  const std::shared_ptr<autodiff::Slot>& slot() const { return slot_; }
  void set_slot(std::shared_ptr<autodiff::Slot> slot) { slot_ = std::move(slot); }
  bool SharesStorage(const Tensor& other) const { return data_ == other.data_; }

 private:
  Shape shape_;
  std::shared_ptr<std::vector<double>> data_;
  std::shared_ptr<autodiff::Slot> slot_;
};

// Largest absolute elementwise difference; shapes must match.
double MaxAbsDiff(const Tensor& a, const Tensor& b);

// Keeps freed tensor buffers in the process heap instead of returning them to
// the OS, so full-resolution intermediates do not page-fault on every
// allocation. Process-wide; call once from main(). No-op outside glibc.
void RetainFreedMemory();

}  // namespace swiftnet
