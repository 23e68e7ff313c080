// Copyright 2026 The swiftnet-cpp Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "swiftnet/tensor.h"

#include <cmath>
#include <sstream>

#ifdef __GLIBC__
#include <malloc.h>
#endif

namespace swiftnet {

std::string ShapeString(const Shape& shape) {
  std::ostringstream os;
  os << "[";
  for (size_t i = 0; i < shape.size(); ++i) {
    if (i) os << "x";
    os << shape[i];
  }
  os << "]";
  return os.str();
}

int64_t NumElements(const Shape& shape) {
  int64_t n = 1;
  for (int64_t d : shape) n *= d;
  return n;
}

Shape ContiguousStrides(const Shape& shape) {
  Shape strides(shape.size(), 1);
  for (int i = static_cast<int>(shape.size()) - 2; i >= 0; --i)
    strides[i] = strides[i + 1] * shape[i + 1];
  return strides;
}

Tensor::Tensor(Shape shape) : Tensor(shape, std::vector<double>(NumElements(shape), 0.0)) {}

Tensor::Tensor(Shape shape, std::vector<double> data) : shape_(std::move(shape)) {
  for (int64_t d : shape_) {
    if (d <= 0) throw ShapeError("tensor dimensions must be positive, got " + ShapeString(shape_));
  }
  if (NumElements(shape_) != static_cast<int64_t>(data.size())) {
    throw ShapeError("shape " + ShapeString(shape_) + " does not match " +
                     std::to_string(data.size()) + " elements");
  }
  data_ = std::make_shared<std::vector<double>>(std::move(data));
}

Tensor Tensor::Zeros(Shape shape) { return Tensor(std::move(shape)); }

Tensor Tensor::Full(Shape shape, double value) {
  const int64_t n = NumElements(shape);
  return Tensor(std::move(shape), std::vector<double>(n, value));
}

Tensor Tensor::Scalar(double value) { return Tensor({1}, {value}); }

Tensor Tensor::Vector(std::initializer_list<double> values) {
  return Tensor({static_cast<int64_t>(values.size())}, std::vector<double>(values));
}

Tensor Tensor::Matrix(std::initializer_list<std::initializer_list<double>> rows) {
  const int64_t m = static_cast<int64_t>(rows.size());
  const int64_t n = m ? static_cast<int64_t>(rows.begin()->size()) : 0;
  std::vector<double> data;
  data.reserve(m * n);
  for (const auto& row : rows) {
    if (static_cast<int64_t>(row.size()) != n) throw ShapeError("ragged matrix literal");
    data.insert(data.end(), row.begin(), row.end());
  }
  return Tensor({m, n}, std::move(data));
}

int64_t Tensor::dim(int axis) const {
  const int r = rank();
  if (axis < 0) axis += r;
  if (axis < 0 || axis >= r)
    throw ShapeError("axis " + std::to_string(axis) + " out of range for " + ShapeString(shape_));
  return shape_[axis];
}

std::span<const double> Tensor::data() const {
  if (!data_) return {};
  return {data_->data(), data_->size()};
}

double Tensor::item() const {
  if (numel() != 1) throw ShapeError("item() on tensor of shape " + ShapeString(shape_));
  return (*data_)[0];
}

double Tensor::at(std::initializer_list<int64_t> index) const {
  if (static_cast<int>(index.size()) != rank()) throw ShapeError("index rank mismatch");
  const Shape strides = ContiguousStrides(shape_);
  int64_t offset = 0;
  int i = 0;
  for (int64_t v : index) {
    if (v < 0 || v >= shape_[i]) throw ShapeError("index out of range");
    offset += v * strides[i++];
  }
  return (*data_)[offset];
}

Tensor Tensor::detach() const {
  Tensor t = *this;
  t.slot_.reset();
  return t;
}

Tensor Tensor::view(Shape shape) const {
  if (NumElements(shape) != numel())
    throw ShapeError("cannot view " + ShapeString(shape_) + " as " + ShapeString(shape));
  for (int64_t d : shape)
    if (d <= 0) throw ShapeError("tensor dimensions must be positive, got " + ShapeString(shape));
  Tensor t;
  t.shape_ = std::move(shape);
  t.data_ = data_;
  return t;
}

Tensor Tensor::clone() const { return Tensor(shape_, *data_); }

double MaxAbsDiff(const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape())
    throw ShapeError("MaxAbsDiff shape mismatch " + ShapeString(a.shape()) + " vs " +
                     ShapeString(b.shape()));
  double m = 0.0;
  auto x = a.data();
  auto y = b.data();
  for (size_t i = 0; i < x.size(); ++i) {
    const double d = std::abs(x[i] - y[i]);
    if (std::isnan(d)) return d;
    if (d > m) m = d;
  }
  return m;
}

void RetainFreedMemory() {
#ifdef __GLIBC__
  mallopt(M_MMAP_MAX, 0);
  mallopt(M_TRIM_THRESHOLD, -1);
#endif
}

}  // namespace swiftnet
