// Copyright 2026 The Genifer Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <initializer_list>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "genifer/errors.hpp"

namespace genifer {

using Index = Eigen::Index;
using Shape = std::vector<Index>;

inline Index shape_size(const Shape& s) {
  Index n = 1;
  for (Index d : s) n *= d;
  return n;
}

inline std::string shape_str(const Shape& s) {
  std::ostringstream os;
  os << "(";
  for (size_t i = 0; i < s.size(); ++i) os << s[i] << (i + 1 < s.size() ? "," : "");
  os << ")";
  return os.str();
}

/// Dense row-major tensor of arbitrary rank. Storage is a flat Eigen array;
/// matrix views are produced on demand for GEMM-shaped ops. Images follow the
/// channel-last (N,H,W,C) convention throughout the library.
template <typename Scalar>
class Tensor {
 public:
  using Flat = Eigen::Array<Scalar, Eigen::Dynamic, 1>;
  template <int Opt = Eigen::RowMajor>
  using MatrixMap = Eigen::Map<Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Opt>>;
  template <int Opt = Eigen::RowMajor>
  using ConstMatrixMap =
      Eigen::Map<const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Opt>>;

  Tensor() = default;
  explicit Tensor(Shape shape) : shape_(std::move(shape)), data_(Flat::Zero(shape_size(shape_))) {}
  Tensor(Shape shape, Scalar fill) : shape_(std::move(shape)) {
    data_ = Flat::Constant(shape_size(shape_), fill);
  }
  Tensor(Shape shape, std::initializer_list<Scalar> values) : shape_(std::move(shape)) {
    GENIFER_CHECK(static_cast<Index>(values.size()) == shape_size(shape_), ShapeError,
                  "initializer size does not match shape " + shape_str(shape_));
    data_.resize(static_cast<Index>(values.size()));
    Index i = 0;
    for (Scalar v : values) data_[i++] = v;
  }

  static Tensor zeros(Shape shape) { return Tensor(std::move(shape)); }
  static Tensor full(Shape shape, Scalar v) { return Tensor(std::move(shape), v); }
  static Tensor scalar(Scalar v) { return Tensor(Shape{1}, {v}); }

  const Shape& shape() const { return shape_; }
  Index rank() const { return static_cast<Index>(shape_.size()); }
  Index dim(Index i) const { return shape_[static_cast<size_t>(i)]; }
  Index size() const { return data_.size(); }
  bool empty() const { return data_.size() == 0; }

  Scalar* data() { return data_.data(); }
  const Scalar* data() const { return data_.data(); }
  Scalar& operator[](Index i) { return data_[i]; }
  Scalar operator[](Index i) const { return data_[i]; }

  Flat& flat() { return data_; }
  const Flat& flat() const { return data_; }

  /// View as a rows x cols row-major matrix; total size must match.
  MatrixMap<> matrix(Index rows, Index cols) {
    GENIFER_CHECK(rows * cols == size(), ShapeError, "matrix view size mismatch");
    return MatrixMap<>(data_.data(), rows, cols);
  }
  ConstMatrixMap<> matrix(Index rows, Index cols) const {
    GENIFER_CHECK(rows * cols == size(), ShapeError, "matrix view size mismatch");
    return ConstMatrixMap<>(data_.data(), rows, cols);
  }

  /// Canonical 2-d view: all leading dims collapse into rows, last dim = cols.
  Index cols() const { return shape_.empty() ? 1 : shape_.back(); }
  Index rows() const { return cols() == 0 ? 0 : size() / cols(); }
  MatrixMap<> matrix() { return matrix(rows(), cols()); }
  ConstMatrixMap<> matrix() const { return matrix(rows(), cols()); }

  Tensor reshaped(Shape shape) const {
    GENIFER_CHECK(shape_size(shape) == size(), ShapeError,
                  "reshape " + shape_str(shape_) + " -> " + shape_str(shape) + " size mismatch");
    Tensor out = *this;
    out.shape_ = std::move(shape);
    return out;
  }

  template <typename Other>
  Tensor<Other> cast() const {
    Tensor<Other> out(shape_);
    out.flat() = data_.template cast<Other>();
    return out;
  }

  bool same_shape(const Tensor& other) const { return shape_ == other.shape_; }

  bool all_finite() const { return data_.isFinite().all(); }

 private:
  Shape shape_;
  Flat data_;
};

template <typename Scalar>
bool bitwise_equal(const Tensor<Scalar>& a, const Tensor<Scalar>& b) {
  if (a.shape() != b.shape()) return false;
  return std::memcmp(a.data(), b.data(), sizeof(Scalar) * static_cast<size_t>(a.size())) == 0;
}

/// FNV-1a over the raw bytes; used by audits that assert bit-identity.
template <typename Scalar>
uint64_t byte_hash(const Tensor<Scalar>& t, uint64_t seed = 1469598103934665603ull) {
  const auto* p = reinterpret_cast<const unsigned char*>(t.data());
  uint64_t h = seed;
  for (size_t i = 0; i < sizeof(Scalar) * static_cast<size_t>(t.size()); ++i) {
    h ^= p[i];
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace genifer
