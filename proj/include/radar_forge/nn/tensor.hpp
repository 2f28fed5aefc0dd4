// Copyright 2026, radar-forge contributors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "radar_forge/error.hpp"

namespace radar_forge::nn {

/// Dense float64 array with up to four dimensions (batch, channel, height,
/// width), row-major. Lower-rank data uses trailing ones.
class Tensor {
 public:
  using Shape = std::array<int, 4>;

  Tensor() : shape_{0, 0, 0, 0} {}
  Tensor(int n, int c, int h, int w) : shape_{n, c, h, w} {
    if (n < 0 || c < 0 || h < 0 || w < 0) throw Error(ErrorKind::ShapeMismatch, "negative tensor dimension");
    data_.assign(static_cast<std::size_t>(n) * c * h * w, 0.0);
  }
  explicit Tensor(const Shape& s) : Tensor(s[0], s[1], s[2], s[3]) {}

  static Tensor vector(int length) { return Tensor(length, 1, 1, 1); }

  const Shape& shape() const { return shape_; }
  int n() const { return shape_[0]; }
  int c() const { return shape_[1]; }
  int h() const { return shape_[2]; }
  int w() const { return shape_[3]; }
  std::size_t size() const { return data_.size(); }
  std::size_t sample_size() const { return static_cast<std::size_t>(shape_[1]) * shape_[2] * shape_[3]; }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }
  std::vector<double>& values() { return data_; }
  const std::vector<double>& values() const { return data_; }

  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }

  std::size_t offset(int n, int c, int y, int x) const {
    return ((static_cast<std::size_t>(n) * shape_[1] + c) * shape_[2] + y) * shape_[3] + x;
  }
  double& at(int n, int c, int y, int x) { return data_[offset(n, c, y, x)]; }
  double at(int n, int c, int y, int x) const { return data_[offset(n, c, y, x)]; }

  void fill(double v) { std::fill(data_.begin(), data_.end(), v); }

  bool same_shape(const Tensor& o) const { return shape_ == o.shape_; }

  std::string shape_string() const {
    return "(" + std::to_string(shape_[0]) + "," + std::to_string(shape_[1]) + "," + std::to_string(shape_[2]) + "," +
           std::to_string(shape_[3]) + ")";
  }

  void require_finite(const char* where) const {
    for (double v : data_)
      if (!std::isfinite(v)) throw Error(ErrorKind::NonFinite, std::string(where) + " produced a non-finite value");
  }

 private:
  Shape shape_;
  std::vector<double> data_;
};

/// A trainable tensor with its accumulated gradient.
struct Param {
  Tensor value;
  Tensor grad;

  Param() = default;
  explicit Param(Tensor v) : value(std::move(v)), grad(value.shape()) {}

  void zero_grad() { grad.fill(0.0); }
};

}  // namespace radar_forge::nn
