// Copyright 2026 The ACPA-EEG Authors
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
#include <cstddef>
#include <numeric>
#include <random>
#include <string>
#include <vector>

namespace acpa::nn {

/// Dense row-major tensor, batch-first (B, C, H, W) for feature maps.
struct Tensor {
  std::vector<std::size_t> shape;
  std::vector<double> data;

  Tensor() = default;
  explicit Tensor(std::vector<std::size_t> dims, double fill = 0.0) : shape(std::move(dims)) {
    data.assign(count(shape), fill);
  }

  static std::size_t count(const std::vector<std::size_t>& dims) noexcept {
    return std::accumulate(dims.begin(), dims.end(), std::size_t{1}, std::multiplies<>());
  }
  std::size_t numel() const noexcept { return data.size(); }
  std::size_t rank() const noexcept { return shape.size(); }
  std::size_t dim(std::size_t i) const noexcept { return shape[i]; }

  double& operator[](std::size_t i) noexcept { return data[i]; }
  double operator[](std::size_t i) const noexcept { return data[i]; }
  double& at(std::size_t b, std::size_t c, std::size_t h, std::size_t w) noexcept {
    return data[((b * shape[1] + c) * shape[2] + h) * shape[3] + w];
  }
  double at(std::size_t b, std::size_t c, std::size_t h, std::size_t w) const noexcept {
    return data[((b * shape[1] + c) * shape[2] + h) * shape[3] + w];
  }

  void zero() noexcept { std::fill(data.begin(), data.end(), 0.0); }
  bool same_shape(const Tensor& o) const noexcept { return shape == o.shape; }
  friend bool operator==(const Tensor&, const Tensor&) = default;
};

std::string shape_string(const std::vector<std::size_t>& shape);

/// Throws Error{ShapeMismatch} naming `what` unless t has the given shape.
void expect_shape(const Tensor& t, const std::vector<std::size_t>& shape, const char* what);
/// Throws Error{NonFinite} naming `what` if any element is NaN or infinite.
void check_finite(const Tensor& t, const char* what);

/// Trainable tensor plus its gradient accumulator.
struct Param {
  std::string name;
  Tensor value;
  Tensor grad;

  Param() = default;
  Param(std::string n, std::vector<std::size_t> dims) : name(std::move(n)), value(dims), grad(dims) {}
};

void fill_normal(Tensor& t, double stddev, std::mt19937_64& rng);

/// Smallest distance to a non-differentiable point seen during a forward
/// pass: |x| at every ReLU input, top-1 minus top-2 at every max reduction.
struct KinkMonitor {
  double margin = 1e300;
  void relu_input(double x) noexcept {
    const double a = x < 0 ? -x : x;
    if (a < margin) margin = a;
  }
  void max_gap(double gap) noexcept {
    if (gap < margin) margin = gap;
  }
};

}  // namespace acpa::nn
