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

#include "acpa/nn/tensor.hpp"

#include <cmath>

#include "acpa/common/error.hpp"

namespace acpa::nn {

std::string shape_string(const std::vector<std::size_t>& shape) {
  std::string s = "(";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) s += ", ";
    s += std::to_string(shape[i]);
  }
  return s + ")";
}

void expect_shape(const Tensor& t, const std::vector<std::size_t>& shape, const char* what) {
  if (t.shape != shape)
    throw Error(ErrorCode::ShapeMismatch,
                std::string(what) + ": expected " + shape_string(shape) + ", got " + shape_string(t.shape));
}

void check_finite(const Tensor& t, const char* what) {
  for (double v : t.data)
    if (!std::isfinite(v)) throw Error(ErrorCode::NonFinite, std::string("non-finite value in ") + what);
}

void fill_normal(Tensor& t, double stddev, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, stddev);
  for (double& v : t.data) v = normal(rng);
}

}  // namespace acpa::nn
