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

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>

#include "acpa/nn/model.hpp"

namespace acpa::nn {

struct GradCheckOptions {
  double eps = 1e-5;
  /// 0 checks every coordinate; otherwise a seeded random subsample of at
  /// least min(this, total) coordinates.
  std::size_t max_coords = 0;
  /// Inputs closer than this to a ReLU kink or a max tie are redrawn.
  double kink_margin = 1e-3;
  std::size_t max_resamples = 100;
  std::uint64_t seed = 7;
};

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::size_t coords = 0;
  std::string worst_param;
  std::size_t worst_index = 0;
  double analytic = 0.0, numeric = 0.0;  // at the worst coordinate
  double kink_margin = 0.0;              // of the input actually used
  std::size_t resamples = 0;
};

/// |a - n| / max(|a|, |n|, 1e-12)
double relative_error(double analytic, double numeric) noexcept;

/// Central differences of the mean cross-entropy against the analytic
/// gradient, in training mode (batch statistics, running statistics left
/// untouched). `x` is redrawn from N(0, 1) until every kink is at least
/// kink_margin away; the batch actually used is left in `x`.
GradCheckResult gradient_check(Model& m, Tensor& x, std::span<const std::uint8_t> labels,
                               const GradCheckOptions& opts = {});

}  // namespace acpa::nn
