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
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "acpa/common/signal.hpp"

namespace acpa::dsp {

struct IcaModel {
  Eigen::MatrixXd whitening;  // n x n
  Eigen::MatrixXd unmixing;   // n x n, orthonormal rows in whitened space
  Eigen::MatrixXd mixing;     // inverse of unmixing * whitening
  Eigen::VectorXd mean;
  bool converged = false;
  std::size_t iterations = 0;

  std::size_t components() const noexcept { return static_cast<std::size_t>(unmixing.rows()); }
  /// Sources, one row per component.
  Eigen::MatrixXd unmix(const MultiChannel& data) const;
};

struct IcaOptions {
  std::size_t max_iter = 400;
  double tol = 1e-6;
  std::uint64_t seed = 0x1CA;
};

/// FastICA (tanh contrast, symmetric decorrelation) after centering and
/// eigendecomposition whitening. Throws Error{RankDeficient} when a
/// covariance eigenvalue falls below 1e-12 of the largest, and
/// Error{TooFewSamples} below 50 samples per channel. A run that hits
/// max_iter returns the last iterate with converged = false.
IcaModel fit_ica(const MultiChannel& data, const IcaOptions& opts = {});

struct ArtifactPolicy {
  double kurtosis_threshold = 5.0;
  std::optional<std::vector<double>> tmpl;  // e.g. an EOG reference, one value per sample
  double template_threshold = 0.7;
};

struct CleanResult {
  MultiChannel cleaned;
  std::vector<std::size_t> removed;
};

double excess_kurtosis(std::span<const double> x);
double correlation(std::span<const double> x, std::span<const double> y);

/// Flags components by excess kurtosis or template correlation, zeroes
/// them and remixes.
CleanResult remove_artifact_components(const IcaModel& model, const MultiChannel& data, const ArtifactPolicy& policy);

/// Remix with an explicit set of components removed.
MultiChannel remove_components(const IcaModel& model, const MultiChannel& data, std::span<const std::size_t> removed);

}  // namespace acpa::dsp
