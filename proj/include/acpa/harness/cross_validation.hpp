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
#include <vector>

#include "acpa/harness/dataset.hpp"
#include "acpa/harness/training.hpp"

namespace acpa::harness {

struct EvalReport {
  std::string name;
  std::string subject_id;
  Confusion confusion{};
  double accuracy = 0.0;  // trace / total over all validation folds
  std::vector<double> per_fold_accuracies;
  double mean = 0.0;
  double std = 0.0;  // sample standard deviation (n - 1) across folds
  std::uint64_t seed = 0;
  std::size_t total = 0;
  nn::ModelConfig model;
  TrainConfig train;
  bool labels_permuted = false;
  double seconds = 0.0;
};

struct CvOptions {
  std::size_t k = 10;
  TrainConfig train;
  /// Replace the labels with a seeded random permutation before splitting
  /// (chance-level control).
  bool permute_labels = false;
  ProgressFn progress;
  /// Called after each fold with (fold, accuracy).
  std::function<void(std::size_t, double)> on_fold;
};

/// Label sequence shuffled with `seed`; the class histogram is unchanged.
std::vector<std::uint8_t> permuted_labels(std::span<const dsp::FeatureTensor> data, std::uint64_t seed);

EvalReport cross_validate(const nn::ModelConfig& model_cfg, const Dataset& dataset, const CvOptions& opts,
                          std::uint64_t seed);

struct SubjectSummary {
  double mean = 0.0;
  double std = 0.0;
};
/// Across-subject mean and sample std of the per-subject fold means.
SubjectSummary across_subjects(std::span<const EvalReport> reports);

struct AblationReport {
  std::vector<EvalReport> runs;  // full, cbam off, post-activation
  std::uint64_t seed = 0;
};

/// The three ablation configurations derived from `base`, in report order.
std::vector<std::pair<std::string, nn::ModelConfig>> ablation_configs(const nn::ModelConfig& base);

AblationReport ablation_study(const nn::ModelConfig& base, const Dataset& dataset, const CvOptions& opts,
                              std::uint64_t seed);

// Reports. The structured form is JSON:
//   {"format": "acpa-eval-report", "version": 1, "name", "subject_id", "seed",
//    "total", "accuracy", "mean", "std", "per_fold_accuracies": [...],
//    "confusion": [[...] x4] (rows = true class), "labels_permuted",
//    "config": {"model": {...}, "train": {...}}}
// Timing is left out so repeated runs are byte-identical.
std::string report_text(const EvalReport& r);
std::string report_json(const EvalReport& r);
std::string ablation_text(const AblationReport& r);
std::string ablation_json(const AblationReport& r);

}  // namespace acpa::harness
