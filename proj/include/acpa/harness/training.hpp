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

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "acpa/dsp/features.hpp"
#include "acpa/nn/model.hpp"
#include "acpa/nn/optim.hpp"

namespace acpa::harness {

struct FoldPlan {
  std::vector<std::vector<std::size_t>> folds;
  std::uint64_t seed = 0;
};

/// Stratified shuffled partition: each class's indices are shuffled, the
/// classes are laid end to end and position j goes to fold j % k.
/// Throws Error{TooFewSamples} when n < k.
FoldPlan kfold_split(std::span<const std::uint8_t> labels, std::size_t k, std::uint64_t seed);

using Confusion = std::array<std::array<std::size_t, kNumClasses>, kNumClasses>;  // [true][predicted]

struct TrainConfig {
  std::size_t epochs = 30;
  std::size_t batch_size = 32;
  nn::OptimizerConfig optimizer;
  /// Keep the parameters of the epoch with the best validation accuracy
  /// (otherwise the last epoch's).
  bool best_snapshot = true;
};

struct FoldResult {
  nn::Model model;
  double accuracy = 0.0;
  Confusion confusion{};
  std::vector<double> train_loss;  // mean loss per epoch
  std::vector<double> val_accuracy;
  std::size_t best_epoch = 0;
};

/// Samples are addressed through index lists into `data`.
using ProgressFn = std::function<void(std::size_t epoch, double loss, double val_acc)>;

FoldResult train_fold(const nn::ModelConfig& model_cfg, std::span<const dsp::FeatureTensor> data,
                      std::span<const std::size_t> train_idx, std::span<const std::size_t> val_idx,
                      const TrainConfig& train_cfg, std::uint64_t seed, const ProgressFn& progress = {});

/// (n, 8, 16, 63) batch from the given samples.
nn::Tensor make_batch(std::span<const dsp::FeatureTensor> data, std::span<const std::size_t> idx);

struct Evaluation {
  Confusion confusion{};
  double accuracy = 0.0;
  std::vector<std::uint8_t> predictions;
};

/// Eval-mode predictions on data[idx] (all samples when idx is empty).
Evaluation evaluate(const nn::Model& m, std::span<const dsp::FeatureTensor> data, std::span<const std::size_t> idx = {},
                    std::size_t batch_size = 64);

}  // namespace acpa::harness
