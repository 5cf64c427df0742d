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
#include <string_view>
#include <utility>
#include <vector>

#include "acpa/nn/layers.hpp"

namespace acpa::nn {

inline constexpr std::size_t kInputChannels = 8;
inline constexpr std::size_t kInputHeight = 16;
inline constexpr std::size_t kInputWidth = 63;
inline constexpr std::size_t kClasses = 4;

struct StageSpec {
  std::size_t channels = 32;
  std::size_t blocks = 1;
  friend bool operator==(const StageSpec&, const StageSpec&) = default;
};

struct ModelConfig {
  std::size_t in_channels = kInputChannels;
  std::size_t stem_channels = 32;
  std::vector<StageSpec> stages{{32, 1}, {64, 1}};
  bool cbam_enabled = true;
  std::size_t cbam_reduction = 8;
  bool preactivation = true;
  std::size_t spatial_kernel = 7;
  std::size_t fc_hidden = 128;
  std::size_t n_classes = kClasses;
  double bn_momentum = 0.1;
  double bn_eps = 1e-5;

  /// Error{ShapeMismatch} for n_classes != 4 or in_channels != 8,
  /// Error{InvalidSpec} for anything else out of range.
  void validate() const;

  /// "key=value" lines; stages as "32x1,64x1". Doubles round-trip exactly.
  std::string to_text() const;
  static ModelConfig from_text(std::string_view text);

  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

std::string format_stages(const std::vector<StageSpec>& stages);
std::vector<StageSpec> parse_stages(std::string_view text);

struct ForwardCache {
  struct StageCache {
    Conv2d::Cache conv;
    Cbam::Cache cbam;
    std::vector<ParmBlock::Cache> blocks;
  };
  Conv2d::Cache stem;
  std::vector<StageCache> stages;
  std::vector<std::size_t> pooled_shape;
  Linear::Cache fc1, fc2;
  Tensor hidden;  // FC1 output before ReLU
  /// Distance to the nearest ReLU / max-selection kink; only tracked when
  /// track_kinks is set before the forward pass.
  bool track_kinks = false;
  KinkMonitor kinks;
  bool train = false;
  bool consumed = false;
};

/// stem conv -> per stage (conv, CBAM, residual blocks) -> global average
/// pool -> FC + ReLU -> FC to raw logits.
class Model {
 public:
  struct Stage {
    Conv2d conv;
    Cbam cbam;  // unused when cbam_enabled is false
    std::vector<ParmBlock> blocks;
  };

  explicit Model(const ModelConfig& cfg, std::uint64_t seed = 1);

  const ModelConfig& config() const noexcept { return cfg_; }
  void set_training(bool train) noexcept { training_ = train; }
  bool training() const noexcept { return training_; }

  /// x: (B, 8, 16, 63) -> logits (B, 4). In training mode batch-norm layers
  /// use batch statistics and, when update_stats is set, fold them into the
  /// running statistics.
  Tensor forward(const Tensor& x, ForwardCache* cache = nullptr, bool update_stats = true);
  /// Eval-mode forward; safe to call concurrently.
  Tensor predict(const Tensor& x) const;
  /// Accumulates parameter gradients. A cache can be consumed once
  /// (a second use throws Error{InvalidSpec}).
  void backward(const Tensor& dlogits, ForwardCache& cache);

  std::vector<Param*> parameters();
  /// Non-trainable state (batch-norm running statistics).
  std::vector<std::pair<std::string, Tensor*>> buffers();
  void zero_grad();
  std::size_t parameter_count();

  Conv2d stem;
  std::vector<Stage> stages;
  Linear fc1, fc2;

 private:
  Tensor run(const Tensor& x, bool train, ForwardCache* cache) const;

  ModelConfig cfg_;
  bool training_ = true;
};

Tensor softmax(const Tensor& logits);

struct LossOutput {
  double loss = 0.0;
  Tensor dlogits;  // (softmax - onehot) / B
};

/// Mean softmax cross-entropy. Labels must be below logits.dim(1).
LossOutput softmax_cross_entropy(const Tensor& logits, std::span<const std::uint8_t> labels);

/// Loss, then the full backward pass through `m`.
double loss_and_backward(Model& m, ForwardCache& cache, const Tensor& logits, std::span<const std::uint8_t> labels);

}  // namespace acpa::nn
