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
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "acpa/nn/tensor.hpp"

namespace acpa::nn {

struct OptimizerConfig {
  std::string kind = "adam";  // "adam" or "sgd"
  double lr = 1e-3;
  double momentum = 0.0;      // sgd
  double weight_decay = 0.0;  // L2 term added to the gradient
  double beta1 = 0.9;         // adam
  double beta2 = 0.999;
  double eps = 1e-8;
};

class Optimizer {
 public:
  virtual ~Optimizer() = default;
  /// Updates values from grads. Throws Error{ShapeMismatch} if the parameter
  /// list no longer matches the one seen on the first step.
  virtual void step(std::span<Param* const> params) = 0;
};

/// v = momentum * v + (g + wd * p); p -= lr * v
class Sgd final : public Optimizer {
 public:
  explicit Sgd(const OptimizerConfig& cfg) : cfg_(cfg) {}
  void step(std::span<Param* const> params) override;

 private:
  OptimizerConfig cfg_;
  std::vector<std::vector<double>> velocity_;
};

/// Adam with bias-corrected moments.
class Adam final : public Optimizer {
 public:
  explicit Adam(const OptimizerConfig& cfg) : cfg_(cfg) {}
  void step(std::span<Param* const> params) override;

 private:
  OptimizerConfig cfg_;
  std::vector<std::vector<double>> m_, v_;
  std::size_t t_ = 0;
};

/// Throws Error{ConfigError} for an unknown kind.
std::unique_ptr<Optimizer> make_optimizer(const OptimizerConfig& cfg);

}  // namespace acpa::nn
