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

#include "acpa/nn/optim.hpp"

#include <cmath>

#include "acpa/common/error.hpp"

namespace acpa::nn {

namespace {
void ensure_state(std::vector<std::vector<double>>& state, std::span<Param* const> params) {
  if (state.empty()) {
    for (const Param* p : params) state.emplace_back(p->value.numel(), 0.0);
    return;
  }
  if (state.size() != params.size()) throw Error(ErrorCode::ShapeMismatch, "optimizer parameter list changed");
  for (std::size_t i = 0; i < params.size(); ++i)
    if (state[i].size() != params[i]->value.numel() || params[i]->grad.numel() != params[i]->value.numel())
      throw Error(ErrorCode::ShapeMismatch, "optimizer state does not match " + params[i]->name);
}
}  // namespace

void Sgd::step(std::span<Param* const> params) {
  ensure_state(velocity_, params);
  for (std::size_t i = 0; i < params.size(); ++i) {
    Param& p = *params[i];
    std::vector<double>& v = velocity_[i];
    for (std::size_t j = 0; j < p.value.numel(); ++j) {
      const double g = p.grad[j] + cfg_.weight_decay * p.value[j];
      v[j] = cfg_.momentum * v[j] + g;
      p.value[j] -= cfg_.lr * v[j];
    }
  }
}

void Adam::step(std::span<Param* const> params) {
  ensure_state(m_, params);
  ensure_state(v_, params);
  ++t_;
  const double c1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
  for (std::size_t i = 0; i < params.size(); ++i) {
    Param& p = *params[i];
    std::vector<double>& m = m_[i];
    std::vector<double>& v = v_[i];
    for (std::size_t j = 0; j < p.value.numel(); ++j) {
      const double g = p.grad[j] + cfg_.weight_decay * p.value[j];
      m[j] = cfg_.beta1 * m[j] + (1.0 - cfg_.beta1) * g;
      v[j] = cfg_.beta2 * v[j] + (1.0 - cfg_.beta2) * g * g;
      p.value[j] -= cfg_.lr * (m[j] / c1) / (std::sqrt(v[j] / c2) + cfg_.eps);
    }
  }
}

std::unique_ptr<Optimizer> make_optimizer(const OptimizerConfig& cfg) {
  if (cfg.kind == "adam") return std::make_unique<Adam>(cfg);
  if (cfg.kind == "sgd") return std::make_unique<Sgd>(cfg);
  throw Error(ErrorCode::ConfigError, "unknown optimizer '" + cfg.kind + "'");
}

}  // namespace acpa::nn
