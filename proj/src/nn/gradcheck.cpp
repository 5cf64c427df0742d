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

#include "acpa/nn/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <vector>

namespace acpa::nn {

double relative_error(double analytic, double numeric) noexcept {
  return std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), 1e-12});
}

GradCheckResult gradient_check(Model& m, Tensor& x, std::span<const std::uint8_t> labels,
                               const GradCheckOptions& opts) {
  const bool was_training = m.training();
  m.set_training(true);
  std::mt19937_64 rng(opts.seed);
  GradCheckResult res;

  ForwardCache cache;
  cache.track_kinks = true;
  Tensor logits = m.forward(x, &cache, false);
  while (cache.kinks.margin < opts.kink_margin && res.resamples < opts.max_resamples) {
    fill_normal(x, 1.0, rng);
    ++res.resamples;
    logits = m.forward(x, &cache, false);
  }
  res.kink_margin = cache.kinks.margin;

  m.zero_grad();
  loss_and_backward(m, cache, logits, labels);

  const std::vector<Param*> params = m.parameters();
  std::vector<std::pair<std::size_t, std::size_t>> coords;
  for (std::size_t p = 0; p < params.size(); ++p)
    for (std::size_t j = 0; j < params[p]->value.numel(); ++j) coords.emplace_back(p, j);
  if (opts.max_coords > 0 && coords.size() > opts.max_coords) {
    std::shuffle(coords.begin(), coords.end(), rng);
    coords.resize(opts.max_coords);
  }

  auto loss_at = [&]() {
    return softmax_cross_entropy(m.forward(x, nullptr, false), labels).loss;
  };
  for (const auto& [p, j] : coords) {
    double& w = params[p]->value[j];
    const double orig = w;
    w = orig + opts.eps;
    const double lp = loss_at();
    w = orig - opts.eps;
    const double lm = loss_at();
    w = orig;
    const double numeric = (lp - lm) / (2.0 * opts.eps);
    const double analytic = params[p]->grad[j];
    const double err = relative_error(analytic, numeric);
    if (err > res.max_rel_error || res.coords == 0) {
      res.max_rel_error = std::max(res.max_rel_error, err);
      if (err >= res.max_rel_error) {
        res.worst_param = params[p]->name;
        res.worst_index = j;
        res.analytic = analytic;
        res.numeric = numeric;
      }
    }
    ++res.coords;
  }
  m.set_training(was_training);
  return res;
}

}  // namespace acpa::nn
