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

// Finite-difference probe for single layers, shared by the unit and
// acceptance tests.

#include <cstdint>
#include <functional>
#include <random>
#include <vector>

#include "acpa/nn/gradcheck.hpp"
#include "acpa/nn/layers.hpp"

namespace acpa::testsupport {

// A layer under test: forward keeps its cache internally, backward consumes it.
struct Probe {
  std::function<nn::Tensor(const nn::Tensor&, nn::KinkMonitor*)> forward;
  std::function<nn::Tensor(const nn::Tensor&)> backward;
  std::vector<nn::Param*> params;
};

struct FdResult {
  double worst = 0.0;
  double analytic = 0.0, numeric = 0.0;  // at the worst coordinate
  bool kink_free = true;
};

inline double weighted_sum(const nn::Tensor& out, const nn::Tensor& r) {
  double s = 0;
  for (std::size_t i = 0; i < out.numel(); ++i) s += out[i] * r[i];
  return s;
}

// Central differences of L = sum(r * layer(x)) against the analytic
// gradients for every input and parameter coordinate. Inputs closer than
// 1e-3 to a kink are redrawn.
inline FdResult fd_check(Probe& p, const std::vector<std::size_t>& in_shape, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  nn::Tensor x(in_shape);
  for (int attempt = 0;; ++attempt) {
    nn::fill_normal(x, 1.0, rng);
    nn::KinkMonitor k;
    p.forward(x, &k);
    if (k.margin >= 1e-3) break;
    if (attempt > 500) return {1.0, 0.0, 0.0, false};
  }
  for (nn::Param* q : p.params) q->grad.zero();
  const nn::Tensor out = p.forward(x, nullptr);
  nn::Tensor r(out.shape);
  nn::fill_normal(r, 1.0, rng);
  const nn::Tensor gx = p.backward(r);

  // Larger than the whole-model default: at 1e-5 round-off in L already
  // reaches 1e-6 relative on the smallest batch-norm gradients.
  const double eps = 3e-5;
  FdResult res;
  auto probe = [&](double& v, double analytic) {
    const double keep = v;
    v = keep + eps;
    const double up = weighted_sum(p.forward(x, nullptr), r);
    v = keep - eps;
    const double down = weighted_sum(p.forward(x, nullptr), r);
    v = keep;
    const double numeric = (up - down) / (2 * eps);
    const double e = nn::relative_error(analytic, numeric);
    if (e > res.worst) res = {e, analytic, numeric, true};
  };
  for (std::size_t i = 0; i < x.numel(); ++i) probe(x.data[i], gx[i]);
  for (nn::Param* q : p.params)
    for (std::size_t i = 0; i < q->value.numel(); ++i) probe(q->value.data[i], q->grad[i]);
  return res;
}

inline void randomize(const std::vector<nn::Param*>& params, std::mt19937_64& rng, double sd = 0.5) {
  for (nn::Param* q : params) nn::fill_normal(q->value, sd, rng);
}

}  // namespace acpa::testsupport
