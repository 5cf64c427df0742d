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

// Layers with hand-written backward passes. forward() is const and leaves
// whatever backward() needs in a caller-owned cache; backward() accumulates
// parameter gradients into Param::grad and returns the input gradient.

#include <cstddef>
#include <random>
#include <string>
#include <vector>

#include "acpa/nn/tensor.hpp"

namespace acpa::nn {

class Conv2d {
 public:
  struct Cache {
    Tensor x;
  };

  Conv2d() = default;
  Conv2d(const std::string& name, std::size_t cin, std::size_t cout, std::size_t kernel, std::size_t stride,
         std::size_t pad, bool bias);

  std::vector<std::size_t> output_shape(const std::vector<std::size_t>& in) const;
  Tensor forward(const Tensor& x, Cache* cache) const;
  Tensor backward(const Tensor& gout, const Cache& cache);
  void init(std::mt19937_64& rng, double gain = 2.0);
  void collect(std::vector<Param*>& out);

  std::size_t in_channels() const noexcept { return cin_; }
  std::size_t out_channels() const noexcept { return cout_; }
  bool has_bias() const noexcept { return has_bias_; }

  Param weight;  // (cout, cin, k, k)
  Param bias;    // (cout), empty when has_bias() is false
  /// Multiplies every gradient this layer emits. 1 in normal use; the
  /// gradient-check canary sets it slightly off.
  double grad_scale = 1.0;

 private:
  // Row-wise kernels instead of im2col + gemm (spatial-attention sized layers).
  bool direct() const noexcept { return stride_ == 1 && cout_ <= 2; }

  std::size_t cin_ = 0, cout_ = 0, k_ = 1, stride_ = 1, pad_ = 0;
  bool has_bias_ = false;
};

class BatchNorm2d {
 public:
  struct Cache {
    Tensor xhat;
    std::vector<double> mean, var, inv_std;
    bool train = false;
  };

  BatchNorm2d() = default;
  BatchNorm2d(const std::string& name, std::size_t channels, double momentum, double eps);

  /// Train mode normalizes by batch statistics (Error{DegenerateBatch} when
  /// B*H*W < 2); eval mode by the running statistics.
  Tensor forward(const Tensor& x, bool train, Cache* cache) const;
  /// Folds the batch statistics of a train-mode cache into the running ones.
  void update_running(const Cache& cache);
  Tensor backward(const Tensor& gout, const Cache& cache);
  void collect(std::vector<Param*>& out);

  Param gamma, beta;
  Tensor running_mean, running_var;
  std::string name;

 private:
  std::size_t channels_ = 0;
  double momentum_ = 0.1, eps_ = 1e-5;
};

Tensor relu(const Tensor& x, KinkMonitor* kinks = nullptr);
/// gout masked by x > 0 (x is the ReLU input).
Tensor relu_backward(const Tensor& gout, const Tensor& x);

double sigmoid(double x) noexcept;

class Linear {
 public:
  struct Cache {
    Tensor x;
  };

  Linear() = default;
  Linear(const std::string& name, std::size_t in, std::size_t out);

  Tensor forward(const Tensor& x, Cache* cache) const;  // (B, in) -> (B, out)
  Tensor backward(const Tensor& gout, const Cache& cache);
  void init(std::mt19937_64& rng, double gain = 2.0);
  void collect(std::vector<Param*>& out);

  Param weight;  // (out, in)
  Param bias;    // (out)

 private:
  std::size_t in_ = 0, out_ = 0;
};

/// Mc(F) = sigmoid(MLP(avgpool F) + MLP(maxpool F)) with one shared MLP
/// C -> C/r -> C and a ReLU between.
class ChannelAttention {
 public:
  struct Cache {
    std::vector<std::size_t> in_shape;
    Tensor avg, mx;               // (B, C)
    std::vector<std::size_t> argmax;  // B*C flat spatial indices
    Linear::Cache fc1_avg, fc1_max, fc2_avg, fc2_max;
    Tensor h_avg, h_max;  // pre-ReLU hidden
    Tensor out;           // (B, C, 1, 1)
  };

  ChannelAttention() = default;
  ChannelAttention(const std::string& name, std::size_t channels, std::size_t reduction);

  Tensor forward(const Tensor& f, Cache* cache, KinkMonitor* kinks = nullptr) const;
  /// gw: (B, C, 1, 1) gradient w.r.t. the weights. Returns dL/dF.
  Tensor backward(const Tensor& gw, const Cache& cache);
  void init(std::mt19937_64& rng);
  void collect(std::vector<Param*>& out);

  Linear fc1, fc2;
};

/// Ms(F) = sigmoid(conv7x7([mean_c F; max_c F])), padding 3.
class SpatialAttention {
 public:
  struct Cache {
    std::vector<std::size_t> in_shape;
    std::vector<std::size_t> argmax;  // B*H*W channel indices
    Conv2d::Cache conv;
    Tensor out;  // (B, 1, H, W)
  };

  SpatialAttention() = default;
  SpatialAttention(const std::string& name, std::size_t kernel);

  Tensor forward(const Tensor& f, Cache* cache, KinkMonitor* kinks = nullptr) const;
  Tensor backward(const Tensor& gmap, const Cache& cache);
  void init(std::mt19937_64& rng);
  void collect(std::vector<Param*>& out);

  Conv2d conv;
};

/// F' = Mc(F) * F, F'' = Ms(F') * F'.
class Cbam {
 public:
  struct Cache {
    Tensor f, fp;
    ChannelAttention::Cache ca;
    SpatialAttention::Cache sa;
  };

  Cbam() = default;
  Cbam(const std::string& name, std::size_t channels, std::size_t reduction, std::size_t spatial_kernel);

  Tensor forward(const Tensor& f, Cache* cache, KinkMonitor* kinks = nullptr) const;
  Tensor backward(const Tensor& gout, const Cache& cache);
  void init(std::mt19937_64& rng);
  void collect(std::vector<Param*>& out);

  ChannelAttention channel;
  SpatialAttention spatial;
};

/// Residual block. Pre-activation: out = skip(F) + conv2(relu(bn2(conv1(relu(bn1(F)))))).
/// Post-activation: out = relu(skip(F) + bn2(conv2(relu(bn1(conv1(F)))))).
/// skip is the identity, or a 1x1 convolution when the channel count changes.
class ParmBlock {
 public:
  struct Cache {
    Tensor x;
    BatchNorm2d::Cache bn1, bn2;
    Conv2d::Cache conv1, conv2, proj;
    Tensor pre1, pre2;  // ReLU inputs
    Tensor sum;         // post-activation only: the pre-ReLU sum
  };

  ParmBlock() = default;
  ParmBlock(const std::string& name, std::size_t in, std::size_t out, bool preactivation, double bn_momentum,
            double bn_eps);

  Tensor forward(const Tensor& x, bool train, Cache* cache, KinkMonitor* kinks = nullptr) const;
  void update_running(const Cache& cache);
  Tensor backward(const Tensor& gout, const Cache& cache);
  void init(std::mt19937_64& rng);
  void collect(std::vector<Param*>& out);
  void collect_buffers(std::vector<std::pair<std::string, Tensor*>>& out);

  bool preactivation() const noexcept { return preact_; }
  bool has_projection() const noexcept { return proj_; }

  BatchNorm2d bn1, bn2;
  Conv2d conv1, conv2, proj;

 private:
  bool preact_ = true;
  bool proj_ = false;
};

/// (B, C, H, W) -> (B, C)
Tensor global_avg_pool(const Tensor& x);
Tensor global_avg_pool_backward(const Tensor& gout, const std::vector<std::size_t>& in_shape);

}  // namespace acpa::nn
