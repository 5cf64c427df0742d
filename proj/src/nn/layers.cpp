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

#include "acpa/nn/layers.hpp"

#include <cmath>
#include <limits>

#include "acpa/common/error.hpp"
#include "acpa/simd/kernels.hpp"

namespace acpa::nn {

namespace {

void expect_rank4(const Tensor& x, std::size_t channels, const char* what) {
  if (x.rank() != 4 || x.dim(1) != channels)
    throw Error(ErrorCode::ShapeMismatch, std::string(what) + ": expected (B, " + std::to_string(channels) +
                                              ", H, W), got " + shape_string(x.shape));
}

// Output columns [lo, hi) read input column ow * stride + kj - pad inside [0, w).
struct ValidRange {
  std::size_t lo, hi;
};
ValidRange valid_columns(std::size_t kj, std::size_t stride, std::size_t pad, std::size_t w, std::size_t wo) {
  std::size_t lo = 0;
  while (lo < wo && lo * stride + kj < pad) ++lo;
  std::size_t hi = lo;
  while (hi < wo && hi * stride + kj < pad + w) ++hi;
  return {lo, hi};
}

void im2col(const double* x, std::size_t cin, std::size_t h, std::size_t w, std::size_t k, std::size_t stride,
            std::size_t pad, std::size_t ho, std::size_t wo, double* cols) {
  const std::size_t n = ho * wo;
  for (std::size_t ci = 0; ci < cin; ++ci)
    for (std::size_t ki = 0; ki < k; ++ki)
      for (std::size_t kj = 0; kj < k; ++kj) {
        double* row = cols + ((ci * k + ki) * k + kj) * n;
        const ValidRange vr = valid_columns(kj, stride, pad, w, wo);
        for (std::size_t oh = 0; oh < ho; ++oh) {
          const auto ih = static_cast<std::ptrdiff_t>(oh * stride + ki) - static_cast<std::ptrdiff_t>(pad);
          double* dst = row + oh * wo;
          if (ih < 0 || ih >= static_cast<std::ptrdiff_t>(h) || vr.lo >= vr.hi) {
            std::fill(dst, dst + wo, 0.0);
            continue;
          }
          const double* src = x + (ci * h + static_cast<std::size_t>(ih)) * w + (vr.lo * stride + kj - pad);
          std::fill(dst, dst + vr.lo, 0.0);
          if (stride == 1) {
            std::copy(src, src + (vr.hi - vr.lo), dst + vr.lo);
          } else {
            for (std::size_t ow = vr.lo; ow < vr.hi; ++ow) dst[ow] = src[(ow - vr.lo) * stride];
          }
          std::fill(dst + vr.hi, dst + wo, 0.0);
        }
      }
}

void col2im_add(const double* cols, std::size_t cin, std::size_t h, std::size_t w, std::size_t k, std::size_t stride,
                std::size_t pad, std::size_t ho, std::size_t wo, double* x) {
  const std::size_t n = ho * wo;
  for (std::size_t ci = 0; ci < cin; ++ci)
    for (std::size_t ki = 0; ki < k; ++ki)
      for (std::size_t kj = 0; kj < k; ++kj) {
        const double* row = cols + ((ci * k + ki) * k + kj) * n;
        const ValidRange vr = valid_columns(kj, stride, pad, w, wo);
        if (vr.lo >= vr.hi) continue;
        for (std::size_t oh = 0; oh < ho; ++oh) {
          const auto ih = static_cast<std::ptrdiff_t>(oh * stride + ki) - static_cast<std::ptrdiff_t>(pad);
          if (ih < 0 || ih >= static_cast<std::ptrdiff_t>(h)) continue;
          double* dst = x + (ci * h + static_cast<std::size_t>(ih)) * w + (vr.lo * stride + kj - pad);
          const double* src = row + oh * wo;
          for (std::size_t ow = vr.lo; ow < vr.hi; ++ow) dst[(ow - vr.lo) * stride] += src[ow];
        }
      }
}

// Per-thread im2col workspace; grown on demand, never shrunk or zeroed.
double* scratch(std::size_t slot, std::size_t n) {
  thread_local std::vector<double> buffers[2];
  if (buffers[slot].size() < n) buffers[slot].resize(n);
  return buffers[slot].data();
}

// Stride-1 convolution written as row-wise axpy/dot, for layers whose few
// output channels would make the im2col buffer dominate the cost.
void direct_forward(const double* x, const double* wt, std::size_t cin, std::size_t cout, std::size_t h,
                    std::size_t w, std::size_t k, std::size_t pad, std::size_t ho, std::size_t wo, double* out) {
  for (std::size_t co = 0; co < cout; ++co)
    for (std::size_t ci = 0; ci < cin; ++ci)
      for (std::size_t ki = 0; ki < k; ++ki)
        for (std::size_t kj = 0; kj < k; ++kj) {
          const double wv = wt[((co * cin + ci) * k + ki) * k + kj];
          const ValidRange vr = valid_columns(kj, 1, pad, w, wo);
          if (vr.lo >= vr.hi || wv == 0.0) continue;
          for (std::size_t oh = 0; oh < ho; ++oh) {
            const auto ih = static_cast<std::ptrdiff_t>(oh + ki) - static_cast<std::ptrdiff_t>(pad);
            if (ih < 0 || ih >= static_cast<std::ptrdiff_t>(h)) continue;
            const double* src = x + (ci * h + static_cast<std::size_t>(ih)) * w + (vr.lo + kj - pad);
            simd::axpy(wv, src, out + (co * ho + oh) * wo + vr.lo, vr.hi - vr.lo);
          }
        }
}

void direct_backward(const double* x, const double* wt, const double* g, std::size_t cin, std::size_t cout,
                     std::size_t h, std::size_t w, std::size_t k, std::size_t pad, std::size_t ho, std::size_t wo,
                     double scale, double* dw, double* dx) {
  for (std::size_t co = 0; co < cout; ++co)
    for (std::size_t ci = 0; ci < cin; ++ci)
      for (std::size_t ki = 0; ki < k; ++ki)
        for (std::size_t kj = 0; kj < k; ++kj) {
          const std::size_t widx = ((co * cin + ci) * k + ki) * k + kj;
          const ValidRange vr = valid_columns(kj, 1, pad, w, wo);
          if (vr.lo >= vr.hi) continue;
          double acc = 0.0;
          for (std::size_t oh = 0; oh < ho; ++oh) {
            const auto ih = static_cast<std::ptrdiff_t>(oh + ki) - static_cast<std::ptrdiff_t>(pad);
            if (ih < 0 || ih >= static_cast<std::ptrdiff_t>(h)) continue;
            const std::size_t off = (ci * h + static_cast<std::size_t>(ih)) * w + (vr.lo + kj - pad);
            const double* grow = g + (co * ho + oh) * wo + vr.lo;
            acc += simd::dot(x + off, grow, vr.hi - vr.lo);
            simd::axpy(scale * wt[widx], grow, dx + off, vr.hi - vr.lo);
          }
          dw[widx] += scale * acc;
        }
}

Tensor add(const Tensor& a, const Tensor& b) {
  Tensor out = a;
  for (std::size_t i = 0; i < out.numel(); ++i) out[i] += b[i];
  return out;
}

}  // namespace

// ---------------------------------------------------------------- Conv2d

Conv2d::Conv2d(const std::string& name, std::size_t cin, std::size_t cout, std::size_t kernel, std::size_t stride,
               std::size_t pad, bool bias)
    : weight(name + ".weight", {cout, cin, kernel, kernel}), cin_(cin), cout_(cout), k_(kernel), stride_(stride),
      pad_(pad), has_bias_(bias) {
  if (cin == 0 || cout == 0 || kernel == 0 || stride == 0) throw Error(ErrorCode::InvalidSpec, name + ": bad conv geometry");
  if (bias) this->bias = Param(name + ".bias", {cout});
}

std::vector<std::size_t> Conv2d::output_shape(const std::vector<std::size_t>& in) const {
  if (in.size() != 4 || in[1] != cin_ || in[2] + 2 * pad_ < k_ || in[3] + 2 * pad_ < k_)
    throw Error(ErrorCode::ShapeMismatch, weight.name + ": input " + shape_string(in) + " incompatible with kernel " +
                                              shape_string(weight.value.shape));
  return {in[0], cout_, (in[2] + 2 * pad_ - k_) / stride_ + 1, (in[3] + 2 * pad_ - k_) / stride_ + 1};
}

Tensor Conv2d::forward(const Tensor& x, Cache* cache) const {
  const auto os = output_shape(x.shape);
  const std::size_t bsz = x.dim(0), h = x.dim(2), w = x.dim(3), ho = os[2], wo = os[3];
  const std::size_t kk = cin_ * k_ * k_, n = ho * wo;
  Tensor out(os);
  double* cols = scratch(0, kk * n);
  for (std::size_t b = 0; b < bsz; ++b) {
    const double* xb = x.data.data() + b * cin_ * h * w;
    double* ob = out.data.data() + b * cout_ * n;
    if (k_ == 1 && stride_ == 1 && pad_ == 0) {
      simd::gemm(false, false, cout_, n, kk, 1.0, weight.value.data.data(), kk, xb, n, 0.0, ob, n);
    } else if (direct()) {
      direct_forward(xb, weight.value.data.data(), cin_, cout_, h, w, k_, pad_, ho, wo, ob);
    } else {
      im2col(xb, cin_, h, w, k_, stride_, pad_, ho, wo, cols);
      simd::gemm(false, false, cout_, n, kk, 1.0, weight.value.data.data(), kk, cols, n, 0.0, ob, n);
    }
    if (has_bias_)
      for (std::size_t co = 0; co < cout_; ++co) {
        const double bv = bias.value[co];
        for (std::size_t i = 0; i < n; ++i) ob[co * n + i] += bv;
      }
  }
  if (cache) cache->x = x;
  return out;
}

Tensor Conv2d::backward(const Tensor& gout, const Cache& cache) {
  const Tensor& x = cache.x;
  const auto os = output_shape(x.shape);
  expect_shape(gout, os, "conv2d backward");
  const std::size_t bsz = x.dim(0), h = x.dim(2), w = x.dim(3), ho = os[2], wo = os[3];
  const std::size_t kk = cin_ * k_ * k_, n = ho * wo;
  Tensor dx(x.shape);
  const bool pointwise = k_ == 1 && stride_ == 1 && pad_ == 0;
  double* cols = scratch(0, kk * n);
  double* dcols = scratch(1, kk * n);
  for (std::size_t b = 0; b < bsz; ++b) {
    const double* gb = gout.data.data() + b * cout_ * n;
    const double* xb = x.data.data() + b * cin_ * h * w;
    double* dxb = dx.data.data() + b * cin_ * h * w;
    if (pointwise) {
      simd::gemm(false, true, cout_, kk, n, grad_scale, gb, n, xb, n, 1.0, weight.grad.data.data(), kk);
      simd::gemm(true, false, kk, n, cout_, grad_scale, weight.value.data.data(), kk, gb, n, 0.0, dxb, n);
    } else if (direct()) {
      direct_backward(xb, weight.value.data.data(), gb, cin_, cout_, h, w, k_, pad_, ho, wo, grad_scale,
                      weight.grad.data.data(), dxb);
    } else {
      im2col(xb, cin_, h, w, k_, stride_, pad_, ho, wo, cols);
      simd::gemm(false, true, cout_, kk, n, grad_scale, gb, n, cols, n, 1.0, weight.grad.data.data(), kk);
      simd::gemm(true, false, kk, n, cout_, grad_scale, weight.value.data.data(), kk, gb, n, 0.0, dcols, n);
      col2im_add(dcols, cin_, h, w, k_, stride_, pad_, ho, wo, dxb);
    }
    if (has_bias_)
      for (std::size_t co = 0; co < cout_; ++co) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += gb[co * n + i];
        bias.grad[co] += grad_scale * s;
      }
  }
  return dx;
}

void Conv2d::init(std::mt19937_64& rng, double gain) {
  fill_normal(weight.value, std::sqrt(gain / static_cast<double>(cin_ * k_ * k_)), rng);
  if (has_bias_) bias.value.zero();
}

void Conv2d::collect(std::vector<Param*>& out) {
  out.push_back(&weight);
  if (has_bias_) out.push_back(&bias);
}

// ---------------------------------------------------------------- BatchNorm2d

BatchNorm2d::BatchNorm2d(const std::string& n, std::size_t channels, double momentum, double eps)
    : gamma(n + ".gamma", {channels}), beta(n + ".beta", {channels}), running_mean({channels}, 0.0),
      running_var({channels}, 1.0), name(n), channels_(channels), momentum_(momentum), eps_(eps) {
  std::fill(gamma.value.data.begin(), gamma.value.data.end(), 1.0);
}

Tensor BatchNorm2d::forward(const Tensor& x, bool train, Cache* cache) const {
  expect_rank4(x, channels_, name.c_str());
  const std::size_t bsz = x.dim(0), hw = x.dim(2) * x.dim(3), n = bsz * hw;
  if (train && n < 2) throw Error(ErrorCode::DegenerateBatch, name + ": batch statistics need B*H*W >= 2");
  Cache local;
  Cache& c = cache ? *cache : local;
  c.train = train;
  c.mean.assign(channels_, 0.0);
  c.var.assign(channels_, 0.0);
  c.inv_std.assign(channels_, 0.0);
  for (std::size_t ch = 0; ch < channels_; ++ch) {
    double mean, var;
    if (train) {
      double s = 0.0;
      for (std::size_t b = 0; b < bsz; ++b) {
        const double* p = x.data.data() + (b * channels_ + ch) * hw;
        for (std::size_t i = 0; i < hw; ++i) s += p[i];
      }
      mean = s / static_cast<double>(n);
      double v = 0.0;
      for (std::size_t b = 0; b < bsz; ++b) {
        const double* p = x.data.data() + (b * channels_ + ch) * hw;
        for (std::size_t i = 0; i < hw; ++i) v += (p[i] - mean) * (p[i] - mean);
      }
      var = v / static_cast<double>(n);
    } else {
      mean = running_mean[ch];
      var = running_var[ch];
    }
    c.mean[ch] = mean;
    c.var[ch] = var;
    c.inv_std[ch] = 1.0 / std::sqrt(var + eps_);
  }
  c.xhat = Tensor(x.shape);
  Tensor y(x.shape);
  for (std::size_t b = 0; b < bsz; ++b)
    for (std::size_t ch = 0; ch < channels_; ++ch) {
      const std::size_t off = (b * channels_ + ch) * hw;
      const double g = gamma.value[ch], be = beta.value[ch], m = c.mean[ch], is = c.inv_std[ch];
      for (std::size_t i = 0; i < hw; ++i) {
        const double xh = (x[off + i] - m) * is;
        c.xhat[off + i] = xh;
        y[off + i] = g * xh + be;
      }
    }
  return y;
}

void BatchNorm2d::update_running(const Cache& cache) {
  if (!cache.train) return;
  const std::size_t n = cache.xhat.numel() / channels_;
  const double unbias = n > 1 ? static_cast<double>(n) / static_cast<double>(n - 1) : 1.0;
  for (std::size_t ch = 0; ch < channels_; ++ch) {
    running_mean[ch] = (1.0 - momentum_) * running_mean[ch] + momentum_ * cache.mean[ch];
    running_var[ch] = (1.0 - momentum_) * running_var[ch] + momentum_ * cache.var[ch] * unbias;
  }
}

Tensor BatchNorm2d::backward(const Tensor& gout, const Cache& c) {
  expect_shape(gout, c.xhat.shape, name.c_str());
  const std::size_t bsz = gout.dim(0), hw = gout.dim(2) * gout.dim(3);
  const double n = static_cast<double>(bsz * hw);
  Tensor dx(gout.shape);
  for (std::size_t ch = 0; ch < channels_; ++ch) {
    double sum_dy = 0.0, sum_dy_xh = 0.0;
    for (std::size_t b = 0; b < bsz; ++b) {
      const std::size_t off = (b * channels_ + ch) * hw;
      for (std::size_t i = 0; i < hw; ++i) {
        sum_dy += gout[off + i];
        sum_dy_xh += gout[off + i] * c.xhat[off + i];
      }
    }
    gamma.grad[ch] += sum_dy_xh;
    beta.grad[ch] += sum_dy;
    const double g = gamma.value[ch], is = c.inv_std[ch];
    for (std::size_t b = 0; b < bsz; ++b) {
      const std::size_t off = (b * channels_ + ch) * hw;
      if (c.train) {
        // dxhat = g * dy; dx = is/n * (n*dxhat - sum(dxhat) - xhat*sum(dxhat*xhat))
        for (std::size_t i = 0; i < hw; ++i)
          dx[off + i] = g * is / n * (n * gout[off + i] - sum_dy - c.xhat[off + i] * sum_dy_xh);
      } else {
        for (std::size_t i = 0; i < hw; ++i) dx[off + i] = g * is * gout[off + i];
      }
    }
  }
  return dx;
}

void BatchNorm2d::collect(std::vector<Param*>& out) {
  out.push_back(&gamma);
  out.push_back(&beta);
}

// ---------------------------------------------------------------- activations

Tensor relu(const Tensor& x, KinkMonitor* kinks) {
  Tensor y(x.shape);
  for (std::size_t i = 0; i < x.numel(); ++i) y[i] = x[i] > 0.0 ? x[i] : 0.0;
  if (kinks)
    for (std::size_t i = 0; i < x.numel(); ++i) kinks->relu_input(x[i]);
  return y;
}

Tensor relu_backward(const Tensor& gout, const Tensor& x) {
  Tensor g(x.shape);
  for (std::size_t i = 0; i < x.numel(); ++i) g[i] = x[i] > 0.0 ? gout[i] : 0.0;
  return g;
}

// Clamped to the open interval: attention weights never reach exactly 0 or 1.
double sigmoid(double x) noexcept {
  constexpr double kLo = std::numeric_limits<double>::min();
  constexpr double kHi = 1.0 - std::numeric_limits<double>::epsilon() / 2;
  if (x >= 0) return std::min(1.0 / (1.0 + std::exp(-x)), kHi);
  const double e = std::exp(x);
  return std::max(e / (1.0 + e), kLo);
}

// ---------------------------------------------------------------- Linear

Linear::Linear(const std::string& name, std::size_t in, std::size_t out)
    : weight(name + ".weight", {out, in}), bias(name + ".bias", {out}), in_(in), out_(out) {}

Tensor Linear::forward(const Tensor& x, Cache* cache) const {
  if (x.rank() != 2 || x.dim(1) != in_)
    throw Error(ErrorCode::ShapeMismatch, weight.name + ": expected (B, " + std::to_string(in_) + "), got " +
                                              shape_string(x.shape));
  const std::size_t bsz = x.dim(0);
  Tensor y({bsz, out_});
  simd::gemm(false, true, bsz, out_, in_, 1.0, x.data.data(), in_, weight.value.data.data(), in_, 0.0, y.data.data(),
             out_);
  for (std::size_t b = 0; b < bsz; ++b)
    for (std::size_t o = 0; o < out_; ++o) y[b * out_ + o] += bias.value[o];
  if (cache) cache->x = x;
  return y;
}

Tensor Linear::backward(const Tensor& gout, const Cache& cache) {
  const Tensor& x = cache.x;
  const std::size_t bsz = x.dim(0);
  expect_shape(gout, {bsz, out_}, "linear backward");
  simd::gemm(true, false, out_, in_, bsz, 1.0, gout.data.data(), out_, x.data.data(), in_, 1.0,
             weight.grad.data.data(), in_);
  for (std::size_t b = 0; b < bsz; ++b)
    for (std::size_t o = 0; o < out_; ++o) bias.grad[o] += gout[b * out_ + o];
  Tensor dx({bsz, in_});
  simd::gemm(false, false, bsz, in_, out_, 1.0, gout.data.data(), out_, weight.value.data.data(), in_, 0.0,
             dx.data.data(), in_);
  return dx;
}

void Linear::init(std::mt19937_64& rng, double gain) {
  fill_normal(weight.value, std::sqrt(gain / static_cast<double>(in_)), rng);
  bias.value.zero();
}

void Linear::collect(std::vector<Param*>& out) {
  out.push_back(&weight);
  out.push_back(&bias);
}

// ---------------------------------------------------------------- ChannelAttention

ChannelAttention::ChannelAttention(const std::string& name, std::size_t channels, std::size_t reduction) {
  if (reduction == 0 || channels % reduction != 0)
    throw Error(ErrorCode::ShapeMismatch, name + ": reduction " + std::to_string(reduction) + " does not divide " +
                                              std::to_string(channels) + " channels");
  fc1 = Linear(name + ".mlp1", channels, channels / reduction);
  fc2 = Linear(name + ".mlp2", channels / reduction, channels);
}

Tensor ChannelAttention::forward(const Tensor& f, Cache* cache, KinkMonitor* kinks) const {
  const std::size_t c = fc1.weight.value.dim(1);
  expect_rank4(f, c, "channel attention");
  const std::size_t bsz = f.dim(0), hw = f.dim(2) * f.dim(3);
  Cache local;
  Cache& k = cache ? *cache : local;
  k.in_shape = f.shape;
  k.avg = Tensor({bsz, c});
  k.mx = Tensor({bsz, c});
  k.argmax.assign(bsz * c, 0);
  for (std::size_t i = 0; i < bsz * c; ++i) {
    const double* p = f.data.data() + i * hw;
    double s = 0.0, best = p[0], second = -1e300;
    std::size_t arg = 0;
    for (std::size_t j = 0; j < hw; ++j) {
      s += p[j];
      if (j == 0) continue;
      if (p[j] > best) {
        second = best;
        best = p[j];
        arg = j;
      } else if (p[j] > second) {
        second = p[j];
      }
    }
    k.avg[i] = s / static_cast<double>(hw);
    k.mx[i] = best;
    k.argmax[i] = arg;
    if (kinks && hw > 1) kinks->max_gap(best - second);
  }
  k.h_avg = fc1.forward(k.avg, &k.fc1_avg);
  k.h_max = fc1.forward(k.mx, &k.fc1_max);
  const Tensor za = fc2.forward(relu(k.h_avg, kinks), &k.fc2_avg);
  const Tensor zm = fc2.forward(relu(k.h_max, kinks), &k.fc2_max);
  k.out = Tensor({bsz, c, 1, 1});
  for (std::size_t i = 0; i < bsz * c; ++i) k.out[i] = sigmoid(za[i] + zm[i]);
  return k.out;
}

Tensor ChannelAttention::backward(const Tensor& gw, const Cache& k) {
  expect_shape(gw, k.out.shape, "channel attention backward");
  const std::size_t bsz = k.in_shape[0], c = k.in_shape[1], hw = k.in_shape[2] * k.in_shape[3];
  Tensor dz({bsz, c});
  for (std::size_t i = 0; i < bsz * c; ++i) dz[i] = gw[i] * k.out[i] * (1.0 - k.out[i]);
  const Tensor davg = fc1.backward(relu_backward(fc2.backward(dz, k.fc2_avg), k.h_avg), k.fc1_avg);
  const Tensor dmax = fc1.backward(relu_backward(fc2.backward(dz, k.fc2_max), k.h_max), k.fc1_max);
  Tensor df(k.in_shape);
  for (std::size_t i = 0; i < bsz * c; ++i) {
    double* p = df.data.data() + i * hw;
    const double g = davg[i] / static_cast<double>(hw);
    for (std::size_t j = 0; j < hw; ++j) p[j] = g;
    p[k.argmax[i]] += dmax[i];
  }
  return df;
}

void ChannelAttention::init(std::mt19937_64& rng) {
  fc1.init(rng, 2.0);
  fc2.init(rng, 1.0);
}

void ChannelAttention::collect(std::vector<Param*>& out) {
  fc1.collect(out);
  fc2.collect(out);
}

// ---------------------------------------------------------------- SpatialAttention

SpatialAttention::SpatialAttention(const std::string& name, std::size_t kernel)
    : conv(name + ".conv", 2, 1, kernel, 1, kernel / 2, true) {
  if (kernel % 2 == 0) throw Error(ErrorCode::InvalidSpec, name + ": spatial kernel must be odd");
}

Tensor SpatialAttention::forward(const Tensor& f, Cache* cache, KinkMonitor* kinks) const {
  if (f.rank() != 4) throw Error(ErrorCode::ShapeMismatch, "spatial attention: expected rank 4, got " + shape_string(f.shape));
  const std::size_t bsz = f.dim(0), c = f.dim(1), h = f.dim(2), w = f.dim(3), hw = h * w;
  Cache local;
  Cache& k = cache ? *cache : local;
  k.in_shape = f.shape;
  k.argmax.assign(bsz * hw, 0);
  Tensor pooled({bsz, 2, h, w});
  for (std::size_t b = 0; b < bsz; ++b)
    for (std::size_t i = 0; i < hw; ++i) {
      double s = 0.0, best = f[(b * c) * hw + i], second = -1e300;
      std::size_t arg = 0;
      for (std::size_t ch = 0; ch < c; ++ch) {
        const double v = f[(b * c + ch) * hw + i];
        s += v;
        if (ch == 0) continue;
        if (v > best) {
          second = best;
          best = v;
          arg = ch;
        } else if (v > second) {
          second = v;
        }
      }
      pooled[(b * 2) * hw + i] = s / static_cast<double>(c);
      pooled[(b * 2 + 1) * hw + i] = best;
      k.argmax[b * hw + i] = arg;
      if (kinks && c > 1) kinks->max_gap(best - second);
    }
  const Tensor z = conv.forward(pooled, &k.conv);
  k.out = Tensor(z.shape);
  for (std::size_t i = 0; i < z.numel(); ++i) k.out[i] = sigmoid(z[i]);
  return k.out;
}

Tensor SpatialAttention::backward(const Tensor& gmap, const Cache& k) {
  expect_shape(gmap, k.out.shape, "spatial attention backward");
  const std::size_t bsz = k.in_shape[0], c = k.in_shape[1], hw = k.in_shape[2] * k.in_shape[3];
  Tensor dz(gmap.shape);
  for (std::size_t i = 0; i < dz.numel(); ++i) dz[i] = gmap[i] * k.out[i] * (1.0 - k.out[i]);
  const Tensor dp = conv.backward(dz, k.conv);
  Tensor df(k.in_shape);
  for (std::size_t b = 0; b < bsz; ++b)
    for (std::size_t i = 0; i < hw; ++i) {
      const double gmean = dp[(b * 2) * hw + i] / static_cast<double>(c);
      for (std::size_t ch = 0; ch < c; ++ch) df[(b * c + ch) * hw + i] = gmean;
      df[(b * c + k.argmax[b * hw + i]) * hw + i] += dp[(b * 2 + 1) * hw + i];
    }
  return df;
}

void SpatialAttention::init(std::mt19937_64& rng) { conv.init(rng, 1.0); }

void SpatialAttention::collect(std::vector<Param*>& out) { conv.collect(out); }

// ---------------------------------------------------------------- Cbam

Cbam::Cbam(const std::string& name, std::size_t channels, std::size_t reduction, std::size_t spatial_kernel)
    : channel(name + ".channel", channels, reduction), spatial(name + ".spatial", spatial_kernel) {}

Tensor Cbam::forward(const Tensor& f, Cache* cache, KinkMonitor* kinks) const {
  Cache local;
  Cache& k = cache ? *cache : local;
  const Tensor mc = channel.forward(f, &k.ca, kinks);
  const std::size_t bsz = f.dim(0), c = f.dim(1), hw = f.dim(2) * f.dim(3);
  Tensor fp(f.shape);
  for (std::size_t i = 0; i < bsz * c; ++i)
    for (std::size_t j = 0; j < hw; ++j) fp[i * hw + j] = mc[i] * f[i * hw + j];
  const Tensor ms = spatial.forward(fp, &k.sa, kinks);
  Tensor out(f.shape);
  for (std::size_t b = 0; b < bsz; ++b)
    for (std::size_t ch = 0; ch < c; ++ch)
      for (std::size_t j = 0; j < hw; ++j) out[(b * c + ch) * hw + j] = ms[b * hw + j] * fp[(b * c + ch) * hw + j];
  if (cache) {
    k.f = f;
    k.fp = std::move(fp);
  }
  return out;
}

Tensor Cbam::backward(const Tensor& gout, const Cache& k) {
  expect_shape(gout, k.f.shape, "cbam backward");
  const std::size_t bsz = k.f.dim(0), c = k.f.dim(1), hw = k.f.dim(2) * k.f.dim(3);
  const Tensor& ms = k.sa.out;
  const Tensor& mc = k.ca.out;
  Tensor dms({bsz, 1, k.f.dim(2), k.f.dim(3)});
  Tensor dfp(k.f.shape);
  for (std::size_t b = 0; b < bsz; ++b)
    for (std::size_t ch = 0; ch < c; ++ch)
      for (std::size_t j = 0; j < hw; ++j) {
        const std::size_t idx = (b * c + ch) * hw + j;
        dms[b * hw + j] += gout[idx] * k.fp[idx];
        dfp[idx] = gout[idx] * ms[b * hw + j];
      }
  const Tensor dfp_att = spatial.backward(dms, k.sa);
  for (std::size_t i = 0; i < dfp.numel(); ++i) dfp[i] += dfp_att[i];
  Tensor dmc({bsz, c, 1, 1});
  Tensor df(k.f.shape);
  for (std::size_t i = 0; i < bsz * c; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < hw; ++j) {
      s += dfp[i * hw + j] * k.f[i * hw + j];
      df[i * hw + j] = dfp[i * hw + j] * mc[i];
    }
    dmc[i] = s;
  }
  const Tensor df_att = channel.backward(dmc, k.ca);
  for (std::size_t i = 0; i < df.numel(); ++i) df[i] += df_att[i];
  return df;
}

void Cbam::init(std::mt19937_64& rng) {
  channel.init(rng);
  spatial.init(rng);
}

void Cbam::collect(std::vector<Param*>& out) {
  channel.collect(out);
  spatial.collect(out);
}

// ---------------------------------------------------------------- ParmBlock

ParmBlock::ParmBlock(const std::string& name, std::size_t in, std::size_t out, bool preactivation, double bn_momentum,
                     double bn_eps)
    : bn1(name + ".bn1", preactivation ? in : out, bn_momentum, bn_eps), bn2(name + ".bn2", out, bn_momentum, bn_eps),
      conv1(name + ".conv1", in, out, 3, 1, 1, false), conv2(name + ".conv2", out, out, 3, 1, 1, false),
      preact_(preactivation), proj_(in != out) {
  if (proj_) proj = Conv2d(name + ".proj", in, out, 1, 1, 0, false);
}

Tensor ParmBlock::forward(const Tensor& x, bool train, Cache* cache, KinkMonitor* kinks) const {
  Cache local;
  Cache& k = cache ? *cache : local;
  expect_rank4(x, conv1.in_channels(), "parm block");
  const Tensor skip = proj_ ? proj.forward(x, &k.proj) : x;
  Tensor out;
  if (preact_) {
    k.pre1 = bn1.forward(x, train, &k.bn1);
    const Tensor c1 = conv1.forward(relu(k.pre1, kinks), &k.conv1);
    k.pre2 = bn2.forward(c1, train, &k.bn2);
    out = add(skip, conv2.forward(relu(k.pre2, kinks), &k.conv2));
  } else {
    k.pre1 = bn1.forward(conv1.forward(x, &k.conv1), train, &k.bn1);
    const Tensor c2 = conv2.forward(relu(k.pre1, kinks), &k.conv2);
    k.sum = add(skip, bn2.forward(c2, train, &k.bn2));
    out = relu(k.sum, kinks);
  }
  if (cache) k.x = x;
  return out;
}

void ParmBlock::update_running(const Cache& cache) {
  bn1.update_running(cache.bn1);
  bn2.update_running(cache.bn2);
}

Tensor ParmBlock::backward(const Tensor& gout, const Cache& k) {
  Tensor dx;
  Tensor gskip;
  if (preact_) {
    gskip = gout;
    const Tensor dr2 = conv2.backward(gout, k.conv2);
    const Tensor dc1 = bn2.backward(relu_backward(dr2, k.pre2), k.bn2);
    const Tensor dr1 = conv1.backward(dc1, k.conv1);
    dx = bn1.backward(relu_backward(dr1, k.pre1), k.bn1);
  } else {
    gskip = relu_backward(gout, k.sum);
    const Tensor dc2 = bn2.backward(gskip, k.bn2);
    const Tensor dr1 = conv2.backward(dc2, k.conv2);
    const Tensor dc1 = bn1.backward(relu_backward(dr1, k.pre1), k.bn1);
    dx = conv1.backward(dc1, k.conv1);
  }
  const Tensor ds = proj_ ? proj.backward(gskip, k.proj) : gskip;
  for (std::size_t i = 0; i < dx.numel(); ++i) dx[i] += ds[i];
  return dx;
}

void ParmBlock::init(std::mt19937_64& rng) {
  conv1.init(rng);
  conv2.init(rng);
  if (proj_) proj.init(rng, 1.0);
}

void ParmBlock::collect(std::vector<Param*>& out) {
  bn1.collect(out);
  conv1.collect(out);
  bn2.collect(out);
  conv2.collect(out);
  if (proj_) proj.collect(out);
}

void ParmBlock::collect_buffers(std::vector<std::pair<std::string, Tensor*>>& out) {
  out.emplace_back(bn1.name + ".running_mean", &bn1.running_mean);
  out.emplace_back(bn1.name + ".running_var", &bn1.running_var);
  out.emplace_back(bn2.name + ".running_mean", &bn2.running_mean);
  out.emplace_back(bn2.name + ".running_var", &bn2.running_var);
}

// ---------------------------------------------------------------- pooling

Tensor global_avg_pool(const Tensor& x) {
  if (x.rank() != 4) throw Error(ErrorCode::ShapeMismatch, "global pool: expected rank 4, got " + shape_string(x.shape));
  const std::size_t bc = x.dim(0) * x.dim(1), hw = x.dim(2) * x.dim(3);
  Tensor y({x.dim(0), x.dim(1)});
  for (std::size_t i = 0; i < bc; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < hw; ++j) s += x[i * hw + j];
    y[i] = s / static_cast<double>(hw);
  }
  return y;
}

Tensor global_avg_pool_backward(const Tensor& gout, const std::vector<std::size_t>& in_shape) {
  Tensor dx(in_shape);
  const std::size_t bc = in_shape[0] * in_shape[1], hw = in_shape[2] * in_shape[3];
  for (std::size_t i = 0; i < bc; ++i)
    for (std::size_t j = 0; j < hw; ++j) dx[i * hw + j] = gout[i] / static_cast<double>(hw);
  return dx;
}

}  // namespace acpa::nn
