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

#include "acpa/nn/model.hpp"

#include <charconv>
#include <cmath>
#include <random>
#include <sstream>

#include "acpa/common/error.hpp"

namespace acpa::nn {

namespace {

std::string fmt_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::size_t parse_count(std::string_view key, std::string_view v) {
  std::size_t out = 0;
  const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc() || res.ptr != v.data() + v.size())
    throw Error(ErrorCode::ConfigError, "model config: bad integer for " + std::string(key) + ": '" + std::string(v) + "'");
  return out;
}

double parse_real(std::string_view key, std::string_view v) {
  double out = 0.0;
  const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc() || res.ptr != v.data() + v.size())
    throw Error(ErrorCode::ConfigError, "model config: bad number for " + std::string(key) + ": '" + std::string(v) + "'");
  return out;
}

bool parse_bool(std::string_view key, std::string_view v) {
  if (v == "1" || v == "true") return true;
  if (v == "0" || v == "false") return false;
  throw Error(ErrorCode::ConfigError, "model config: bad boolean for " + std::string(key) + ": '" + std::string(v) + "'");
}

}  // namespace

std::string format_stages(const std::vector<StageSpec>& stages) {
  std::string s;
  for (std::size_t i = 0; i < stages.size(); ++i) {
    if (i) s += ',';
    s += std::to_string(stages[i].channels) + 'x' + std::to_string(stages[i].blocks);
  }
  return s;
}

std::vector<StageSpec> parse_stages(std::string_view text) {
  std::vector<StageSpec> out;
  while (!text.empty()) {
    const auto comma = text.find(',');
    const std::string_view item = text.substr(0, comma);
    const auto x = item.find('x');
    if (x == std::string_view::npos) throw Error(ErrorCode::ConfigError, "stage '" + std::string(item) + "' is not CxN");
    out.push_back({parse_count("stages", item.substr(0, x)), parse_count("stages", item.substr(x + 1))});
    if (comma == std::string_view::npos) break;
    text.remove_prefix(comma + 1);
  }
  return out;
}

void ModelConfig::validate() const {
  if (n_classes != kClasses)
    throw Error(ErrorCode::ShapeMismatch, "n_classes must be 4, got " + std::to_string(n_classes));
  if (in_channels != kInputChannels)
    throw Error(ErrorCode::ShapeMismatch, "in_channels must be 8, got " + std::to_string(in_channels));
  if (stem_channels == 0 || fc_hidden == 0 || stages.empty())
    throw Error(ErrorCode::InvalidSpec, "stem, stages and fc_hidden must be non-empty");
  if (spatial_kernel % 2 == 0) throw Error(ErrorCode::InvalidSpec, "spatial_kernel must be odd");
  for (const StageSpec& s : stages) {
    if (s.channels == 0) throw Error(ErrorCode::InvalidSpec, "stage with zero channels");
    if (cbam_enabled && (cbam_reduction == 0 || s.channels % cbam_reduction != 0))
      throw Error(ErrorCode::InvalidSpec, "cbam_reduction " + std::to_string(cbam_reduction) +
                                              " does not divide stage width " + std::to_string(s.channels));
  }
  if (!(bn_momentum > 0.0 && bn_momentum <= 1.0) || !(bn_eps > 0.0))
    throw Error(ErrorCode::InvalidSpec, "bn_momentum must be in (0, 1] and bn_eps positive");
}

std::string ModelConfig::to_text() const {
  std::ostringstream o;
  o << "in_channels=" << in_channels << '\n'
    << "stem_channels=" << stem_channels << '\n'
    << "stages=" << format_stages(stages) << '\n'
    << "cbam_enabled=" << (cbam_enabled ? 1 : 0) << '\n'
    << "cbam_reduction=" << cbam_reduction << '\n'
    << "preactivation=" << (preactivation ? 1 : 0) << '\n'
    << "spatial_kernel=" << spatial_kernel << '\n'
    << "fc_hidden=" << fc_hidden << '\n'
    << "n_classes=" << n_classes << '\n'
    << "bn_momentum=" << fmt_double(bn_momentum) << '\n'
    << "bn_eps=" << fmt_double(bn_eps) << '\n';
  return o.str();
}

ModelConfig ModelConfig::from_text(std::string_view text) {
  ModelConfig c;
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw Error(ErrorCode::ConfigError, "model config line without '='");
    const std::string_view k = line.substr(0, eq), v = line.substr(eq + 1);
    if (k == "in_channels") c.in_channels = parse_count(k, v);
    else if (k == "stem_channels") c.stem_channels = parse_count(k, v);
    else if (k == "stages") c.stages = parse_stages(v);
    else if (k == "cbam_enabled") c.cbam_enabled = parse_bool(k, v);
    else if (k == "cbam_reduction") c.cbam_reduction = parse_count(k, v);
    else if (k == "preactivation") c.preactivation = parse_bool(k, v);
    else if (k == "spatial_kernel") c.spatial_kernel = parse_count(k, v);
    else if (k == "fc_hidden") c.fc_hidden = parse_count(k, v);
    else if (k == "n_classes") c.n_classes = parse_count(k, v);
    else if (k == "bn_momentum") c.bn_momentum = parse_real(k, v);
    else if (k == "bn_eps") c.bn_eps = parse_real(k, v);
    else throw Error(ErrorCode::ConfigError, "unknown model config key '" + std::string(k) + "'");
  }
  return c;
}

// ---------------------------------------------------------------- Model

Model::Model(const ModelConfig& cfg, std::uint64_t seed) : cfg_(cfg) {
  cfg_.validate();
  std::mt19937_64 rng(seed);
  stem = Conv2d("stem", cfg_.in_channels, cfg_.stem_channels, 3, 1, 1, true);
  stem.init(rng);
  std::size_t width = cfg_.stem_channels;
  for (std::size_t s = 0; s < cfg_.stages.size(); ++s) {
    const std::string prefix = "stage" + std::to_string(s);
    const std::size_t out = cfg_.stages[s].channels;
    Stage st;
    st.conv = Conv2d(prefix + ".conv", width, out, 3, 1, 1, true);
    st.conv.init(rng);
    if (cfg_.cbam_enabled) {
      st.cbam = Cbam(prefix + ".cbam", out, cfg_.cbam_reduction, cfg_.spatial_kernel);
      st.cbam.init(rng);
    }
    for (std::size_t b = 0; b < cfg_.stages[s].blocks; ++b) {
      ParmBlock blk(prefix + ".block" + std::to_string(b), out, out, cfg_.preactivation, cfg_.bn_momentum, cfg_.bn_eps);
      blk.init(rng);
      st.blocks.push_back(std::move(blk));
    }
    stages.push_back(std::move(st));
    width = out;
  }
  fc1 = Linear("fc1", width, cfg_.fc_hidden);
  fc1.init(rng, 2.0);
  fc2 = Linear("fc2", cfg_.fc_hidden, cfg_.n_classes);
  fc2.init(rng, 1.0);
}

Tensor Model::run(const Tensor& x, bool train, ForwardCache* cache) const {
  if (x.rank() != 4 || x.dim(1) != cfg_.in_channels || x.dim(2) != kInputHeight || x.dim(3) != kInputWidth)
    throw Error(ErrorCode::ShapeMismatch, "model input must be (B, 8, 16, 63), got " + shape_string(x.shape));
  check_finite(x, "model input");
  KinkMonitor* kinks = cache && cache->track_kinks ? &cache->kinks : nullptr;
  if (cache) {
    cache->stages.assign(stages.size(), {});
    cache->train = train;
    cache->consumed = false;
    cache->kinks = {};
  }
  Tensor h = stem.forward(x, cache ? &cache->stem : nullptr);
  for (std::size_t s = 0; s < stages.size(); ++s) {
    ForwardCache::StageCache* sc = cache ? &cache->stages[s] : nullptr;
    h = stages[s].conv.forward(h, sc ? &sc->conv : nullptr);
    if (cfg_.cbam_enabled) h = stages[s].cbam.forward(h, sc ? &sc->cbam : nullptr, kinks);
    if (sc) sc->blocks.resize(stages[s].blocks.size());
    for (std::size_t b = 0; b < stages[s].blocks.size(); ++b)
      h = stages[s].blocks[b].forward(h, train, sc ? &sc->blocks[b] : nullptr, kinks);
  }
  if (cache) cache->pooled_shape = h.shape;
  Tensor hidden = fc1.forward(global_avg_pool(h), cache ? &cache->fc1 : nullptr);
  Tensor logits = fc2.forward(relu(hidden, kinks), cache ? &cache->fc2 : nullptr);
  if (cache) cache->hidden = std::move(hidden);
  check_finite(logits, "logits");
  return logits;
}

Tensor Model::forward(const Tensor& x, ForwardCache* cache, bool update_stats) {
  if (!training_ || !update_stats) return run(x, training_, cache);
  ForwardCache local;
  ForwardCache& c = cache ? *cache : local;
  Tensor logits = run(x, true, &c);
  for (std::size_t s = 0; s < stages.size(); ++s)
    for (std::size_t b = 0; b < stages[s].blocks.size(); ++b) stages[s].blocks[b].update_running(c.stages[s].blocks[b]);
  return logits;
}

Tensor Model::predict(const Tensor& x) const { return run(x, false, nullptr); }

void Model::backward(const Tensor& dlogits, ForwardCache& cache) {
  if (cache.consumed) throw Error(ErrorCode::InvalidSpec, "forward cache already consumed by a backward pass");
  cache.consumed = true;
  Tensor g = fc2.backward(dlogits, cache.fc2);
  g = fc1.backward(relu_backward(g, cache.hidden), cache.fc1);
  g = global_avg_pool_backward(g, cache.pooled_shape);
  for (std::size_t s = stages.size(); s-- > 0;) {
    ForwardCache::StageCache& sc = cache.stages[s];
    for (std::size_t b = stages[s].blocks.size(); b-- > 0;) g = stages[s].blocks[b].backward(g, sc.blocks[b]);
    if (cfg_.cbam_enabled) g = stages[s].cbam.backward(g, sc.cbam);
    g = stages[s].conv.backward(g, sc.conv);
  }
  stem.backward(g, cache.stem);
}

std::vector<Param*> Model::parameters() {
  std::vector<Param*> out;
  stem.collect(out);
  for (Stage& st : stages) {
    st.conv.collect(out);
    if (cfg_.cbam_enabled) st.cbam.collect(out);
    for (ParmBlock& b : st.blocks) b.collect(out);
  }
  fc1.collect(out);
  fc2.collect(out);
  return out;
}

std::vector<std::pair<std::string, Tensor*>> Model::buffers() {
  std::vector<std::pair<std::string, Tensor*>> out;
  for (Stage& st : stages)
    for (ParmBlock& b : st.blocks) b.collect_buffers(out);
  return out;
}

void Model::zero_grad() {
  for (Param* p : parameters()) p->grad.zero();
}

std::size_t Model::parameter_count() {
  std::size_t n = 0;
  for (Param* p : parameters()) n += p->value.numel();
  return n;
}

// ---------------------------------------------------------------- loss

Tensor softmax(const Tensor& logits) {
  if (logits.rank() != 2) throw Error(ErrorCode::ShapeMismatch, "softmax expects (B, K)");
  const std::size_t bsz = logits.dim(0), k = logits.dim(1);
  Tensor p(logits.shape);
  for (std::size_t b = 0; b < bsz; ++b) {
    const double* z = logits.data.data() + b * k;
    double mx = z[0];
    for (std::size_t j = 1; j < k; ++j) mx = std::max(mx, z[j]);
    double s = 0.0;
    for (std::size_t j = 0; j < k; ++j) s += std::exp(z[j] - mx);
    for (std::size_t j = 0; j < k; ++j) p[b * k + j] = std::exp(z[j] - mx) / s;
  }
  return p;
}

LossOutput softmax_cross_entropy(const Tensor& logits, std::span<const std::uint8_t> labels) {
  if (logits.rank() != 2 || logits.dim(0) != labels.size())
    throw Error(ErrorCode::ShapeMismatch, "loss: logits " + shape_string(logits.shape) + " vs " +
                                              std::to_string(labels.size()) + " labels");
  const std::size_t bsz = logits.dim(0), k = logits.dim(1);
  LossOutput out;
  out.dlogits = Tensor(logits.shape);
  for (std::size_t b = 0; b < bsz; ++b) {
    if (labels[b] >= k) throw Error(ErrorCode::InvalidSpec, "label " + std::to_string(labels[b]) + " out of range");
    const double* z = logits.data.data() + b * k;
    double mx = z[0];
    for (std::size_t j = 1; j < k; ++j) mx = std::max(mx, z[j]);
    double s = 0.0;
    for (std::size_t j = 0; j < k; ++j) s += std::exp(z[j] - mx);
    const double lse = mx + std::log(s);
    out.loss += lse - z[labels[b]];
    for (std::size_t j = 0; j < k; ++j) {
      const double p = std::exp(z[j] - lse);
      out.dlogits[b * k + j] = (p - (j == labels[b] ? 1.0 : 0.0)) / static_cast<double>(bsz);
    }
  }
  out.loss /= static_cast<double>(bsz);
  return out;
}

double loss_and_backward(Model& m, ForwardCache& cache, const Tensor& logits, std::span<const std::uint8_t> labels) {
  LossOutput l = softmax_cross_entropy(logits, labels);
  m.backward(l.dlogits, cache);
  return l.loss;
}

}  // namespace acpa::nn
