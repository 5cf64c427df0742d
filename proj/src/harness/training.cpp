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

#include "acpa/harness/training.hpp"

#include <algorithm>
#include <numeric>
#include <random>

#include "acpa/common/error.hpp"

namespace acpa::harness {

FoldPlan kfold_split(std::span<const std::uint8_t> labels, std::size_t k, std::uint64_t seed) {
  if (k == 0 || labels.size() < k)
    throw Error(ErrorCode::TooFewSamples, std::to_string(labels.size()) + " samples cannot fill " + std::to_string(k) +
                                              " folds");
  std::mt19937_64 rng(seed);
  std::vector<std::vector<std::size_t>> by_class(256);
  for (std::size_t i = 0; i < labels.size(); ++i) by_class[labels[i]].push_back(i);
  std::vector<std::size_t> order;
  order.reserve(labels.size());
  for (auto& cls : by_class) {
    std::shuffle(cls.begin(), cls.end(), rng);
    order.insert(order.end(), cls.begin(), cls.end());
  }
  FoldPlan plan;
  plan.seed = seed;
  plan.folds.resize(k);
  for (std::size_t j = 0; j < order.size(); ++j) plan.folds[j % k].push_back(order[j]);
  for (auto& f : plan.folds) std::sort(f.begin(), f.end());
  return plan;
}

nn::Tensor make_batch(std::span<const dsp::FeatureTensor> data, std::span<const std::size_t> idx) {
  constexpr std::size_t per = nn::kInputChannels * nn::kInputHeight * nn::kInputWidth;
  nn::Tensor x({idx.size(), nn::kInputChannels, nn::kInputHeight, nn::kInputWidth});
  for (std::size_t b = 0; b < idx.size(); ++b) {
    const dsp::FeatureTensor& f = data[idx[b]];
    if (f.data.size() != per) throw Error(ErrorCode::ShapeMismatch, "feature record is not 8x16x63");
    std::copy(f.data.begin(), f.data.end(), x.data.begin() + static_cast<std::ptrdiff_t>(b * per));
  }
  return x;
}

Evaluation evaluate(const nn::Model& m, std::span<const dsp::FeatureTensor> data, std::span<const std::size_t> idx,
                    std::size_t batch_size) {
  std::vector<std::size_t> all;
  if (idx.empty()) {
    all.resize(data.size());
    std::iota(all.begin(), all.end(), 0);
    idx = all;
  }
  Evaluation ev;
  std::size_t correct = 0;
  for (std::size_t start = 0; start < idx.size(); start += batch_size) {
    const auto chunk = idx.subspan(start, std::min(batch_size, idx.size() - start));
    const nn::Tensor logits = m.predict(make_batch(data, chunk));
    for (std::size_t b = 0; b < chunk.size(); ++b) {
      std::size_t best = 0;
      for (std::size_t j = 1; j < kNumClasses; ++j)
        if (logits[b * kNumClasses + j] > logits[b * kNumClasses + best]) best = j;
      const std::uint8_t truth = data[chunk[b]].label;
      if (truth < kNumClasses) ++ev.confusion[truth][best];
      if (truth == best) ++correct;
      ev.predictions.push_back(static_cast<std::uint8_t>(best));
    }
  }
  ev.accuracy = idx.empty() ? 0.0 : static_cast<double>(correct) / static_cast<double>(idx.size());
  return ev;
}

FoldResult train_fold(const nn::ModelConfig& model_cfg, std::span<const dsp::FeatureTensor> data,
                      std::span<const std::size_t> train_idx, std::span<const std::size_t> val_idx,
                      const TrainConfig& train_cfg, std::uint64_t seed, const ProgressFn& progress) {
  for (std::size_t i : val_idx)
    if (std::find(train_idx.begin(), train_idx.end(), i) != train_idx.end())
      throw Error(ErrorCode::InvalidSpec, "train and validation sets overlap");
  if (train_cfg.batch_size == 0) throw Error(ErrorCode::InvalidSpec, "batch size must be positive");

  FoldResult res{nn::Model(model_cfg, seed), 0.0, {}, {}, {}, 0};
  nn::Model& m = res.model;
  auto opt = nn::make_optimizer(train_cfg.optimizer);
  const std::vector<nn::Param*> params = m.parameters();
  std::mt19937_64 rng(seed ^ 0x5DEECE66Dull);

  std::vector<std::size_t> order(train_idx.begin(), train_idx.end());
  std::vector<std::vector<double>> best_params;
  std::vector<std::vector<double>> best_buffers;
  double best_acc = -1.0;

  for (std::size_t epoch = 0; epoch < train_cfg.epochs; ++epoch) {
    m.set_training(true);
    std::shuffle(order.begin(), order.end(), rng);
    double loss_sum = 0.0;
    std::size_t seen = 0;
    for (std::size_t start = 0; start < order.size(); start += train_cfg.batch_size) {
      std::size_t n = std::min(train_cfg.batch_size, order.size() - start);
      // A trailing batch of one cannot carry batch statistics; fold it into training next epoch.
      if (n < 2) break;
      const std::span<const std::size_t> chunk(order.data() + start, n);
      const nn::Tensor x = make_batch(data, chunk);
      std::vector<std::uint8_t> y(n);
      for (std::size_t b = 0; b < n; ++b) y[b] = data[chunk[b]].label;
      nn::ForwardCache cache;
      m.zero_grad();
      const nn::Tensor logits = m.forward(x, &cache);
      loss_sum += nn::loss_and_backward(m, cache, logits, y) * static_cast<double>(n);
      seen += n;
      opt->step(params);
    }
    res.train_loss.push_back(seen ? loss_sum / static_cast<double>(seen) : 0.0);
    m.set_training(false);
    const double acc = val_idx.empty() ? 0.0 : evaluate(m, data, val_idx).accuracy;
    res.val_accuracy.push_back(acc);
    if (progress) progress(epoch, res.train_loss.back(), acc);
    if (train_cfg.best_snapshot && acc > best_acc) {
      best_acc = acc;
      res.best_epoch = epoch;
      best_params.clear();
      for (const nn::Param* p : params) best_params.push_back(p->value.data);
      best_buffers.clear();
      for (const auto& [name, t] : m.buffers()) best_buffers.push_back(t->data);
    }
  }
  if (train_cfg.best_snapshot && !best_params.empty()) {
    for (std::size_t i = 0; i < params.size(); ++i) params[i]->value.data = best_params[i];
    std::size_t j = 0;
    for (const auto& [name, t] : m.buffers()) t->data = best_buffers[j++];
  } else {
    res.best_epoch = train_cfg.epochs ? train_cfg.epochs - 1 : 0;
  }
  m.set_training(false);
  if (!val_idx.empty()) {
    const Evaluation ev = evaluate(m, data, val_idx);
    res.accuracy = ev.accuracy;
    res.confusion = ev.confusion;
  }
  return res;
}

}  // namespace acpa::harness
