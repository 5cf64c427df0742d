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

#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <random>
#include <set>

#include "acpa/common/error.hpp"
#include "acpa/harness/cross_validation.hpp"
#include "acpa/harness/dataset.hpp"
#include "acpa/harness/training.hpp"
#include "json.hpp"

namespace {

using namespace acpa;
using namespace acpa::harness;

nn::ModelConfig tiny_model() {
  nn::ModelConfig c;
  c.stem_channels = 4;
  c.stages = {{4, 1}};
  c.cbam_reduction = 2;
  c.fc_hidden = 8;
  return c;
}

// Class k has a bump on feature row 4k; separable by construction.
Dataset toy_dataset(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<float> g(0.0f, 1.0f);
  Dataset d;
  d.subject_id = "toy";
  d.seed = seed;
  for (std::size_t i = 0; i < n; ++i) {
    dsp::FeatureTensor f;
    f.label = static_cast<std::uint8_t>(i % 4);
    f.data.resize(8 * 16 * 63);
    for (float& v : f.data) v = g(rng);
    for (std::size_t c = 0; c < 8; ++c)
      for (std::size_t t = 0; t < 63; ++t) f.data[(c * 16 + 4 * f.label) * 63 + t] += 2.0f;
    d.samples.push_back(std::move(f));
  }
  return d;
}

void check_partition(const FoldPlan& plan, std::span<const std::uint8_t> labels, std::size_t k) {
  ASSERT_EQ(plan.folds.size(), k);
  std::vector<int> hits(labels.size(), 0);
  for (const auto& f : plan.folds) {
    EXPECT_TRUE(std::is_sorted(f.begin(), f.end()));
    for (std::size_t i : f) ++hits[i];
  }
  for (int h : hits) ASSERT_EQ(h, 1);
  for (std::uint8_t cls = 0; cls < 4; ++cls) {
    std::size_t lo = SIZE_MAX, hi = 0;
    for (const auto& f : plan.folds) {
      const auto n = static_cast<std::size_t>(std::count_if(f.begin(), f.end(), [&](std::size_t i) { return labels[i] == cls; }));
      lo = std::min(lo, n);
      hi = std::max(hi, n);
    }
    EXPECT_LE(hi - lo, 1u) << "class " << int(cls);
  }
  std::size_t lo = SIZE_MAX, hi = 0;
  for (const auto& f : plan.folds) {
    lo = std::min(lo, f.size());
    hi = std::max(hi, f.size());
  }
  EXPECT_LE(hi - lo, 1u);
}

TEST(Folds, NineHundredFiftyGivesFoldsOfNinetyFive) {
  std::vector<std::uint8_t> labels;
  const auto counts = balanced_counts(950);
  for (std::uint8_t c = 0; c < 4; ++c) labels.insert(labels.end(), counts[c], c);
  const FoldPlan p = kfold_split(labels, 10, 42);
  for (const auto& f : p.folds) EXPECT_EQ(f.size(), 95u);
  check_partition(p, labels, 10);
}

TEST(Folds, TenSamplesGiveSingletons) {
  const std::vector<std::uint8_t> labels{0, 1, 2, 3, 0, 1, 2, 3, 0, 1};
  const FoldPlan p = kfold_split(labels, 10, 1);
  for (const auto& f : p.folds) EXPECT_EQ(f.size(), 1u);
  check_partition(p, labels, 10);
}

TEST(Folds, PropertiesHoldForRandomSeeds) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 10 + rng() % 300, k = 2 + rng() % 9;
    std::vector<std::uint8_t> labels(n);
    for (auto& l : labels) l = static_cast<std::uint8_t>(rng() % 4);
    const std::uint64_t seed = rng();
    const FoldPlan p = kfold_split(labels, k, seed);
    check_partition(p, labels, k);
    EXPECT_EQ(p.folds, kfold_split(labels, k, seed).folds);
  }
}

TEST(Folds, TooFewSamples) {
  const std::vector<std::uint8_t> labels{0, 1, 2};
  try {
    kfold_split(labels, 10, 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::TooFewSamples);
  }
}

TEST(Dataset, BalancedCounts) {
  EXPECT_EQ(balanced_counts(950), (std::array<std::size_t, 4>{238, 238, 237, 237}));
  EXPECT_EQ(balanced_counts(8), (std::array<std::size_t, 4>{2, 2, 2, 2}));
}

TEST(Dataset, SmallSyntheticBuildIsDeterministic) {
  DatasetConfig cfg;
  cfg.per_subject = 10;
  cfg.epochs_per_session = 3;
  const auto a = build_synthetic_dataset(1, cfg, 5);
  const auto b = build_synthetic_dataset(1, cfg, 5);
  ASSERT_EQ(a.size(), 1u);
  ASSERT_EQ(a[0].samples.size(), 10u);
  EXPECT_EQ(a[0].samples, b[0].samples);
  std::array<std::size_t, 4> hist{};
  for (const auto& f : a[0].samples) {
    ASSERT_LT(f.label, 4);
    ++hist[f.label];
    EXPECT_EQ(f.data.size(), 8u * 16 * 63);
  }
  EXPECT_EQ(hist, balanced_counts(10));
  const auto c = build_synthetic_dataset(1, cfg, 6);
  EXPECT_NE(c[0].samples, a[0].samples);
}

TEST(Training, FoldTrainingIsDeterministicAndLearns) {
  const Dataset d = toy_dataset(64, 1);
  std::vector<std::size_t> train(48), val(16);
  std::iota(train.begin(), train.end(), 0);
  std::iota(val.begin(), val.end(), 48);
  TrainConfig tc;
  tc.epochs = 4;
  tc.batch_size = 16;
  tc.optimizer.lr = 3e-3;
  const FoldResult a = train_fold(tiny_model(), d.samples, train, val, tc, 9);
  const FoldResult b = train_fold(tiny_model(), d.samples, train, val, tc, 9);
  EXPECT_EQ(a.train_loss, b.train_loss);
  EXPECT_EQ(a.val_accuracy, b.val_accuracy);
  ASSERT_EQ(a.train_loss.size(), 4u);
  EXPECT_LT(a.train_loss.back(), a.train_loss.front());
  EXPECT_EQ(a.accuracy, *std::max_element(a.val_accuracy.begin(), a.val_accuracy.end()));
  EXPECT_EQ(evaluate(a.model, d.samples, val).accuracy, a.accuracy);
}

TEST(Training, OverlappingIndicesRejected) {
  const Dataset d = toy_dataset(8, 1);
  const std::vector<std::size_t> train{0, 1, 2, 3, 4}, val{4, 5};
  EXPECT_THROW(train_fold(tiny_model(), d.samples, train, val, {}, 1), Error);
}

TEST(Evaluate, ConfusionConservation) {
  const Dataset d = toy_dataset(37, 2);
  const nn::Model m(tiny_model(), 3);
  const Evaluation e = evaluate(m, d.samples, {}, 8);
  std::size_t total = 0, trace = 0;
  for (std::size_t t = 0; t < 4; ++t)
    for (std::size_t p = 0; p < 4; ++p) {
      total += e.confusion[t][p];
      if (t == p) trace += e.confusion[t][p];
    }
  EXPECT_EQ(total, 37u);
  EXPECT_EQ(e.predictions.size(), 37u);
  EXPECT_DOUBLE_EQ(e.accuracy, static_cast<double>(trace) / 37.0);
}

TEST(CrossValidation, ReportArithmeticAndDeterminism) {
  const Dataset d = toy_dataset(40, 4);
  CvOptions o;
  o.k = 4;
  o.train.epochs = 2;
  o.train.batch_size = 16;
  const EvalReport r = cross_validate(tiny_model(), d, o, 7);
  ASSERT_EQ(r.per_fold_accuracies.size(), 4u);
  double mean = 0;
  for (double a : r.per_fold_accuracies) mean += a;
  mean /= 4;
  EXPECT_NEAR(r.mean, mean, 1e-12);
  double ss = 0;
  for (double a : r.per_fold_accuracies) ss += (a - mean) * (a - mean);
  EXPECT_NEAR(r.std, std::sqrt(ss / 3), 1e-12);
  std::size_t total = 0, trace = 0;
  for (std::size_t t = 0; t < 4; ++t)
    for (std::size_t p = 0; p < 4; ++p) {
      total += r.confusion[t][p];
      if (t == p) trace += r.confusion[t][p];
    }
  EXPECT_EQ(total, 40u);
  EXPECT_EQ(r.total, 40u);
  EXPECT_DOUBLE_EQ(r.accuracy, static_cast<double>(trace) / 40.0);

  const std::string json = report_json(r);
  EXPECT_EQ(json, report_json(cross_validate(tiny_model(), d, o, 7)));
  const auto j = nlohmann::json::parse(json);
  EXPECT_EQ(j.at("format"), "acpa-eval-report");
  EXPECT_EQ(j.at("per_fold_accuracies").size(), 4u);
  EXPECT_EQ(j.at("confusion").size(), 4u);
  EXPECT_EQ(j.at("seed"), 7);
  EXPECT_TRUE(j.at("config").contains("model"));
  EXPECT_FALSE(report_text(r).empty());
}

TEST(CrossValidation, PermutedLabelsKeepHistogram) {
  const Dataset d = toy_dataset(41, 5);
  const auto p = permuted_labels(d.samples, 3);
  ASSERT_EQ(p.size(), 41u);
  std::array<int, 4> h0{}, h1{};
  for (const auto& f : d.samples) ++h0[f.label];
  for (auto l : p) ++h1[l];
  EXPECT_EQ(h0, h1);
  EXPECT_EQ(p, permuted_labels(d.samples, 3));
  std::size_t moved = 0;
  for (std::size_t i = 0; i < p.size(); ++i) moved += p[i] != d.samples[i].label;
  EXPECT_GT(moved, 10u);
}

TEST(CrossValidation, AcrossSubjects) {
  std::vector<EvalReport> rs(3);
  rs[0].mean = 0.8;
  rs[1].mean = 0.9;
  rs[2].mean = 1.0;
  const SubjectSummary s = across_subjects(rs);
  EXPECT_NEAR(s.mean, 0.9, 1e-12);
  EXPECT_NEAR(s.std, 0.1, 1e-12);
}

TEST(Ablation, ThreeConfigurationsInOrder) {
  const auto cfgs = ablation_configs(tiny_model());
  ASSERT_EQ(cfgs.size(), 3u);
  EXPECT_EQ(cfgs[0].first, "acpa");
  EXPECT_TRUE(cfgs[0].second.cbam_enabled && cfgs[0].second.preactivation);
  EXPECT_EQ(cfgs[1].first, "cbam-off");
  EXPECT_FALSE(cfgs[1].second.cbam_enabled);
  EXPECT_EQ(cfgs[2].first, "post-activation");
  EXPECT_FALSE(cfgs[2].second.preactivation);

  const Dataset d = toy_dataset(24, 6);
  CvOptions o;
  o.k = 3;
  o.train.epochs = 1;
  o.train.batch_size = 8;
  const AblationReport a = ablation_study(tiny_model(), d, o, 2);
  ASSERT_EQ(a.runs.size(), 3u);
  EXPECT_EQ(ablation_json(a), ablation_json(ablation_study(tiny_model(), d, o, 2)));
  const std::string text = ablation_text(a);
  for (const char* name : {"acpa", "cbam-off", "post-activation"}) EXPECT_NE(text.find(name), std::string::npos);
}

}  // namespace
