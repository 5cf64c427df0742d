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

#include "acpa/harness/cross_validation.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <random>
#include <sstream>

#include "acpa/common/error.hpp"
#include "json.hpp"

namespace acpa::harness {

namespace {

double sample_std(std::span<const double> v, double mean) {
  if (v.size() < 2) return 0.0;
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

double mean_of(std::span<const double> v) {
  if (v.empty()) return 0.0;
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

nlohmann::ordered_json report_object(const EvalReport& r) {
  using nlohmann::ordered_json;
  ordered_json j;
  j["format"] = "acpa-eval-report";
  j["version"] = 1;
  j["name"] = r.name;
  j["subject_id"] = r.subject_id;
  j["seed"] = r.seed;
  j["total"] = r.total;
  j["accuracy"] = r.accuracy;
  j["mean"] = r.mean;
  j["std"] = r.std;
  j["per_fold_accuracies"] = r.per_fold_accuracies;
  ordered_json conf = ordered_json::array();
  for (const auto& row : r.confusion) conf.push_back(ordered_json(std::vector<std::size_t>(row.begin(), row.end())));
  j["confusion"] = conf;
  j["labels_permuted"] = r.labels_permuted;
  ordered_json model;
  model["stem_channels"] = r.model.stem_channels;
  model["stages"] = nn::format_stages(r.model.stages);
  model["cbam_enabled"] = r.model.cbam_enabled;
  model["cbam_reduction"] = r.model.cbam_reduction;
  model["preactivation"] = r.model.preactivation;
  model["spatial_kernel"] = r.model.spatial_kernel;
  model["fc_hidden"] = r.model.fc_hidden;
  model["bn_momentum"] = r.model.bn_momentum;
  model["bn_eps"] = r.model.bn_eps;
  ordered_json train;
  train["epochs"] = r.train.epochs;
  train["batch_size"] = r.train.batch_size;
  train["optimizer"] = r.train.optimizer.kind;
  train["lr"] = r.train.optimizer.lr;
  train["momentum"] = r.train.optimizer.momentum;
  train["weight_decay"] = r.train.optimizer.weight_decay;
  train["best_snapshot"] = r.train.best_snapshot;
  j["config"] = {{"model", model}, {"train", train}};
  return j;
}

}  // namespace

std::vector<std::uint8_t> permuted_labels(std::span<const dsp::FeatureTensor> data, std::uint64_t seed) {
  std::vector<std::uint8_t> labels;
  labels.reserve(data.size());
  for (const auto& f : data) labels.push_back(f.label);
  std::mt19937_64 rng(seed ^ 0xC0FFEEull);
  std::shuffle(labels.begin(), labels.end(), rng);
  return labels;
}

EvalReport cross_validate(const nn::ModelConfig& model_cfg, const Dataset& dataset, const CvOptions& opts,
                          std::uint64_t seed) {
  model_cfg.validate();
  const auto t0 = std::chrono::steady_clock::now();
  std::vector<dsp::FeatureTensor> relabeled;
  std::span<const dsp::FeatureTensor> data = dataset.samples;
  if (opts.permute_labels) {
    relabeled = dataset.samples;
    const auto labels = permuted_labels(dataset.samples, seed);
    for (std::size_t i = 0; i < relabeled.size(); ++i) relabeled[i].label = labels[i];
    data = relabeled;
  }
  std::vector<std::uint8_t> labels;
  for (const auto& f : data) labels.push_back(f.label);
  const FoldPlan plan = kfold_split(labels, opts.k, seed);

  EvalReport rep;
  rep.subject_id = dataset.subject_id;
  rep.seed = seed;
  rep.total = data.size();
  rep.model = model_cfg;
  rep.train = opts.train;
  rep.labels_permuted = opts.permute_labels;
  std::size_t correct = 0;
  for (std::size_t f = 0; f < plan.folds.size(); ++f) {
    const auto& val = plan.folds[f];
    std::vector<std::size_t> train;
    for (std::size_t g = 0; g < plan.folds.size(); ++g)
      if (g != f) train.insert(train.end(), plan.folds[g].begin(), plan.folds[g].end());
    std::sort(train.begin(), train.end());
    const FoldResult fr = train_fold(model_cfg, data, train, val, opts.train, seed + 1 + f, opts.progress);
    rep.per_fold_accuracies.push_back(fr.accuracy);
    for (std::size_t t = 0; t < kNumClasses; ++t)
      for (std::size_t p = 0; p < kNumClasses; ++p) {
        rep.confusion[t][p] += fr.confusion[t][p];
        if (t == p) correct += fr.confusion[t][p];
      }
    if (opts.on_fold) opts.on_fold(f, fr.accuracy);
  }
  rep.accuracy = rep.total ? static_cast<double>(correct) / static_cast<double>(rep.total) : 0.0;
  rep.mean = mean_of(rep.per_fold_accuracies);
  rep.std = sample_std(rep.per_fold_accuracies, rep.mean);
  rep.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rep;
}

SubjectSummary across_subjects(std::span<const EvalReport> reports) {
  std::vector<double> means;
  for (const auto& r : reports) means.push_back(r.mean);
  SubjectSummary s;
  s.mean = mean_of(means);
  s.std = sample_std(means, s.mean);
  return s;
}

std::vector<std::pair<std::string, nn::ModelConfig>> ablation_configs(const nn::ModelConfig& base) {
  nn::ModelConfig full = base;
  full.cbam_enabled = true;
  full.preactivation = true;
  nn::ModelConfig no_cbam = full;
  no_cbam.cbam_enabled = false;
  nn::ModelConfig post = full;
  post.preactivation = false;
  return {{"acpa", full}, {"cbam-off", no_cbam}, {"post-activation", post}};
}

AblationReport ablation_study(const nn::ModelConfig& base, const Dataset& dataset, const CvOptions& opts,
                              std::uint64_t seed) {
  AblationReport rep;
  rep.seed = seed;
  for (const auto& [name, cfg] : ablation_configs(base)) {
    EvalReport r = cross_validate(cfg, dataset, opts, seed);
    r.name = name;
    rep.runs.push_back(std::move(r));
  }
  return rep;
}

std::string report_text(const EvalReport& r) {
  std::ostringstream os;
  char buf[128];
  os << "subject " << r.subject_id << (r.name.empty() ? "" : "  config " + r.name)
     << (r.labels_permuted ? "  (labels permuted)" : "") << "  seed " << r.seed << '\n';
  os << "fold accuracies:";
  for (double a : r.per_fold_accuracies) {
    std::snprintf(buf, sizeof buf, " %.4f", a);
    os << buf;
  }
  os << '\n';
  std::snprintf(buf, sizeof buf, "mean %.4f  std %.4f  pooled accuracy %.4f (%zu samples)\n", r.mean, r.std,
                r.accuracy, r.total);
  os << buf;
  os << "confusion (rows true, columns predicted):\n";
  os << "            ";
  for (std::size_t p = 0; p < kNumClasses; ++p) {
    std::snprintf(buf, sizeof buf, "%10s", std::string(emotion_name(static_cast<EmotionLabel>(p))).c_str());
    os << buf;
  }
  os << '\n';
  for (std::size_t t = 0; t < kNumClasses; ++t) {
    std::snprintf(buf, sizeof buf, "%-12s", std::string(emotion_name(static_cast<EmotionLabel>(t))).c_str());
    os << buf;
    for (std::size_t p = 0; p < kNumClasses; ++p) {
      std::snprintf(buf, sizeof buf, "%10zu", r.confusion[t][p]);
      os << buf;
    }
    os << '\n';
  }
  return os.str();
}

std::string report_json(const EvalReport& r) { return report_object(r).dump(2) + "\n"; }

std::string ablation_text(const AblationReport& r) {
  std::ostringstream os;
  char buf[128];
  std::snprintf(buf, sizeof buf, "%-18s %8s %8s %8s\n", "config", "mean", "std", "pooled");
  os << buf;
  for (const auto& run : r.runs) {
    std::snprintf(buf, sizeof buf, "%-18s %8.4f %8.4f %8.4f\n", run.name.c_str(), run.mean, run.std, run.accuracy);
    os << buf;
  }
  return os.str();
}

std::string ablation_json(const AblationReport& r) {
  nlohmann::ordered_json j;
  j["format"] = "acpa-ablation-report";
  j["version"] = 1;
  j["seed"] = r.seed;
  j["runs"] = nlohmann::ordered_json::array();
  for (const auto& run : r.runs) j["runs"].push_back(report_object(run));
  return j.dump(2) + "\n";
}

}  // namespace acpa::harness
