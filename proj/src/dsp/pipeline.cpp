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

#include "acpa/dsp/pipeline.hpp"

#include <cmath>

#include "acpa/common/error.hpp"

namespace acpa::dsp {

MultiChannel clean_session(const MultiChannel& raw, const PipelineConfig& cfg, std::vector<std::size_t>* removed,
                           IcaModel* model_out) {
  FilterSpec fspec = cfg.filter;
  fspec.fs = raw.fs;
  const SosCascade sos = design_bandpass(fspec);
  MultiChannel filtered = cfg.zero_phase ? apply_filter_zero_phase(sos, raw) : apply_filter(sos, raw);
  if (!cfg.ica_enabled) return filtered;

  const auto settle = std::min(raw.samples, static_cast<std::size_t>(std::lround(cfg.settle_s * raw.fs)));
  MultiChannel fit(filtered.channels, filtered.samples - settle, filtered.fs);
  for (std::size_t c = 0; c < filtered.channels; ++c)
    std::copy(filtered.row(c).begin() + static_cast<std::ptrdiff_t>(settle), filtered.row(c).end(), fit.row(c).begin());
  IcaModel model = fit_ica(fit, cfg.ica);
  ArtifactPolicy policy = cfg.artifacts;
  // Flag on the settled part, then clean the whole session with the same components.
  if (policy.tmpl && policy.tmpl->size() == raw.samples)
    policy.tmpl->erase(policy.tmpl->begin(), policy.tmpl->begin() + static_cast<std::ptrdiff_t>(settle));
  const CleanResult flagged = remove_artifact_components(model, fit, policy);
  MultiChannel cleaned = remove_components(model, filtered, flagged.removed);
  if (removed) *removed = flagged.removed;
  if (model_out) *model_out = std::move(model);
  return cleaned;
}

SessionFeatures preprocess_session(const MultiChannel& raw, std::span<const EventMark> events,
                                   const PipelineConfig& cfg) {
  cfg.stft.validate();
  SessionFeatures out;
  IcaModel model;
  const MultiChannel cleaned = clean_session(raw, cfg, &out.removed_components, cfg.ica_enabled ? &model : nullptr);
  if (cfg.ica_enabled) out.ica_converged = model.converged;
  Segmentation seg = segment_epochs(cleaned, events, cfg.stft.epoch_length());
  out.skipped = std::move(seg.skipped);
  out.features.reserve(seg.epochs.size());
  for (const Epoch& e : seg.epochs) {
    FeatureTensor f = stft_features(normalize_epoch(e), cfg.stft);
    f.timestamp_us = static_cast<std::uint64_t>(std::llround(static_cast<double>(e.origin) * 1e6 / raw.fs));
    out.features.push_back(std::move(f));
  }
  return out;
}

StreamingFilter::StreamingFilter(SosCascade sos, std::size_t channels)
    : sos_(std::move(sos)), channels_(channels), z1_(channels * sos_.sections.size(), 0.0),
      z2_(channels * sos_.sections.size(), 0.0) {}

void StreamingFilter::process(std::span<double> sample) {
  const std::size_t ns = sos_.sections.size();
  for (std::size_t c = 0; c < channels_; ++c) {
    double x = sample[c];
    for (std::size_t s = 0; s < ns; ++s) {
      const simd::Biquad& q = sos_.sections[s];
      double& z1 = z1_[c * ns + s];
      double& z2 = z2_[c * ns + s];
      const double y = q.b0 * x + z1;
      z1 = q.b1 * x - q.a1 * y + z2;
      z2 = q.b2 * x - q.a2 * y;
      x = y;
    }
    sample[c] = x * sos_.gain;
  }
}

namespace {
FilterSpec at_rate(FilterSpec f, double fs) {
  f.fs = fs;
  return f;
}
}  // namespace

StreamingPipeline::StreamingPipeline(const PipelineConfig& cfg, double fs, double ica_fit_s)
    : cfg_(cfg), fs_(fs), settle_samples_(static_cast<std::size_t>(std::lround(cfg.settle_s * fs))),
      fit_samples_(cfg.ica_enabled ? static_cast<std::size_t>(std::lround(ica_fit_s * fs)) : 0),
      filter_(design_bandpass(at_rate(cfg.filter, fs)), kFeatureChannels), fit_buffer_(kFeatureChannels),
      window_(kFeatureChannels, cfg.stft.epoch_length(), fs) {
  cfg_.stft.validate();
}

std::optional<FeatureTensor> StreamingPipeline::push(std::span<const double> sample, std::uint64_t timestamp_us) {
  if (sample.size() != kFeatureChannels) throw Error(ErrorCode::ShapeMismatch, "streaming pipeline expects 8 channels");
  std::array<double, kFeatureChannels> x{};
  std::copy(sample.begin(), sample.end(), x.begin());
  filter_.process(x);
  const std::size_t index = seen_++;
  if (index < settle_samples_) return std::nullopt;

  if (cfg_.ica_enabled && !model_) {
    for (std::size_t c = 0; c < kFeatureChannels; ++c) fit_buffer_[c].push_back(x[c]);
    if (fit_buffer_[0].size() < fit_samples_) return std::nullopt;
    MultiChannel fit(kFeatureChannels, fit_buffer_[0].size(), fs_);
    for (std::size_t c = 0; c < kFeatureChannels; ++c) std::copy(fit_buffer_[c].begin(), fit_buffer_[c].end(), fit.row(c).begin());
    model_ = fit_ica(fit, cfg_.ica);
    removed_ = remove_artifact_components(*model_, fit, ArtifactPolicy{cfg_.artifacts.kurtosis_threshold, std::nullopt,
                                                                      cfg_.artifacts.template_threshold})
                   .removed;
    fit_buffer_.clear();
    return std::nullopt;
  }

  if (fill_ == 0) window_start_us_ = timestamp_us;
  for (std::size_t c = 0; c < kFeatureChannels; ++c) window_.at(c, fill_) = x[c];
  if (++fill_ < window_.samples) return std::nullopt;
  fill_ = 0;

  Epoch e;
  e.data = model_ ? remove_components(*model_, window_, removed_) : window_;
  FeatureTensor f = stft_features(normalize_epoch(e), cfg_.stft);
  f.timestamp_us = window_start_us_;
  return f;
}

}  // namespace acpa::dsp
