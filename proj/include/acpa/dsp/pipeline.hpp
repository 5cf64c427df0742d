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

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "acpa/dsp/epoch.hpp"
#include "acpa/dsp/features.hpp"
#include "acpa/dsp/filter.hpp"
#include "acpa/dsp/ica.hpp"

namespace acpa::dsp {

struct PipelineConfig {
  FilterSpec filter;
  bool zero_phase = false;
  /// Filter transient excluded from the ICA fit.
  double settle_s = 2.0;
  bool ica_enabled = true;
  IcaOptions ica;
  ArtifactPolicy artifacts;
  StftConfig stft;
};

struct SessionFeatures {
  std::vector<FeatureTensor> features;
  std::vector<EventMark> skipped;
  std::vector<std::size_t> removed_components;
  bool ica_converged = true;
};

/// band-pass -> session ICA fit and artifact removal -> epochs -> z-score -> STFT.
SessionFeatures preprocess_session(const MultiChannel& raw, std::span<const EventMark> events,
                                   const PipelineConfig& cfg);

/// Filters and cleans a whole session (the part of preprocess_session before
/// segmentation). `model_out` receives the fitted ICA model if requested.
MultiChannel clean_session(const MultiChannel& raw, const PipelineConfig& cfg, std::vector<std::size_t>* removed = nullptr,
                           IcaModel* model_out = nullptr);

/// Stateful DF2T cascade for sample-by-sample use.
class StreamingFilter {
 public:
  StreamingFilter(SosCascade sos, std::size_t channels);
  /// Filters one multichannel sample in place.
  void process(std::span<double> sample);

 private:
  SosCascade sos_;
  std::size_t channels_;
  std::vector<double> z1_, z2_;  // [channel][section]
};

/// Live counterpart of preprocess_session. Samples go through the causal
/// filter; once settle_s + ica_fit_s seconds have been seen an ICA model is
/// fitted on the post-settle part and every later non-overlapping window of
/// epoch_length() samples becomes one feature tensor.
class StreamingPipeline {
 public:
  StreamingPipeline(const PipelineConfig& cfg, double fs, double ica_fit_s = 30.0);

  /// Returns the feature tensors completed by this sample (zero or one).
  std::optional<FeatureTensor> push(std::span<const double> sample, std::uint64_t timestamp_us);

 private:
  PipelineConfig cfg_;
  double fs_;
  std::size_t settle_samples_;
  std::size_t fit_samples_;
  StreamingFilter filter_;
  std::size_t seen_ = 0;
  std::vector<std::vector<double>> fit_buffer_;
  std::optional<IcaModel> model_;
  std::vector<std::size_t> removed_;
  MultiChannel window_;
  std::size_t fill_ = 0;
  std::uint64_t window_start_us_ = 0;
};

}  // namespace acpa::dsp
