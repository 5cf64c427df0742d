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

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "acpa/codec/frame_codec.hpp"
#include "acpa/dsp/features.hpp"
#include "acpa/dsp/pipeline.hpp"
#include "acpa/sim/device_sim.hpp"

namespace acpa::harness {

struct DatasetConfig {
  std::size_t per_subject = 950;
  std::size_t epochs_per_session = 8;
  /// Subject-specific factor on each class profile, uniform in [1 - p, 1 + p].
  double profile_perturbation = 0.2;
  /// Recording before the first event (filter transient).
  double lead_in_s = 2.0;
  /// Simulator settings other than the class profile (label, seed, band
  /// powers and duration are filled in per session).
  sim::SimConfig base;
  codec::AdcConfig adc;
  dsp::PipelineConfig pipeline;
};

/// Per-channel pink-noise multipliers of the heterogeneous-noise condition.
std::array<double, sim::kChannels> heterogeneous_noise_scale();

struct Dataset {
  std::vector<dsp::FeatureTensor> samples;
  std::string subject_id;
  std::string provenance;  // "synthetic" or a file path
  std::uint64_t seed = 0;
};

/// Class counts for `total` samples: floor(total/4) each, the remainder going
/// to the lowest class indices.
std::array<std::size_t, kNumClasses> balanced_counts(std::size_t total);

/// One dataset per subject: perturbed class profiles, simulated sessions,
/// device codec round trip, preprocessing. Deterministic in (cfg, seed).
std::vector<Dataset> build_synthetic_dataset(std::size_t n_subjects, const DatasetConfig& cfg, std::uint64_t seed);

/// Features of one simulated session (profile taken from sim_cfg).
std::vector<dsp::FeatureTensor> simulate_features(const sim::SimConfig& sim_cfg, std::size_t n_epochs,
                                                  const DatasetConfig& cfg);

}  // namespace acpa::harness
