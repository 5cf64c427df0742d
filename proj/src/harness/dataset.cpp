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

#include "acpa/harness/dataset.hpp"

#include <cmath>
#include <random>

#include "acpa/common/error.hpp"
#include "acpa/sim/raw_file.hpp"

namespace acpa::harness {

std::array<double, sim::kChannels> heterogeneous_noise_scale() {
  return {0.5, 0.75, 1.0, 2.0, 3.0, 4.5, 0.6, 6.0};
}

std::array<std::size_t, kNumClasses> balanced_counts(std::size_t total) {
  std::array<std::size_t, kNumClasses> out{};
  for (std::size_t c = 0; c < kNumClasses; ++c) out[c] = total / kNumClasses + (c < total % kNumClasses ? 1 : 0);
  return out;
}

std::vector<dsp::FeatureTensor> simulate_features(const sim::SimConfig& sim_cfg, std::size_t n_epochs,
                                                  const DatasetConfig& cfg) {
  const std::size_t epoch_len = cfg.pipeline.stft.epoch_length();
  sim::SimConfig sc = sim_cfg;
  const double tail_s = 0.5;
  sc.duration_s = cfg.lead_in_s + static_cast<double>(n_epochs * epoch_len) / sc.fs + tail_s;
  const sim::Session session = sim::generate_session(sc);
  const MultiChannel captured = sim::device_capture(session.signal, cfg.adc).to_signal();
  std::vector<dsp::EventMark> events;
  for (const sim::Event& e : sim::schedule_events(sc, epoch_len, cfg.lead_in_s)) {
    if (events.size() == n_epochs) break;
    events.push_back({e.sample, static_cast<std::uint8_t>(e.label)});
  }
  dsp::SessionFeatures f = dsp::preprocess_session(captured, events, cfg.pipeline);
  return std::move(f.features);
}

std::vector<Dataset> build_synthetic_dataset(std::size_t n_subjects, const DatasetConfig& cfg, std::uint64_t seed) {
  if (cfg.epochs_per_session == 0) throw Error(ErrorCode::InvalidSpec, "epochs_per_session must be positive");
  std::vector<Dataset> out;
  for (std::size_t s = 0; s < n_subjects; ++s) {
    std::mt19937_64 rng(seed * 1000003ull + s);
    std::uniform_real_distribution<double> factor(1.0 - cfg.profile_perturbation, 1.0 + cfg.profile_perturbation);
    Dataset ds;
    ds.subject_id = "S" + std::to_string(s + 1);
    ds.provenance = "synthetic";
    ds.seed = seed;
    const auto counts = balanced_counts(cfg.per_subject);
    std::uint64_t session_seed = rng();
    for (std::size_t c = 0; c < kNumClasses; ++c) {
      const auto label = static_cast<EmotionLabel>(c);
      const double f = factor(rng);
      std::size_t remaining = counts[c];
      while (remaining > 0) {
        const std::size_t n = std::min(remaining, cfg.epochs_per_session);
        sim::SimConfig sc = cfg.base;
        sc.label = label;
        sc.seed = session_seed++;
        const sim::ClassProfile p = sim::default_profile(label);
        sc.alpha_band_power = p.alpha_power * f;
        sc.beta_band_power = p.beta_power * f;
        auto feats = simulate_features(sc, n, cfg);
        if (feats.size() != n) throw Error(ErrorCode::InvalidSpec, "session produced fewer epochs than scheduled");
        for (auto& ft : feats) ds.samples.push_back(std::move(ft));
        remaining -= n;
      }
    }
    out.push_back(std::move(ds));
  }
  return out;
}

}  // namespace acpa::harness
