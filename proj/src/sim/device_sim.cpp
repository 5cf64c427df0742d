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

#include "acpa/sim/device_sim.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <complex>
#include <numbers>

#include "acpa/common/error.hpp"
#include "acpa/common/fft.hpp"

namespace acpa::sim {

namespace {

// Component generators draw from independent streams so that switching one
// component off leaves every other component bit-identical.
enum Stream : std::uint64_t { kAlpha = 1, kBeta, kPink, kMains, kBlink };

std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

std::mt19937_64 substream(std::uint64_t seed, std::uint64_t stream, std::uint64_t sub = 0) {
  return std::mt19937_64(splitmix64(splitmix64(seed) ^ (stream * 0x100000001B3ull) ^ (sub << 32)));
}

// Unit-variance Gaussian noise confined to [lo, hi] Hz by zeroing every other
// DFT bin of a white record.
std::vector<double> band_limited_noise(std::size_t n, double fs, double lo, double hi, std::mt19937_64& rng) {
  std::vector<double> x(n);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (double& v : x) v = normal(rng);
  RealFft fft(n);
  std::vector<std::complex<double>> spec(fft.bins());
  fft.forward(x, spec);
  for (std::size_t k = 0; k < spec.size(); ++k) {
    const double f = static_cast<double>(k) * fs / static_cast<double>(n);
    if (f < lo || f > hi) spec[k] = 0.0;
  }
  fft.inverse(spec, x);
  double ss = 0.0;
  for (double v : x) ss += v * v;
  const double rms = std::sqrt(ss / static_cast<double>(n));
  if (rms > 0.0)
    for (double& v : x) v /= rms;
  return x;
}

// Voss-McCartney pink noise: a bank of white rows, row r refreshed every 2^r
// samples, summed with a per-sample white term.
std::vector<double> pink_noise(std::size_t n, std::mt19937_64& rng) {
  constexpr int kRows = 12;
  std::normal_distribution<double> normal(0.0, 1.0);
  std::array<double, kRows> rows{};
  for (double& r : rows) r = normal(rng);
  double running = 0.0;
  for (double r : rows) running += r;
  std::vector<double> out(n);
  const double norm = 1.0 / std::sqrt(static_cast<double>(kRows + 1));
  for (std::size_t i = 0; i < n; ++i) {
    if (i > 0) {
      const int r = std::countr_zero(static_cast<std::uint64_t>(i));
      if (r < kRows) {
        running -= rows[r];
        rows[r] = normal(rng);
        running += rows[r];
      }
    }
    out[i] = (running + normal(rng)) * norm;
  }
  return out;
}

constexpr std::array<double, kChannels> kAlphaWeights = {0.8, 0.9, 0.8, 1.2, 1.3, 1.2, 0.7, 0.7};
constexpr std::array<double, kChannels> kBetaWeights = {1.1, 1.0, 1.1, 0.8, 0.7, 0.8, 1.2, 1.2};
constexpr std::array<double, kChannels> kMainsWeights = {1.0, 0.9, 1.0, 1.1, 1.0, 1.1, 1.3, 1.3};
constexpr std::array<double, kChannels> kBlinkWeights = {0.35, 0.25, 0.35, 0.2, 0.15, 0.2, 1.0, 0.95};

// Rescaled so the channel-average power equals the nominal band power.
std::array<double, kChannels> unit_power(const std::array<double, kChannels>& w) {
  double ms = 0.0;
  for (double v : w) ms += v * v;
  ms /= kChannels;
  std::array<double, kChannels> out{};
  for (std::size_t c = 0; c < kChannels; ++c) out[c] = w[c] / std::sqrt(ms);
  return out;
}

}  // namespace

ClassProfile default_profile(EmotionLabel label) noexcept {
  switch (label) {
    case EmotionLabel::Happiness: return {25.0, 225.0};
    case EmotionLabel::Sorrow: return {100.0, 100.0};
    case EmotionLabel::Sadness: return {50.0, 18.0};
    case EmotionLabel::Calmness: return {400.0, 36.0};
  }
  return {};
}

SimConfig SimConfig::for_class(EmotionLabel label, std::uint64_t seed, double duration_s) {
  SimConfig cfg;
  cfg.label = label;
  cfg.seed = seed;
  cfg.duration_s = duration_s;
  const ClassProfile p = default_profile(label);
  cfg.alpha_band_power = p.alpha_power;
  cfg.beta_band_power = p.beta_power;
  return cfg;
}

std::size_t SimConfig::n_samples() const noexcept {
  return static_cast<std::size_t>(std::llround(fs * duration_s));
}

void SimConfig::validate() const {
  if (!(fs > 2.0 * mains_freq)) throw Error(ErrorCode::InvalidSpec, "fs must exceed twice the mains frequency");
  if (!(duration_s > 0.0)) throw Error(ErrorCode::InvalidSpec, "duration must be positive");
  for (double a : {alpha_band_power, beta_band_power, pink_noise_rms, mains_amp, blink_rate, blink_amp, amplitude_scale})
    if (!(a >= 0.0)) throw Error(ErrorCode::InvalidSpec, "amplitudes and rates must be non-negative");
  for (double a : channel_noise_scale)
    if (!(a >= 0.0)) throw Error(ErrorCode::InvalidSpec, "channel noise scale must be non-negative");
}

std::vector<double> blink_template(double fs) {
  const auto len = static_cast<std::size_t>(std::lround(0.3 * fs));
  std::vector<double> t(len);
  if (len == 1) {
    t[0] = 1.0;
    return t;
  }
  for (std::size_t i = 0; i < len; ++i)
    t[i] = 0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(len - 1)));
  return t;
}

const std::array<double, kChannels>& blink_spatial_weights() noexcept { return kBlinkWeights; }

BlinkRecord add_blinks(MultiChannel& signal, std::span<const std::size_t> times, double amplitude) {
  BlinkRecord rec;
  rec.times.assign(times.begin(), times.end());
  rec.waveform = MultiChannel(signal.channels, signal.samples, signal.fs);
  const std::vector<double> tpl = blink_template(signal.fs);
  for (std::size_t t0 : times) {
    for (std::size_t i = 0; i < tpl.size() && t0 + i < signal.samples; ++i)
      for (std::size_t c = 0; c < signal.channels && c < kChannels; ++c)
        rec.waveform.at(c, t0 + i) += amplitude * kBlinkWeights[c] * tpl[i];
  }
  for (std::size_t k = 0; k < signal.data.size(); ++k) signal.data[k] += rec.waveform.data[k];
  return rec;
}

std::vector<std::size_t> draw_blink_times(std::size_t n_samples, double fs, double rate_per_min,
                                          std::mt19937_64& rng) {
  std::vector<std::size_t> times;
  if (!(rate_per_min > 0.0)) return times;
  std::exponential_distribution<double> gap(rate_per_min / 60.0);
  double t = gap(rng);
  while (true) {
    const auto idx = static_cast<std::size_t>(std::floor(t * fs));
    if (idx >= n_samples) break;
    times.push_back(idx);
    t += gap(rng);
  }
  return times;
}

BlinkRecord inject_artifacts(MultiChannel& signal, const SimConfig& cfg) {
  auto rng = substream(cfg.seed, kBlink);
  const auto times = draw_blink_times(signal.samples, signal.fs, cfg.blink_rate, rng);
  return add_blinks(signal, times, cfg.blink_amp * cfg.amplitude_scale);
}

Session generate_session(const SimConfig& cfg) {
  cfg.validate();
  const std::size_t n = cfg.n_samples();
  const double fs = cfg.fs;
  const double scale = cfg.amplitude_scale;

  GroundTruth truth;
  truth.label = cfg.label;
  truth.clean_signal = MultiChannel(kChannels, n, fs);
  truth.mains_waveform = MultiChannel(kChannels, n, fs);

  const auto wa = unit_power(kAlphaWeights);
  const auto wb = unit_power(kBetaWeights);
  if (cfg.alpha_band_power > 0.0) {
    auto rng = substream(cfg.seed, kAlpha);
    const auto src = band_limited_noise(n, fs, 8.0, 13.0, rng);
    const double a = std::sqrt(cfg.alpha_band_power) * scale;
    for (std::size_t c = 0; c < kChannels; ++c)
      for (std::size_t i = 0; i < n; ++i) truth.clean_signal.at(c, i) += a * wa[c] * src[i];
  }
  if (cfg.beta_band_power > 0.0) {
    auto rng = substream(cfg.seed, kBeta);
    const auto src = band_limited_noise(n, fs, 13.0, 18.0, rng);
    const double b = std::sqrt(cfg.beta_band_power) * scale;
    for (std::size_t c = 0; c < kChannels; ++c)
      for (std::size_t i = 0; i < n; ++i) truth.clean_signal.at(c, i) += b * wb[c] * src[i];
  }
  if (cfg.pink_noise_rms > 0.0) {
    for (std::size_t c = 0; c < kChannels; ++c) {
      auto rng = substream(cfg.seed, kPink, c + 1);
      const auto p = pink_noise(n, rng);
      const double g = cfg.pink_noise_rms * cfg.channel_noise_scale[c] * scale;
      for (std::size_t i = 0; i < n; ++i) truth.clean_signal.at(c, i) += g * p[i];
    }
  }
  if (cfg.mains_amp > 0.0) {
    auto rng = substream(cfg.seed, kMains);
    const double phase = std::uniform_real_distribution<double>(0.0, 2.0 * std::numbers::pi)(rng);
    const double w = 2.0 * std::numbers::pi * cfg.mains_freq / fs;
    for (std::size_t i = 0; i < n; ++i) {
      const double s = std::sin(w * static_cast<double>(i) + phase);
      for (std::size_t c = 0; c < kChannels; ++c) truth.mains_waveform.at(c, i) = cfg.mains_amp * scale * kMainsWeights[c] * s;
    }
  }

  MultiChannel blinks(kChannels, n, fs);
  BlinkRecord rec;
  if (cfg.blink_amp > 0.0) rec = inject_artifacts(blinks, cfg);
  truth.artifact_waveform = rec.waveform.channels ? std::move(rec.waveform) : MultiChannel(kChannels, n, fs);
  truth.blink_times = std::move(rec.times);

  Session s;
  s.signal = MultiChannel(kChannels, n, fs);
  for (std::size_t k = 0; k < s.signal.data.size(); ++k)
    s.signal.data[k] = truth.clean_signal.data[k] + truth.artifact_waveform.data[k] + truth.mains_waveform.data[k];
  s.truth = std::move(truth);
  return s;
}

std::vector<Event> schedule_events(const SimConfig& cfg, std::size_t epoch_len, double lead_in_s) {
  std::vector<Event> events;
  const std::size_t n = cfg.n_samples();
  const auto start = static_cast<std::size_t>(std::lround(lead_in_s * cfg.fs));
  if (epoch_len == 0) return events;
  for (std::size_t s = start; s + epoch_len <= n; s += epoch_len) events.push_back({s, cfg.label});
  return events;
}

}  // namespace acpa::sim
