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

#include <cmath>
#include <filesystem>
#include <numbers>
#include <random>

#include "acpa/common/error.hpp"
#include "acpa/dsp/epoch.hpp"
#include "acpa/dsp/features.hpp"
#include "acpa/dsp/pipeline.hpp"

namespace {

using namespace acpa;
using namespace acpa::dsp;

Epoch tone_epoch(double freq, std::size_t len = 2240, double fs = 250.0) {
  Epoch e;
  e.data = MultiChannel(8, len, fs);
  for (std::size_t c = 0; c < 8; ++c)
    for (std::size_t i = 0; i < len; ++i) e.data.at(c, i) = std::sin(2 * std::numbers::pi * freq * i / fs + 0.3 * c);
  return e;
}

Epoch noise_epoch(std::uint64_t seed, std::size_t len = 2240) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(3.0, 7.0);
  Epoch e;
  e.data = MultiChannel(8, len, 250.0);
  for (double& v : e.data.data) v = g(rng);
  return e;
}

TEST(Segment, Examples) {
  const MultiChannel sig(8, 10000, 250.0);
  const std::vector<EventMark> two{{0, 0}, {5000, 1}};
  const auto a = segment_epochs(sig, two, 2240);
  ASSERT_EQ(a.epochs.size(), 2u);
  EXPECT_EQ(a.epochs[0].origin, 0u);
  EXPECT_EQ(a.epochs[1].origin, 5000u);
  EXPECT_EQ(a.epochs[1].label, 1);
  EXPECT_EQ(a.epochs[0].data.samples, 2240u);

  const std::vector<EventMark> late{{9900, 2}};
  const auto b = segment_epochs(sig, late, 2240);
  EXPECT_TRUE(b.epochs.empty());
  EXPECT_EQ(b.skipped.size(), 1u);

  const std::vector<EventMark> overlap{{0, 0}, {100, 1}};
  EXPECT_EQ(segment_epochs(sig, overlap, 2240).epochs.size(), 2u);
}

TEST(Normalize, ConstantChannelBecomesZero) {
  Epoch e;
  e.data = MultiChannel(8, 100, 250.0);
  for (double& v : e.data.data) v = 42.0;
  for (double v : normalize_epoch(e).data.data) ASSERT_EQ(v, 0.0);
}

TEST(Normalize, ZeroMeanUnitVarianceAndIdempotent) {
  const Epoch e = noise_epoch(1);
  const Epoch n = normalize_epoch(e);
  for (std::size_t c = 0; c < 8; ++c) {
    double m = 0, v = 0;
    for (double x : n.data.row(c)) m += x;
    m /= static_cast<double>(n.data.samples);
    for (double x : n.data.row(c)) v += (x - m) * (x - m);
    v /= static_cast<double>(n.data.samples);
    EXPECT_LT(std::abs(m), 1e-10);
    EXPECT_NEAR(v, 1.0, 1e-6);
  }
  const Epoch nn = normalize_epoch(n);
  for (std::size_t k = 0; k < n.data.data.size(); ++k) ASSERT_NEAR(nn.data.data[k], n.data.data[k], 1e-6);
}

TEST(Stft, ShapeAndZeroEpoch) {
  Epoch z;
  z.data = MultiChannel(8, StftConfig{}.epoch_length(), 250.0);
  EXPECT_EQ(StftConfig{}.epoch_length(), 2240u);
  const FeatureTensor f = stft_features(z);
  EXPECT_EQ(f.channels, 8u);
  EXPECT_EQ(f.bins, 16u);
  EXPECT_EQ(f.frames, 63u);
  ASSERT_EQ(f.data.size(), 8u * 16 * 63);
  for (float v : f.data) ASSERT_EQ(v, 0.0f);
  EXPECT_EQ(stft_features(noise_epoch(2)).data.size(), 8u * 16 * 63);
}

TEST(Stft, BadEpochLength) {
  try {
    stft_features(noise_epoch(3, 2239));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::BadEpochLength);
  }
}

TEST(Stft, MagnitudesMatchDirectDft) {
  const Epoch e = noise_epoch(4);
  const StftConfig cfg;
  const auto mags = stft_magnitudes(e, cfg);
  const FeatureTensor f = stft_features(e, cfg);
  const double pi = std::numbers::pi;
  for (std::size_t c : {0u, 5u})
    for (std::size_t t : {0u, 31u, 62u})
      for (std::size_t b = 0; b < cfg.n_bins; ++b) {
        const std::size_t k = cfg.first_bin + b;
        double re = 0, im = 0;
        for (std::size_t i = 0; i < cfg.window; ++i) {
          const double w = 0.5 - 0.5 * std::cos(2 * pi * i / cfg.window);
          const double x = w * e.data.at(c, t * cfg.hop + i);
          re += x * std::cos(2 * pi * k * i / cfg.nfft);
          im -= x * std::sin(2 * pi * k * i / cfg.nfft);
        }
        const double expect = std::hypot(re, im);
        ASSERT_NEAR(mags[(c * cfg.n_bins + b) * cfg.n_frames + t], expect, 1e-9 * (1 + expect));
        ASSERT_NEAR(f.at(c, b, t), std::log1p(expect), 1e-5 * (1 + std::log1p(expect)));
      }
}

TEST(Stft, BinCenterToneConcentrates) {
  const StftConfig cfg;
  for (std::size_t k = 6; k <= 19; ++k) {
    const double freq = static_cast<double>(k) * 250.0 / 256.0;
    const Epoch e = tone_epoch(freq);
    const auto mags = stft_magnitudes(e, cfg);
    const std::size_t row = k - cfg.first_bin;
    for (std::size_t c = 0; c < 8; ++c)
      for (std::size_t t = 0; t < cfg.n_frames; ++t) {
        double total = 0, near = 0;
        std::size_t argmax = 0;
        for (std::size_t b = 0; b < cfg.n_bins; ++b) {
          const double m = mags[(c * cfg.n_bins + b) * cfg.n_frames + t];
          total += m * m;
          if (b + 1 >= row && b <= row + 1) near += m * m;
          if (m > mags[(c * cfg.n_bins + argmax) * cfg.n_frames + t]) argmax = b;
        }
        ASSERT_GE(near / total, 0.80) << "bin " << k;
        ASSERT_EQ(argmax, row) << "bin " << k;
      }
  }
}

TEST(FeatureFile, Roundtrip) {
  std::vector<FeatureTensor> recs;
  for (std::uint64_t s = 0; s < 3; ++s) {
    FeatureTensor f = stft_features(noise_epoch(10 + s));
    f.label = static_cast<std::uint8_t>(s);
    recs.push_back(f);
  }
  recs[2].label = kUnlabeled;
  const auto bytes = serialize_features(recs);
  EXPECT_EQ(parse_features(bytes), recs);
  auto cut = bytes;
  cut.resize(cut.size() - 3);
  EXPECT_THROW(parse_features(cut), Error);
  const auto path = (std::filesystem::temp_directory_path() / "acpa_features_test.feat").string();
  write_features(path, recs);
  EXPECT_EQ(read_features(path), recs);
  std::filesystem::remove(path);
}

TEST(Pipeline, DeterministicAndShaped) {
  std::mt19937_64 rng(6);
  std::normal_distribution<double> g(0.0, 15.0);
  MultiChannel raw(8, 250 * 40, 250.0);
  for (double& v : raw.data) v = g(rng);
  std::vector<EventMark> ev;
  for (std::size_t s = 500; s + 2240 <= raw.samples; s += 2240) ev.push_back({s, 1});
  ev.push_back({raw.samples - 10, 2});
  const PipelineConfig cfg;
  const SessionFeatures a = preprocess_session(raw, ev, cfg), b = preprocess_session(raw, ev, cfg);
  ASSERT_EQ(a.features.size(), ev.size() - 1);
  EXPECT_EQ(a.skipped.size(), 1u);
  EXPECT_EQ(a.features, b.features);
  for (const auto& f : a.features) {
    EXPECT_EQ(f.data.size(), 8u * 16 * 63);
    EXPECT_EQ(f.label, 1);
    for (float v : f.data) ASSERT_TRUE(std::isfinite(v));
  }
}

}  // namespace
