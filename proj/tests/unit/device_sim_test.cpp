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
#include <thread>

#include "acpa/common/error.hpp"
#include "acpa/sim/device_sim.hpp"
#include "acpa/sim/raw_file.hpp"
#include "acpa/sim/streaming.hpp"

namespace {

using namespace acpa;
using namespace acpa::sim;
using namespace std::chrono_literals;

// Welch PSD of one channel: Hann segments of 1024 samples, 50% overlap,
// plain DFT.
std::vector<double> welch(std::span<const double> x) {
  constexpr std::size_t L = 1024;
  std::vector<double> psd(L / 2 + 1, 0.0), w(L), cs(L), sn(L);
  for (std::size_t i = 0; i < L; ++i) {
    w[i] = 0.5 - 0.5 * std::cos(2 * std::numbers::pi * i / L);
    cs[i] = std::cos(2 * std::numbers::pi * i / L);
    sn[i] = std::sin(2 * std::numbers::pi * i / L);
  }
  std::vector<double> seg(L);
  for (std::size_t s = 0; s + L <= x.size(); s += L / 2) {
    for (std::size_t i = 0; i < L; ++i) seg[i] = w[i] * x[s + i];
    for (std::size_t k = 0; k <= L / 2; ++k) {
      double re = 0, im = 0;
      for (std::size_t i = 0, p = 0; i < L; ++i, p = (p + k) % L) {
        re += seg[i] * cs[p];
        im -= seg[i] * sn[p];
      }
      psd[k] += re * re + im * im;
    }
  }
  return psd;
}

double band_power(const std::vector<double>& psd, double fs, double lo, double hi) {
  const double df = fs / (2.0 * static_cast<double>(psd.size() - 1));
  double p = 0;
  for (std::size_t k = 0; k < psd.size(); ++k) {
    const double f = static_cast<double>(k) * df;
    if (f >= lo && f <= hi) p += psd[k];
  }
  return p;
}

SimConfig silent(double duration = 10.0) {
  SimConfig c;
  c.duration_s = duration;
  c.alpha_band_power = c.beta_band_power = c.pink_noise_rms = c.mains_amp = c.blink_amp = c.blink_rate = 0.0;
  return c;
}

TEST(DeviceSim, Deterministic) {
  const SimConfig c = SimConfig::for_class(EmotionLabel::Sorrow, 9, 12.0);
  const Session a = generate_session(c), b = generate_session(c);
  EXPECT_EQ(a.signal, b.signal);
  EXPECT_EQ(a.truth.blink_times, b.truth.blink_times);
  SimConfig d = c;
  d.seed = 10;
  EXPECT_NE(generate_session(d).signal, a.signal);
}

TEST(DeviceSim, ZeroAmplitudesGiveZeroSignal) {
  const Session s = generate_session(silent());
  for (double v : s.signal.data) ASSERT_EQ(v, 0.0);
}

TEST(DeviceSim, AlphaOnlyPowerInBand) {
  SimConfig c = silent(30.0);
  c.alpha_band_power = 100.0;
  const Session s = generate_session(c);
  for (std::size_t ch = 0; ch < kChannels; ++ch) {
    const auto psd = welch(s.signal.row(ch));
    const double total = band_power(psd, c.fs, 0.0, c.fs / 2);
    EXPECT_GE(band_power(psd, c.fs, 8.0, 13.0) / total, 0.90) << "channel " << ch;
  }
}

TEST(DeviceSim, AdditiveDecomposition) {
  const Session s = generate_session(SimConfig::for_class(EmotionLabel::Happiness, 4, 20.0));
  ASSERT_FALSE(s.truth.blink_times.empty());
  for (std::size_t k = 0; k < s.signal.data.size(); ++k)
    ASSERT_EQ(s.signal.data[k], s.truth.clean_signal.data[k] + s.truth.artifact_waveform.data[k] + s.truth.mains_waveform.data[k]);
}

TEST(DeviceSim, BlinkRateZeroLeavesSignalUnchanged) {
  SimConfig c = SimConfig::for_class(EmotionLabel::Calmness, 3, 10.0);
  c.blink_rate = 0.0;
  const Session s = generate_session(c);
  EXPECT_TRUE(s.truth.blink_times.empty());
  for (std::size_t k = 0; k < s.signal.data.size(); ++k)
    ASSERT_EQ(s.signal.data[k], s.truth.clean_signal.data[k] + s.truth.mains_waveform.data[k]);
}

TEST(DeviceSim, ForcedBlinkIsExactTemplate) {
  SimConfig c = SimConfig::for_class(EmotionLabel::Calmness, 3, 10.0);
  c.blink_rate = 0.0;
  const MultiChannel base = generate_session(c).signal;
  MultiChannel x = base;
  const std::size_t t0 = 1000;
  add_blinks(x, std::span(&t0, 1), 100.0);
  const auto tpl = blink_template(c.fs);
  const auto& w = blink_spatial_weights();
  for (std::size_t ch = 0; ch < kChannels; ++ch)
    for (std::size_t i = 0; i < x.samples; ++i) {
      const double expect = (i >= t0 && i < t0 + tpl.size()) ? 100.0 * w[ch] * tpl[i - t0] : 0.0;
      ASSERT_NEAR(x.at(ch, i) - base.at(ch, i), expect, 1e-12) << ch << " " << i;
    }
}

TEST(DeviceSim, BlinkCountPlausible) {
  SimConfig c = SimConfig::for_class(EmotionLabel::Sadness, 77, 60.0);
  c.blink_rate = 12.0;
  const auto a = generate_session(c).truth.blink_times;
  EXPECT_EQ(a, generate_session(c).truth.blink_times);
  EXPECT_GE(a.size(), 4u);
  EXPECT_LE(a.size(), 24u);
}

TEST(DeviceSim, ClassBandRatiosSeparated) {
  std::array<double, 4> ratio_db{};
  for (int k = 0; k < 4; ++k) {
    const auto label = static_cast<EmotionLabel>(k);
    SimConfig c = SimConfig::for_class(label, 100 + k, 60.0);
    c.blink_rate = 0.0;
    const Session s = generate_session(c);
    double a = 0, b = 0;
    for (std::size_t ch = 0; ch < kChannels; ++ch) {
      const auto psd = welch(s.signal.row(ch));
      a += band_power(psd, c.fs, 8.0, 13.0);
      b += band_power(psd, c.fs, 13.0, 18.0);
    }
    ratio_db[k] = 10 * std::log10(a / b);
  }
  for (int i = 0; i < 4; ++i)
    for (int j = i + 1; j < 4; ++j) EXPECT_GE(std::abs(ratio_db[i] - ratio_db[j]), 3.0) << i << " vs " << j;
}

TEST(DeviceSim, RejectsInvalidConfig) {
  SimConfig c;
  c.mains_freq = 200.0;
  EXPECT_THROW(generate_session(c), Error);
  c = {};
  c.blink_amp = -1.0;
  EXPECT_THROW(generate_session(c), Error);
}

TEST(DeviceSim, ScheduledEventsTileTheSession) {
  const SimConfig c = SimConfig::for_class(EmotionLabel::Sorrow, 1, 30.0);
  const auto ev = schedule_events(c, 2240, 2.0);
  ASSERT_FALSE(ev.empty());
  EXPECT_EQ(ev.front().sample, 500u);
  for (std::size_t i = 1; i < ev.size(); ++i) EXPECT_EQ(ev[i].sample - ev[i - 1].sample, 2240u);
  EXPECT_LE(ev.back().sample + 2240, c.n_samples());
  for (const Event& e : ev) EXPECT_EQ(e.label, EmotionLabel::Sorrow);
}

TEST(RawFile, RoundtripAndSidecar) {
  SimConfig c = SimConfig::for_class(EmotionLabel::Happiness, 5, 4.0);
  const Session s = generate_session(c);
  const RawCapture cap = device_capture(s.signal, {});
  ASSERT_EQ(cap.samples.size(), c.n_samples());
  EXPECT_EQ(cap.timestamps_us[250], 1000000u);
  const auto bytes = serialize_raw(cap);
  EXPECT_EQ(bytes.size(), kRawHeaderBytes + kRawRecordBytes * cap.samples.size());
  EXPECT_EQ(parse_raw(bytes), cap);

  auto bad = bytes;
  bad.pop_back();
  EXPECT_THROW(parse_raw(bad), Error);
  bad = bytes;
  bad[0] = 'X';
  EXPECT_THROW(parse_raw(bad), Error);

  const auto dir = std::filesystem::temp_directory_path() / "acpa_raw_test";
  std::filesystem::create_directories(dir);
  const std::string path = (dir / "s.raw").string();
  write_raw(path, cap);
  EXPECT_EQ(read_raw(path), cap);
  const std::vector<Event> ev{{10, EmotionLabel::Happiness}, {600, EmotionLabel::Happiness}};
  write_truth_sidecar(sidecar_path(path), c, s.truth, ev);
  const TruthSidecar t = read_truth_sidecar(sidecar_path(path));
  EXPECT_EQ(t.label, EmotionLabel::Happiness);
  EXPECT_EQ(t.n_samples, c.n_samples());
  EXPECT_EQ(t.blink_times, s.truth.blink_times);
  ASSERT_EQ(t.events.size(), 2u);
  EXPECT_EQ(t.events[1].sample, 600u);
  std::filesystem::remove_all(dir);
}

TEST(RawFile, CaptureWithinHalfLsb) {
  const Session s = generate_session(SimConfig::for_class(EmotionLabel::Calmness, 8, 4.0));
  const codec::AdcConfig adc;
  const RawCapture cap = device_capture(s.signal, adc);
  const double half = adc.lsb_microvolts() / 2;
  for (std::size_t i = 0; i < cap.samples.size(); ++i)
    for (std::size_t ch = 0; ch < kChannels; ++ch) {
      const double v = s.signal.at(ch, i);
      ASSERT_LE(std::abs(cap.samples[i][ch] - v), half * (1 + 1e-9) + std::abs(v) * 0x1p-24);
    }
}

TEST(Streaming, SessionOverLoopback) {
  const SimConfig c = SimConfig::for_class(EmotionLabel::Sorrow, 21, 10.0);
  const Session s = generate_session(c);
  const codec::AdcConfig adc;

  net::ReceiveOptions o;
  o.bind_host = "127.0.0.1";
  o.port = 0;
  o.idle_timeout = 300ms;
  net::Receiver rx(o);
  std::vector<net::StreamPacket> got;
  std::jthread sender([&] {
    std::this_thread::sleep_for(50ms);
    stream_session(c, {"127.0.0.1", rx.port()}, 10, net::Pace::realtime_at(2500.0), adc);
  });
  const auto st = rx.run([&](const net::StreamPacket& p) { got.push_back(p); });
  sender.join();
  ASSERT_EQ(st.received, 250u);
  EXPECT_EQ(st.lost, 0u);
  for (std::size_t i = 0; i < got.size(); ++i) EXPECT_EQ(got[i].seq, i);

  // Receiver-side reconstruction against the simulator's own signal.
  RawCapture cap;
  for (const auto& p : got)
    for (const auto& f : p.samples) cap.append(sample_time_us(cap.samples.size(), c.fs), f);
  ASSERT_EQ(cap.samples.size(), c.n_samples());
  const double half = adc.lsb_microvolts() / 2;
  for (std::size_t i = 0; i < cap.samples.size(); ++i)
    for (std::size_t ch = 0; ch < kChannels; ++ch) {
      const double v = s.signal.at(ch, i);
      ASSERT_LE(std::abs(cap.samples[i][ch] - v), half * (1 + 1e-9) + std::abs(v) * 0x1p-24);
    }

  // Replaying the saved capture reproduces the payload stream byte for byte
  // (timestamps are send times and are masked).
  const RawCapture reread = parse_raw(serialize_raw(cap));
  std::vector<std::vector<std::uint8_t>> replayed;
  net::stream_packets(reread.samples, 10, net::Pace::unpaced(), [&](std::span<const std::uint8_t> d) {
    replayed.emplace_back(d.begin(), d.end());
  });
  ASSERT_EQ(replayed.size(), got.size());
  for (std::size_t i = 0; i < got.size(); ++i) {
    net::StreamPacket p = got[i];
    p.timestamp_us = 0;
    auto r = replayed[i];
    std::fill(r.begin() + 10, r.begin() + 18, std::uint8_t{0});
    ASSERT_EQ(net::serialize_packet(p), r) << i;
  }
}

}  // namespace
