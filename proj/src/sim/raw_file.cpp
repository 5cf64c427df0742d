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

#include "acpa/sim/raw_file.hpp"

#include <cmath>
#include <cstring>
#include <fstream>

#include "acpa/common/binary_io.hpp"
#include "acpa/common/error.hpp"
#include "json.hpp"

namespace acpa::sim {

namespace {
constexpr std::array<std::uint8_t, 8> kRawMagic = {'E', 'E', 'G', 'R', 'A', 'W', '1', '\0'};
}

RawCapture::RawCapture() {
  for (std::size_t c = 0; c < kChannels; ++c) channel_names[c] = codec::kChannelNames[c];
}

MultiChannel RawCapture::to_signal() const {
  MultiChannel m(kChannels, samples.size(), fs);
  for (std::size_t i = 0; i < samples.size(); ++i)
    for (std::size_t c = 0; c < kChannels; ++c) m.at(c, i) = samples[i][c];
  return m;
}

std::uint64_t sample_time_us(std::size_t index, double fs) noexcept {
  return static_cast<std::uint64_t>(std::llround(static_cast<double>(index) * 1e6 / fs));
}

std::vector<std::uint8_t> serialize_raw(const RawCapture& capture) {
  io::ByteWriter w;
  w.put_bytes(kRawMagic);
  w.put(kRawVersion);
  w.put(static_cast<std::uint16_t>(kChannels));
  w.put(capture.fs);
  for (const std::string& name : capture.channel_names) {
    std::array<std::uint8_t, 8> field{};
    std::memcpy(field.data(), name.data(), std::min<std::size_t>(name.size(), 8));
    w.put_bytes(field);
  }
  for (std::size_t i = 0; i < capture.samples.size(); ++i) {
    w.put(capture.timestamps_us[i]);
    for (float v : capture.samples[i]) w.put(v);
  }
  return w.take();
}

RawCapture parse_raw(std::span<const std::uint8_t> bytes) {
  io::ByteReader r(bytes);
  const auto magic = r.get_bytes(8);
  if (!std::equal(magic.begin(), magic.end(), kRawMagic.begin())) throw Error(ErrorCode::BadMagic, "not an EEGRAW1 file");
  const auto version = r.get<std::uint16_t>();
  if (version != kRawVersion) throw Error(ErrorCode::BadVersion, "raw file version " + std::to_string(version));
  const auto channels = r.get<std::uint16_t>();
  if (channels != kChannels) throw Error(ErrorCode::ShapeMismatch, "raw file has " + std::to_string(channels) + " channels");
  RawCapture cap;
  cap.fs = r.get<double>();
  for (std::string& name : cap.channel_names) {
    const auto field = r.get_bytes(8);
    const auto end = std::find(field.begin(), field.end(), std::uint8_t{0});
    name.assign(field.begin(), end);
  }
  if (r.remaining() % kRawRecordBytes != 0)
    throw Error(ErrorCode::TruncatedPayload, "raw record section is not a whole number of records");
  const std::size_t n = r.remaining() / kRawRecordBytes;
  cap.timestamps_us.reserve(n);
  cap.samples.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto ts = r.get<std::uint64_t>();
    net::SampleFrame s{};
    for (float& v : s) v = r.get<float>();
    cap.append(ts, s);
  }
  return cap;
}

void write_raw(const std::string& path, const RawCapture& capture) { io::write_file(path, serialize_raw(capture)); }

RawCapture read_raw(const std::string& path) { return parse_raw(io::read_file(path)); }

RawCapture device_capture(const MultiChannel& signal, const codec::AdcConfig& adc) {
  if (signal.channels != kChannels) throw Error(ErrorCode::ShapeMismatch, "device capture needs 8 channels");
  RawCapture cap;
  cap.fs = signal.fs;
  cap.timestamps_us.reserve(signal.samples);
  cap.samples.reserve(signal.samples);
  codec::DecodedSample in;
  for (std::size_t i = 0; i < signal.samples; ++i) {
    for (std::size_t c = 0; c < kChannels; ++c) in.microvolts[c] = signal.at(c, i);
    const codec::FrameBytes frame = codec::encode_frame(in, adc);
    const codec::DecodedSample out = codec::decode_frame(frame, adc);
    net::SampleFrame s{};
    for (std::size_t c = 0; c < kChannels; ++c) s[c] = static_cast<float>(out.microvolts[c]);
    cap.append(sample_time_us(i, signal.fs), s);
  }
  return cap;
}

std::string sidecar_path(const std::string& raw_path) { return raw_path + ".truth.json"; }

void write_truth_sidecar(const std::string& path, const SimConfig& cfg, const GroundTruth& truth,
                         std::span<const Event> events) {
  using nlohmann::ordered_json;
  ordered_json j;
  j["format"] = "acpa-eeg-truth";
  j["version"] = 1;
  j["seed"] = cfg.seed;
  j["label"] = std::string(emotion_name(truth.label));
  j["label_id"] = static_cast<int>(truth.label);
  j["fs"] = cfg.fs;
  j["n_samples"] = cfg.n_samples();
  j["blink_times"] = truth.blink_times;
  ordered_json ev = ordered_json::array();
  for (const Event& e : events) ev.push_back({{"sample", e.sample}, {"label", std::string(emotion_name(e.label))}});
  j["events"] = ev;
  j["config"] = {{"duration_s", cfg.duration_s},
                 {"alpha_band_power", cfg.alpha_band_power},
                 {"beta_band_power", cfg.beta_band_power},
                 {"pink_noise_rms", cfg.pink_noise_rms},
                 {"mains_freq", cfg.mains_freq},
                 {"mains_amp", cfg.mains_amp},
                 {"blink_rate", cfg.blink_rate},
                 {"blink_amp", cfg.blink_amp},
                 {"amplitude_scale", cfg.amplitude_scale},
                 {"channel_noise_scale", cfg.channel_noise_scale}};
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot write '" + path + "'");
  out << j.dump(2) << '\n';
}

TruthSidecar read_truth_sidecar(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open '" + path + "'");
  TruthSidecar t;
  try {
    const auto j = nlohmann::json::parse(in);
    if (j.value("format", "") != "acpa-eeg-truth") throw Error(ErrorCode::BadMagic, path + " is not a truth sidecar");
    t.seed = j.at("seed").get<std::uint64_t>();
    const auto label = parse_emotion(j.at("label").get<std::string>());
    if (!label) throw Error(ErrorCode::ConfigError, "unknown label in " + path);
    t.label = *label;
    t.fs = j.at("fs").get<double>();
    t.n_samples = j.at("n_samples").get<std::size_t>();
    t.blink_times = j.at("blink_times").get<std::vector<std::size_t>>();
    for (const auto& e : j.at("events")) {
      const auto el = parse_emotion(e.at("label").get<std::string>());
      if (!el) throw Error(ErrorCode::ConfigError, "unknown event label in " + path);
      t.events.push_back({e.at("sample").get<std::size_t>(), *el});
    }
  } catch (const nlohmann::json::exception& ex) {
    throw Error(ErrorCode::ConfigError, path + ": " + ex.what());
  }
  return t;
}

}  // namespace acpa::sim
