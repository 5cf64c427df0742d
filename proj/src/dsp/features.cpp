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

#include "acpa/dsp/features.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <numbers>

#include "acpa/common/binary_io.hpp"
#include "acpa/common/error.hpp"
#include "acpa/common/fft.hpp"

namespace acpa::dsp {

namespace {
constexpr std::array<std::uint8_t, 8> kFeatMagic = {'E', 'E', 'G', 'F', 'E', 'A', 'T', '1'};
constexpr std::size_t kRecordFloats = kFeatureChannels * kFeatureBins * kFeatureFrames;
}  // namespace

void StftConfig::validate() const {
  if (window == 0 || hop == 0 || n_frames == 0 || n_bins == 0)
    throw Error(ErrorCode::InvalidSpec, "STFT sizes must be positive");
  if (nfft < window) throw Error(ErrorCode::InvalidSpec, "FFT size below window length");
  if (first_bin + n_bins > nfft / 2 + 1) throw Error(ErrorCode::InvalidSpec, "retained bins exceed the spectrum");
}

std::vector<double> stft_magnitudes(const Epoch& e, const StftConfig& cfg) {
  cfg.validate();
  if (e.data.samples != cfg.epoch_length())
    throw Error(ErrorCode::BadEpochLength, "epoch has " + std::to_string(e.data.samples) + " samples, STFT needs " +
                                               std::to_string(cfg.epoch_length()));
  std::vector<double> win(cfg.window);
  for (std::size_t i = 0; i < cfg.window; ++i)
    win[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(cfg.window));

  RealFft fft(cfg.nfft);
  std::vector<double> frame(cfg.nfft, 0.0);
  std::vector<std::complex<double>> spec(fft.bins());
  const std::size_t channels = e.data.channels;
  std::vector<double> out(channels * cfg.n_bins * cfg.n_frames);
  for (std::size_t c = 0; c < channels; ++c) {
    const auto row = e.data.row(c);
    for (std::size_t t = 0; t < cfg.n_frames; ++t) {
      for (std::size_t i = 0; i < cfg.window; ++i) frame[i] = row[t * cfg.hop + i] * win[i];
      fft.forward(frame, spec);
      for (std::size_t b = 0; b < cfg.n_bins; ++b)
        out[(c * cfg.n_bins + b) * cfg.n_frames + t] = std::abs(spec[cfg.first_bin + b]);
    }
  }
  return out;
}

FeatureTensor stft_features(const Epoch& e, const StftConfig& cfg) {
  const std::vector<double> mag = stft_magnitudes(e, cfg);
  FeatureTensor f;
  f.channels = e.data.channels;
  f.bins = cfg.n_bins;
  f.frames = cfg.n_frames;
  f.label = e.label;
  f.data.resize(mag.size());
  for (std::size_t i = 0; i < mag.size(); ++i) f.data[i] = static_cast<float>(std::log1p(mag[i]));
  return f;
}

std::vector<std::uint8_t> serialize_features(std::span<const FeatureTensor> records) {
  io::ByteWriter w;
  w.put_bytes(kFeatMagic);
  w.put(kFeatureFileVersion);
  w.put(static_cast<std::uint32_t>(records.size()));
  for (const FeatureTensor& f : records) {
    if (f.data.size() != kRecordFloats) throw Error(ErrorCode::ShapeMismatch, "feature record is not 8x16x63");
    w.put(f.label);
    for (float v : f.data) w.put(v);
  }
  return w.take();
}

std::vector<FeatureTensor> parse_features(std::span<const std::uint8_t> bytes) {
  io::ByteReader r(bytes);
  const auto magic = r.get_bytes(8);
  if (!std::equal(magic.begin(), magic.end(), kFeatMagic.begin())) throw Error(ErrorCode::BadMagic, "not an EEGFEAT1 file");
  const auto version = r.get<std::uint16_t>();
  if (version != kFeatureFileVersion) throw Error(ErrorCode::BadVersion, "feature file version " + std::to_string(version));
  const auto count = r.get<std::uint32_t>();
  if (r.remaining() != static_cast<std::size_t>(count) * (1 + 4 * kRecordFloats))
    throw Error(ErrorCode::TruncatedPayload, "feature file length does not match its record count");
  std::vector<FeatureTensor> out(count);
  for (FeatureTensor& f : out) {
    f.label = r.get<std::uint8_t>();
    f.data.resize(kRecordFloats);
    for (float& v : f.data) v = r.get<float>();
  }
  return out;
}

void write_features(const std::string& path, std::span<const FeatureTensor> records) {
  io::write_file(path, serialize_features(records));
}

std::vector<FeatureTensor> read_features(const std::string& path) { return parse_features(io::read_file(path)); }

}  // namespace acpa::dsp
