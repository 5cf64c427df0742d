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

#include "acpa/dsp/filter.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "acpa/common/error.hpp"

namespace acpa::dsp {

namespace {
using cplx = std::complex<double>;

cplx bilinear(cplx s, double fs) { return (2.0 * fs + s) / (2.0 * fs - s); }

simd::Biquad section_from_poles(cplx z1, cplx z2) {
  simd::Biquad q;
  q.b0 = 1.0;
  q.b1 = 0.0;
  q.b2 = -1.0;
  q.a1 = -(z1 + z2).real();
  q.a2 = (z1 * z2).real();
  return q;
}

cplx section_response(const simd::Biquad& q, cplx zinv) {
  return (q.b0 + zinv * (q.b1 + zinv * q.b2)) / (1.0 + zinv * (q.a1 + zinv * q.a2));
}
}  // namespace

void FilterSpec::validate() const {
  if (prototype_order < 1) throw Error(ErrorCode::InvalidSpec, "filter order must be at least 1");
  if (!(fs > 0.0)) throw Error(ErrorCode::InvalidSpec, "sample rate must be positive");
  if (!(low_cut > 0.0 && low_cut < high_cut && high_cut < fs / 2.0))
    throw Error(ErrorCode::InvalidSpec, "need 0 < low_cut < high_cut < fs/2, got " + std::to_string(low_cut) +
                                            ".." + std::to_string(high_cut) + " at fs " + std::to_string(fs));
}

SosCascade design_bandpass(const FilterSpec& spec) {
  spec.validate();
  const std::size_t n = spec.effective_prototype_order();
  const double fs = spec.fs;
  const double w1 = 2.0 * fs * std::tan(std::numbers::pi * spec.low_cut / fs);
  const double w2 = 2.0 * fs * std::tan(std::numbers::pi * spec.high_cut / fs);
  const double bw = w2 - w1;
  const double w0sq = w1 * w2;

  SosCascade out;
  // Prototype poles in the upper half plane (plus the real pole for odd n);
  // the conjugates are implied by real coefficients.
  for (std::size_t k = 0; k < (n + 1) / 2; ++k) {
    const double theta = std::numbers::pi * static_cast<double>(2 * k + n + 1) / static_cast<double>(2 * n);
    cplx p = std::polar(1.0, theta);
    const bool real_pole = (2 * k + 1 == n);
    if (real_pole) p = {-1.0, 0.0};
    const cplx disc = std::sqrt(p * p * bw * bw - 4.0 * w0sq);
    const cplx s1 = (p * bw + disc) / 2.0;
    const cplx s2 = (p * bw - disc) / 2.0;
    const cplx z1 = bilinear(s1, fs);
    const cplx z2 = bilinear(s2, fs);
    if (real_pole) {
      out.sections.push_back(section_from_poles(z1, z2));
    } else {
      out.sections.push_back(section_from_poles(z1, std::conj(z1)));
      out.sections.push_back(section_from_poles(z2, std::conj(z2)));
    }
  }

  // The analog response is exactly 1 at w0, which the bilinear map sends to fc.
  const double fc = fs / std::numbers::pi * std::atan(std::sqrt(w0sq) / (2.0 * fs));
  const cplx zinv = std::polar(1.0, -2.0 * std::numbers::pi * fc / fs);
  double total = 1.0;
  for (simd::Biquad& q : out.sections) {
    const double g = 1.0 / std::abs(section_response(q, zinv));
    q.b0 *= g;
    q.b1 *= g;
    q.b2 *= g;
  }
  for (const simd::Biquad& q : out.sections) total *= std::abs(section_response(q, zinv));
  out.gain = 1.0 / total;
  return out;
}

std::complex<double> frequency_response(const SosCascade& sos, double freq, double fs) {
  const cplx zinv = std::polar(1.0, -2.0 * std::numbers::pi * freq / fs);
  cplx h = sos.gain;
  for (const simd::Biquad& q : sos.sections) h *= section_response(q, zinv);
  return h;
}

double magnitude_db(const SosCascade& sos, double freq, double fs) {
  return 20.0 * std::log10(std::abs(frequency_response(sos, freq, fs)));
}

std::vector<std::complex<double>> poles(const SosCascade& sos) {
  std::vector<cplx> out;
  for (const simd::Biquad& q : sos.sections) {
    const cplx disc = std::sqrt(cplx(q.a1 * q.a1 - 4.0 * q.a2, 0.0));
    out.push_back((-q.a1 + disc) / 2.0);
    out.push_back((-q.a1 - disc) / 2.0);
  }
  return out;
}

void apply_filter_inplace(const SosCascade& sos, MultiChannel& signal) {
  simd::active().sos_filter(sos.sections.data(), sos.sections.size(), sos.gain, signal.data.data(), signal.channels,
                            signal.samples);
}

MultiChannel apply_filter(const SosCascade& sos, const MultiChannel& signal) {
  MultiChannel out = signal;
  apply_filter_inplace(sos, out);
  return out;
}

MultiChannel apply_filter_zero_phase(const SosCascade& sos, const MultiChannel& signal) {
  MultiChannel out = apply_filter(sos, signal);
  for (std::size_t c = 0; c < out.channels; ++c) std::ranges::reverse(out.row(c));
  apply_filter_inplace(sos, out);
  for (std::size_t c = 0; c < out.channels; ++c) std::ranges::reverse(out.row(c));
  return out;
}

}  // namespace acpa::dsp
