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

#include <complex>
#include <cstddef>
#include <vector>

#include "acpa/common/signal.hpp"
#include "acpa/simd/kernels.hpp"

namespace acpa::dsp {

struct FilterSpec {
  std::size_t prototype_order = 11;
  double low_cut = 5.0;   // Hz
  double high_cut = 18.0; // Hz
  double fs = 250.0;      // Hz
  /// Treat prototype_order as the order of the whole band-pass instead, so
  /// the low-pass prototype gets ceil(order / 2).
  bool order_is_overall = false;

  std::size_t effective_prototype_order() const noexcept {
    return order_is_overall ? (prototype_order + 1) / 2 : prototype_order;
  }
  /// Throws Error{InvalidSpec}.
  void validate() const;
};

struct SosCascade {
  std::vector<simd::Biquad> sections;
  double gain = 1.0;
};

/// Butterworth band-pass: order-n analog low-pass prototype, low-pass to
/// band-pass transform on prewarped edges, bilinear transform. One second
/// order section per prototype pole, each with zeros at z = +1 and z = -1.
SosCascade design_bandpass(const FilterSpec& spec);

/// H(e^{jw}) at `freq` Hz.
std::complex<double> frequency_response(const SosCascade& sos, double freq, double fs);
double magnitude_db(const SosCascade& sos, double freq, double fs);

/// Both roots of 1 + a1 z^-1 + a2 z^-2 for every section.
std::vector<std::complex<double>> poles(const SosCascade& sos);

/// Causal DF2T filtering, zero initial state.
MultiChannel apply_filter(const SosCascade& sos, const MultiChannel& signal);
void apply_filter_inplace(const SosCascade& sos, MultiChannel& signal);

/// Forward then time-reversed pass (squared magnitude, zero phase). Offline only.
MultiChannel apply_filter_zero_phase(const SosCascade& sos, const MultiChannel& signal);

}  // namespace acpa::dsp
