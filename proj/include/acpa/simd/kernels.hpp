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

// Data-parallel inner loops used by the DSP chain and the network. Every
// kernel has a portable scalar reference implementation; an AVX2/FMA variant
// is compiled separately and chosen at runtime when the CPU supports it.
// The two are checked against each other in tests/unit/simd_equivalence_test.

#include <cstddef>
#include <string_view>

namespace acpa::simd {

/// One direct-form-II-transposed biquad:
/// H(z) = (b0 + b1 z^-1 + b2 z^-2) / (1 + a1 z^-1 + a2 z^-2).
struct Biquad {
  double b0 = 1.0, b1 = 0.0, b2 = 0.0;
  double a1 = 0.0, a2 = 0.0;
};

struct KernelTable {
  std::string_view name;

  /// Row-major C = alpha * op(A) * op(B) + beta * C, where op(A) is m x k and
  /// op(B) is k x n. With beta == 0, C is overwritten (never read).
  void (*gemm)(bool trans_a, bool trans_b, std::size_t m, std::size_t n, std::size_t k, double alpha,
               const double* a, std::size_t lda, const double* b, std::size_t ldb, double beta, double* c,
               std::size_t ldc);

  double (*dot)(const double* x, const double* y, std::size_t n);

  /// y += alpha * x
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);

  /// In-place causal filtering of `channels` rows of `samples` values each
  /// (channel-major, row stride `samples`), sections cascaded, zero initial
  /// state, output multiplied by `gain`.
  void (*sos_filter)(const Biquad* sections, std::size_t n_sections, double gain, double* data,
                     std::size_t channels, std::size_t samples);

  /// x[i] = tanh(x[i]); returns sum of (1 - tanh^2), the FastICA g' term.
  double (*tanh_deriv_sum)(double* x, std::size_t n);
};

const KernelTable& scalar_kernels() noexcept;

/// nullptr when the AVX2 variant was not compiled in or the CPU lacks AVX2+FMA.
const KernelTable* avx2_kernels() noexcept;

/// Kernel set used by the library. Chosen once: AVX2 when available, unless
/// the environment variable ACPA_SIMD=scalar forces the reference kernels.
const KernelTable& active() noexcept;

/// Overrides the active set ("scalar" or "avx2"); returns false when the
/// requested variant is unavailable. Intended for benchmarks and tests.
bool select(std::string_view name) noexcept;

inline void gemm(bool trans_a, bool trans_b, std::size_t m, std::size_t n, std::size_t k, double alpha,
                 const double* a, std::size_t lda, const double* b, std::size_t ldb, double beta, double* c,
                 std::size_t ldc) {
  active().gemm(trans_a, trans_b, m, n, k, alpha, a, lda, b, ldb, beta, c, ldc);
}
inline double dot(const double* x, const double* y, std::size_t n) { return active().dot(x, y, n); }
inline void axpy(double alpha, const double* x, double* y, std::size_t n) { active().axpy(alpha, x, y, n); }
inline double tanh_deriv_sum(double* x, std::size_t n) { return active().tanh_deriv_sum(x, n); }

}  // namespace acpa::simd
