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

// Compiled with -mavx2 -mfma. Nothing in this translation unit may run
// before dispatch.cpp has confirmed CPU support.

#include <immintrin.h>

#include <algorithm>
#include <cmath>
#include <iterator>
#include <vector>

#include "acpa/simd/kernels.hpp"

namespace acpa::simd {
namespace {

constexpr std::size_t kMr = 4;    // rows of C per micro-tile
constexpr std::size_t kNr = 8;    // columns of C per micro-tile (two ymm)
constexpr std::size_t kKc = 256;  // depth of one packed B panel

// C[0..rows) x [0..8) += alpha * A_tile * B_panel. A_tile is row-major with
// stride lda (already op-applied), B_panel is packed kc x 8.
template <std::size_t Rows>
inline void micro_tile(std::size_t kc, double alpha, const double* a, std::size_t lda, const double* bp,
                       double* c, std::size_t ldc) {
  __m256d acc[Rows][2];
  for (std::size_t r = 0; r < Rows; ++r) acc[r][0] = acc[r][1] = _mm256_setzero_pd();
  for (std::size_t p = 0; p < kc; ++p) {
    const __m256d b0 = _mm256_loadu_pd(bp + p * kNr);
    const __m256d b1 = _mm256_loadu_pd(bp + p * kNr + 4);
    for (std::size_t r = 0; r < Rows; ++r) {
      const __m256d av = _mm256_broadcast_sd(a + r * lda + p);
      acc[r][0] = _mm256_fmadd_pd(av, b0, acc[r][0]);
      acc[r][1] = _mm256_fmadd_pd(av, b1, acc[r][1]);
    }
  }
  const __m256d al = _mm256_set1_pd(alpha);
  for (std::size_t r = 0; r < Rows; ++r) {
    double* cr = c + r * ldc;
    _mm256_storeu_pd(cr, _mm256_fmadd_pd(al, acc[r][0], _mm256_loadu_pd(cr)));
    _mm256_storeu_pd(cr + 4, _mm256_fmadd_pd(al, acc[r][1], _mm256_loadu_pd(cr + 4)));
  }
}

void gemm_avx2(bool trans_a, bool trans_b, std::size_t m, std::size_t n, std::size_t k, double alpha,
               const double* a, std::size_t lda, const double* b, std::size_t ldb, double beta, double* c,
               std::size_t ldc) {
  for (std::size_t i = 0; i < m; ++i) {
    double* crow = c + i * ldc;
    if (beta == 0.0) {
      std::fill(crow, crow + n, 0.0);
    } else if (beta != 1.0) {
      for (std::size_t j = 0; j < n; ++j) crow[j] *= beta;
    }
  }
  if (m == 0 || n == 0 || k == 0 || alpha == 0.0) return;

  // op(A) as a dense row-major m x k block.
  thread_local std::vector<double> apack;
  const double* ap = a;
  std::size_t ap_ld = lda;
  if (trans_a) {
    apack.resize(m * k);
    for (std::size_t p = 0; p < k; ++p)
      for (std::size_t i = 0; i < m; ++i) apack[i * k + p] = a[p * lda + i];
    ap = apack.data();
    ap_ld = k;
  }

  auto b_at = [&](std::size_t p, std::size_t j) { return trans_b ? b[j * ldb + p] : b[p * ldb + j]; };

  thread_local std::vector<double> bpack;
  bpack.resize(kKc * kNr);
  const std::size_t n_full = n - n % kNr;

  for (std::size_t pc = 0; pc < k; pc += kKc) {
    const std::size_t kc = std::min(kKc, k - pc);
    for (std::size_t j = 0; j < n_full; j += kNr) {
      if (!trans_b) {
        for (std::size_t p = 0; p < kc; ++p) {
          const double* src = b + (pc + p) * ldb + j;
          _mm256_storeu_pd(bpack.data() + p * kNr, _mm256_loadu_pd(src));
          _mm256_storeu_pd(bpack.data() + p * kNr + 4, _mm256_loadu_pd(src + 4));
        }
      } else {
        for (std::size_t jj = 0; jj < kNr; ++jj) {
          const double* src = b + (j + jj) * ldb + pc;
          for (std::size_t p = 0; p < kc; ++p) bpack[p * kNr + jj] = src[p];
        }
      }
      std::size_t i = 0;
      for (; i + kMr <= m; i += kMr)
        micro_tile<kMr>(kc, alpha, ap + i * ap_ld + pc, ap_ld, bpack.data(), c + i * ldc + j, ldc);
      switch (m - i) {
        case 3: micro_tile<3>(kc, alpha, ap + i * ap_ld + pc, ap_ld, bpack.data(), c + i * ldc + j, ldc); break;
        case 2: micro_tile<2>(kc, alpha, ap + i * ap_ld + pc, ap_ld, bpack.data(), c + i * ldc + j, ldc); break;
        case 1: micro_tile<1>(kc, alpha, ap + i * ap_ld + pc, ap_ld, bpack.data(), c + i * ldc + j, ldc); break;
        default: break;
      }
    }
    // Column remainder.
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = n_full; j < n; ++j) {
        double s = 0.0;
        for (std::size_t p = 0; p < kc; ++p) s += ap[i * ap_ld + pc + p] * b_at(pc + p, j);
        c[i * ldc + j] += alpha * s;
      }
    }
  }
}

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

double dot_avx2(const double* x, const double* y, std::size_t n) {
  __m256d s0 = _mm256_setzero_pd(), s1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    s0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), s0);
    s1 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i + 4), _mm256_loadu_pd(y + i + 4), s1);
  }
  double s = hsum(_mm256_add_pd(s0, s1));
  for (; i < n; ++i) s += x[i] * y[i];
  return s;
}

void axpy_avx2(double alpha, const double* x, double* y, std::size_t n) {
  const __m256d al = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(y + i, _mm256_fmadd_pd(al, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
  for (; i < n; ++i) y[i] += alpha * x[i];
}

// Four channels advance in lockstep, one per lane; the recurrence is serial
// in time so lanes are the only available parallelism.
void sos_filter_avx2(const Biquad* sections, std::size_t n_sections, double gain, double* data,
                     std::size_t channels, std::size_t samples) {
  constexpr std::size_t kMaxSections = 64;
  if (n_sections > kMaxSections) {
    scalar_kernels().sos_filter(sections, n_sections, gain, data, channels, samples);
    return;
  }
  std::size_t ch = 0;
  __m256d z1[kMaxSections];
  __m256d z2[kMaxSections];
  const __m256d g = _mm256_set1_pd(gain);
  for (; ch + 4 <= channels; ch += 4) {
    double* r0 = data + (ch + 0) * samples;
    double* r1 = data + (ch + 1) * samples;
    double* r2 = data + (ch + 2) * samples;
    double* r3 = data + (ch + 3) * samples;
    for (std::size_t s = 0; s < n_sections; ++s) z1[s] = z2[s] = _mm256_setzero_pd();
    alignas(32) double out[4];
    for (std::size_t i = 0; i < samples; ++i) {
      __m256d x = _mm256_set_pd(r3[i], r2[i], r1[i], r0[i]);
      for (std::size_t s = 0; s < n_sections; ++s) {
        const Biquad& q = sections[s];
        const __m256d y = _mm256_fmadd_pd(_mm256_set1_pd(q.b0), x, z1[s]);
        z1[s] = _mm256_fnmadd_pd(_mm256_set1_pd(q.a1), y, _mm256_fmadd_pd(_mm256_set1_pd(q.b1), x, z2[s]));
        z2[s] = _mm256_fnmadd_pd(_mm256_set1_pd(q.a2), y, _mm256_mul_pd(_mm256_set1_pd(q.b2), x));
        x = y;
      }
      _mm256_store_pd(out, _mm256_mul_pd(x, g));
      r0[i] = out[0];
      r1[i] = out[1];
      r2[i] = out[2];
      r3[i] = out[3];
    }
  }
  if (ch < channels) {
    scalar_kernels().sos_filter(sections, n_sections, gain, data + ch * samples, channels - ch, samples);
  }
}

// exp for |x| <= 708: x = n ln2 + r with |r| <= ln2/2, degree-12 Taylor
// polynomial for e^r, then 2^n spliced into the exponent field.
inline __m256d exp_pd(__m256d x) {
  x = _mm256_min_pd(_mm256_max_pd(x, _mm256_set1_pd(-708.0)), _mm256_set1_pd(708.0));
  const __m256d n = _mm256_round_pd(_mm256_mul_pd(x, _mm256_set1_pd(1.4426950408889634)),
                                    _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
  __m256d r = _mm256_fnmadd_pd(n, _mm256_set1_pd(6.93147180369123816490e-01), x);
  r = _mm256_fnmadd_pd(n, _mm256_set1_pd(1.90821492927058770002e-10), r);
  constexpr double kInvFact[] = {1.0 / 479001600.0, 1.0 / 39916800.0, 1.0 / 3628800.0, 1.0 / 362880.0,
                                 1.0 / 40320.0,     1.0 / 5040.0,     1.0 / 720.0,      1.0 / 120.0,
                                 1.0 / 24.0,        1.0 / 6.0,        0.5,              1.0,
                                 1.0};
  __m256d p = _mm256_set1_pd(kInvFact[0]);
  for (std::size_t i = 1; i < std::size(kInvFact); ++i) p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(kInvFact[i]));
  const __m128i ni = _mm256_cvtpd_epi32(n);
  const __m256i bits = _mm256_slli_epi64(_mm256_add_epi64(_mm256_cvtepi32_epi64(ni), _mm256_set1_epi64x(1023)), 52);
  return _mm256_mul_pd(p, _mm256_castsi256_pd(bits));
}

// tanh|x| = 1 - 2 / (e^{2|x|} + 1), sign restored afterwards.
double tanh_deriv_sum_avx2(double* x, std::size_t n) {
  const __m256d sign_mask = _mm256_set1_pd(-0.0);
  const __m256d one = _mm256_set1_pd(1.0);
  const __m256d two = _mm256_set1_pd(2.0);
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d v = _mm256_loadu_pd(x + i);
    const __m256d a = _mm256_andnot_pd(sign_mask, v);
    const __m256d e = exp_pd(_mm256_mul_pd(two, a));
    const __m256d t = _mm256_sub_pd(one, _mm256_div_pd(two, _mm256_add_pd(e, one)));
    _mm256_storeu_pd(x + i, _mm256_or_pd(t, _mm256_and_pd(sign_mask, v)));
    acc = _mm256_add_pd(acc, _mm256_fnmadd_pd(t, t, one));
  }
  double s = hsum(acc);
  for (; i < n; ++i) {
    const double t = std::tanh(x[i]);
    x[i] = t;
    s += 1.0 - t * t;
  }
  return s;
}

}  // namespace

const KernelTable& avx2_kernel_table() noexcept {
  static const KernelTable table{"avx2", gemm_avx2, dot_avx2, axpy_avx2, sos_filter_avx2, tanh_deriv_sum_avx2};
  return table;
}

}  // namespace acpa::simd
