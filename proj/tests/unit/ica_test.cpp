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
#include <numbers>
#include <random>

#include "acpa/common/error.hpp"
#include "acpa/dsp/ica.hpp"
#include "acpa/sim/device_sim.hpp"

namespace {

using namespace acpa;
using namespace acpa::dsp;

struct Mixture {
  Eigen::MatrixXd sources;  // 8 x n
  Eigen::MatrixXd mixing;   // 8 x 8
  MultiChannel observed;
};

// Seven sinusoids plus one blink train. No integer combination of the
// frequencies with |k1| + ... + |k7| <= 4 comes within 0.3 Hz of zero, so the
// sources are independent to fourth order.
Mixture make_mixture(std::uint64_t seed, std::size_t n = 7500, double fs = 250.0) {
  std::mt19937_64 rng(seed);
  Mixture m;
  m.sources = Eigen::MatrixXd::Zero(8, static_cast<Eigen::Index>(n));
  const double freqs[7] = {15.7, 17.4, 21.9, 24.0, 28.9, 31.9, 32.6};
  std::uniform_real_distribution<double> phase(0.0, 2 * std::numbers::pi);
  for (int s = 0; s < 7; ++s) {
    const double ph = phase(rng);
    for (std::size_t i = 0; i < n; ++i) m.sources(s, static_cast<Eigen::Index>(i)) = std::sin(2 * std::numbers::pi * freqs[s] * i / fs + ph);
  }
  MultiChannel blink(8, n, fs);
  std::vector<std::size_t> times;
  for (std::size_t t = 300; t + 100 < n; t += 600 + rng() % 400) times.push_back(t);
  sim::add_blinks(blink, times, 1.0);
  for (std::size_t i = 0; i < n; ++i) m.sources(7, static_cast<Eigen::Index>(i)) = blink.at(6, i);
  // Zero-mean, unit-variance sources, so the global unmixing is a signed
  // permutation of unit entries.
  for (Eigen::Index s = 0; s < 8; ++s) {
    m.sources.row(s).array() -= m.sources.row(s).mean();
    m.sources.row(s) /= std::sqrt(m.sources.row(s).squaredNorm() / static_cast<double>(n));
  }

  std::normal_distribution<double> g(0.0, 1.0);
  m.mixing = Eigen::MatrixXd(8, 8);
  for (Eigen::Index r = 0; r < 8; ++r)
    for (Eigen::Index c = 0; c < 8; ++c) m.mixing(r, c) = g(rng);
  const Eigen::MatrixXd x = m.mixing * m.sources;
  m.observed = MultiChannel(8, n, fs);
  for (std::size_t c = 0; c < 8; ++c)
    for (std::size_t i = 0; i < n; ++i) m.observed.at(c, i) = x(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(i)) + 5.0;
  return m;
}

double corr(const Eigen::RowVectorXd& a, const Eigen::RowVectorXd& b) {
  const Eigen::RowVectorXd x = a.array() - a.mean(), y = b.array() - b.mean();
  return x.dot(y) / std::sqrt(x.squaredNorm() * y.squaredNorm());
}

TEST(Ica, WhitenedCovarianceIsIdentity) {
  const Mixture m = make_mixture(1);
  const IcaModel model = fit_ica(m.observed);
  Eigen::MatrixXd x(8, m.observed.samples);
  for (std::size_t c = 0; c < 8; ++c)
    for (std::size_t i = 0; i < m.observed.samples; ++i)
      x(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(i)) = m.observed.at(c, i);
  x.colwise() -= model.mean;
  const Eigen::MatrixXd z = model.whitening * x;
  const Eigen::MatrixXd cov = z * z.transpose() / static_cast<double>(z.cols());
  EXPECT_LT((cov - Eigen::MatrixXd::Identity(8, 8)).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(Ica, RecoversSourcesUpToPermutationAndSign) {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const Mixture m = make_mixture(seed);
    const IcaModel model = fit_ica(m.observed);
    const Eigen::MatrixXd est = model.unmix(m.observed);
    std::vector<int> owner(8, -1);
    for (int r = 0; r < 8; ++r) {
      int best = -1, strong = 0;
      double best_c = 0;
      for (int s = 0; s < 8; ++s) {
        const double c = std::abs(corr(est.row(r), m.sources.row(s)));
        if (c >= 0.95) ++strong;
        if (c > best_c) best_c = c, best = s;
      }
      EXPECT_GE(best_c, 0.95) << "seed " << seed << " component " << r;
      EXPECT_EQ(strong, 1);
      owner[r] = best;
    }
    std::sort(owner.begin(), owner.end());
    for (int s = 0; s < 8; ++s) EXPECT_EQ(owner[s], s) << "seed " << seed;

    // Full unmixing (W * whitening) applied to the true mixing.
    const Eigen::MatrixXd p = model.unmixing * model.whitening * m.mixing;
    for (Eigen::Index r = 0; r < 8; ++r) {
      Eigen::Index j;
      const Eigen::RowVectorXd row = p.row(r).cwiseAbs();
      row.maxCoeff(&j);
      EXPECT_NEAR(row(j), 1.0, 0.1) << "seed " << seed;
      for (Eigen::Index c = 0; c < 8; ++c)
        if (c != j) {
          EXPECT_LT(row(c), 0.1) << "seed " << seed;
        }
    }
  }
}

TEST(Ica, RemoveNoneReconstructs) {
  const Mixture m = make_mixture(4);
  const IcaModel model = fit_ica(m.observed);
  const MultiChannel back = remove_components(model, m.observed, {});
  double peak = 0;
  for (double v : m.observed.data) peak = std::max(peak, std::abs(v));
  for (std::size_t k = 0; k < back.data.size(); ++k) ASSERT_NEAR(back.data[k], m.observed.data[k], 1e-6 * peak);
  const Eigen::MatrixXd prod = model.mixing * model.unmixing * model.whitening;
  EXPECT_LT((prod - Eigen::MatrixXd::Identity(8, 8)).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(Ica, RemoveAllLeavesChannelMeans) {
  const Mixture m = make_mixture(5);
  const IcaModel model = fit_ica(m.observed);
  const std::vector<std::size_t> all{0, 1, 2, 3, 4, 5, 6, 7};
  const MultiChannel out = remove_components(model, m.observed, all);
  for (std::size_t c = 0; c < 8; ++c) {
    double mean = 0;
    for (double v : m.observed.row(c)) mean += v;
    mean /= static_cast<double>(m.observed.samples);
    for (double v : out.row(c)) ASSERT_NEAR(v, mean, 1e-9);
  }
}

TEST(Ica, KurtosisFlagsTheBlinkComponent) {
  const Mixture m = make_mixture(6);
  const IcaModel model = fit_ica(m.observed);
  const CleanResult r = remove_artifact_components(model, m.observed, {});
  ASSERT_EQ(r.removed.size(), 1u);
  const Eigen::MatrixXd est = model.unmix(m.observed);
  EXPECT_GE(std::abs(corr(est.row(static_cast<Eigen::Index>(r.removed[0])), m.sources.row(7))), 0.95);
}

TEST(Ica, BlinkRemovalOnSimulatedSessions) {
  for (std::uint64_t seed = 1; seed <= 4; ++seed) {
    const auto cfg = sim::SimConfig::for_class(static_cast<EmotionLabel>(seed % 4), seed, 30.0);
    const sim::Session s = sim::generate_session(cfg);
    const CleanResult r = remove_artifact_components(fit_ica(s.signal), s.signal, {});
    ASSERT_FALSE(r.removed.empty()) << "seed " << seed;
    // Reference excludes the blink only; errors are taken about each channel's mean.
    double e0 = 0, e1 = 0;
    for (std::size_t c = 0; c < 8; ++c) {
      const std::size_t n = s.signal.samples;
      double m0 = 0, m1 = 0;
      for (std::size_t i = 0; i < n; ++i) {
        const double ref = s.truth.clean_signal.at(c, i) + s.truth.mains_waveform.at(c, i);
        m0 += s.signal.at(c, i) - ref;
        m1 += r.cleaned.at(c, i) - ref;
      }
      m0 /= static_cast<double>(n);
      m1 /= static_cast<double>(n);
      for (std::size_t i = 0; i < n; ++i) {
        const double ref = s.truth.clean_signal.at(c, i) + s.truth.mains_waveform.at(c, i);
        e0 += std::pow(s.signal.at(c, i) - ref - m0, 2);
        e1 += std::pow(r.cleaned.at(c, i) - ref - m1, 2);
      }
    }
    EXPECT_GE(1.0 - std::sqrt(e1 / e0), 0.70) << "seed " << seed;
  }
}

TEST(Ica, Statistics) {
  std::vector<double> gauss(200000);
  std::mt19937_64 rng(7);
  std::normal_distribution<double> g(0.0, 1.0);
  for (double& v : gauss) v = g(rng);
  EXPECT_NEAR(excess_kurtosis(gauss), 0.0, 0.05);
  std::vector<double> uni(200000);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (double& v : uni) v = u(rng);
  EXPECT_NEAR(excess_kurtosis(uni), -1.2, 0.02);
  const std::vector<double> a{1, 2, 3, 4}, b{2, 4, 6, 8}, c{4, 3, 2, 1};
  EXPECT_NEAR(correlation(a, b), 1.0, 1e-12);
  EXPECT_NEAR(correlation(a, c), -1.0, 1e-12);
}

TEST(Ica, Errors) {
  MultiChannel tiny(8, 40, 250.0);
  std::mt19937_64 rng(8);
  std::normal_distribution<double> g(0.0, 1.0);
  for (double& v : tiny.data) v = g(rng);
  try {
    fit_ica(tiny);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::TooFewSamples);
  }
  MultiChannel dup(8, 1000, 250.0);
  for (double& v : dup.data) v = g(rng);
  for (std::size_t i = 0; i < 1000; ++i) dup.at(7, i) = dup.at(3, i);
  try {
    fit_ica(dup);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::RankDeficient);
  }
}

}  // namespace
