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

#include "acpa/dsp/ica.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "acpa/common/error.hpp"
#include "acpa/simd/kernels.hpp"

namespace acpa::dsp {

namespace {

Eigen::MatrixXd to_matrix(const MultiChannel& data) {
  Eigen::MatrixXd x(data.channels, data.samples);
  for (std::size_t c = 0; c < data.channels; ++c)
    for (std::size_t i = 0; i < data.samples; ++i) x(c, i) = data.at(c, i);
  return x;
}

// W (W^T W)^{-1/2}, written for row-vector unmixing: (W W^T)^{-1/2} W.
Eigen::MatrixXd symmetric_decorrelate(const Eigen::MatrixXd& w) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(w * w.transpose());
  const Eigen::VectorXd inv_sqrt = eig.eigenvalues().cwiseMax(1e-300).cwiseSqrt().cwiseInverse();
  return eig.eigenvectors() * inv_sqrt.asDiagonal() * eig.eigenvectors().transpose() * w;
}

}  // namespace

Eigen::MatrixXd IcaModel::unmix(const MultiChannel& data) const {
  Eigen::MatrixXd x = to_matrix(data);
  x.colwise() -= mean;
  return unmixing * whitening * x;
}

IcaModel fit_ica(const MultiChannel& data, const IcaOptions& opts) {
  const auto n = static_cast<Eigen::Index>(data.channels);
  const auto m = static_cast<Eigen::Index>(data.samples);
  if (n == 0 || m < 50 * n) throw Error(ErrorCode::TooFewSamples, "ICA needs at least 50 samples per channel");

  IcaModel model;
  Eigen::MatrixXd x = to_matrix(data);
  model.mean = x.rowwise().mean();
  x.colwise() -= model.mean;

  const Eigen::MatrixXd cov = x * x.transpose() / static_cast<double>(m);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
  const Eigen::VectorXd ev = eig.eigenvalues();
  if (!(ev.minCoeff() >= 1e-12 * ev.maxCoeff()) || !(ev.maxCoeff() > 0.0))
    throw Error(ErrorCode::RankDeficient, "covariance is rank deficient");
  model.whitening = ev.cwiseSqrt().cwiseInverse().asDiagonal() * eig.eigenvectors().transpose();
  const Eigen::MatrixXd z = model.whitening * x;

  std::mt19937_64 rng(opts.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd w(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) w(i, j) = normal(rng);
  w = symmetric_decorrelate(w);

  const double inv_m = 1.0 / static_cast<double>(m);
  for (std::size_t it = 1; it <= opts.max_iter; ++it) {
    // Row-major so each component's samples are contiguous for the kernel.
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> g = w * z;
    Eigen::VectorXd gprime_mean(n);
    for (Eigen::Index r = 0; r < n; ++r)
      gprime_mean(r) = simd::tanh_deriv_sum(g.row(r).data(), static_cast<std::size_t>(m)) * inv_m;
    Eigen::MatrixXd w_new = g * z.transpose() * inv_m - gprime_mean.asDiagonal() * w;
    w_new = symmetric_decorrelate(w_new);
    const double change = ((w_new * w.transpose()).diagonal().cwiseAbs().array() - 1.0).abs().maxCoeff();
    w = w_new;
    model.iterations = it;
    if (change < opts.tol) {
      model.converged = true;
      break;
    }
  }
  model.unmixing = w;
  model.mixing = (model.unmixing * model.whitening).inverse();
  return model;
}

double excess_kurtosis(std::span<const double> x) {
  if (x.empty()) return 0.0;
  const double n = static_cast<double>(x.size());
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= n;
  double m2 = 0.0, m4 = 0.0;
  for (double v : x) {
    const double d = (v - mean) * (v - mean);
    m2 += d;
    m4 += d * d;
  }
  m2 /= n;
  m4 /= n;
  if (m2 <= 0.0) return 0.0;
  return m4 / (m2 * m2) - 3.0;
}

double correlation(std::span<const double> x, std::span<const double> y) {
  const std::size_t n = std::min(x.size(), y.size());
  if (n == 0) return 0.0;
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx <= 0.0 || syy <= 0.0) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

MultiChannel remove_components(const IcaModel& model, const MultiChannel& data, std::span<const std::size_t> removed) {
  if (data.channels != static_cast<std::size_t>(model.mean.size()))
    throw Error(ErrorCode::ShapeMismatch, "ICA model and data disagree on channel count");
  Eigen::MatrixXd s = model.unmix(data);
  for (std::size_t r : removed) s.row(static_cast<Eigen::Index>(r)).setZero();
  Eigen::MatrixXd x = model.mixing * s;
  x.colwise() += model.mean;
  MultiChannel out(data.channels, data.samples, data.fs);
  for (std::size_t c = 0; c < data.channels; ++c)
    for (std::size_t i = 0; i < data.samples; ++i) out.at(c, i) = x(c, i);
  return out;
}

CleanResult remove_artifact_components(const IcaModel& model, const MultiChannel& data, const ArtifactPolicy& policy) {
  if (policy.tmpl && policy.tmpl->size() != data.samples)
    throw Error(ErrorCode::ShapeMismatch, "artifact template length differs from the data");
  const Eigen::MatrixXd s = model.unmix(data);
  CleanResult out;
  std::vector<double> row(data.samples);
  for (Eigen::Index r = 0; r < s.rows(); ++r) {
    for (std::size_t i = 0; i < data.samples; ++i) row[i] = s(r, static_cast<Eigen::Index>(i));
    bool flag = excess_kurtosis(row) > policy.kurtosis_threshold;
    if (!flag && policy.tmpl) flag = std::abs(correlation(row, *policy.tmpl)) > policy.template_threshold;
    if (flag) out.removed.push_back(static_cast<std::size_t>(r));
  }
  out.cleaned = remove_components(model, data, out.removed);
  return out;
}

}  // namespace acpa::dsp
