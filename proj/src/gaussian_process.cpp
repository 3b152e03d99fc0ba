/*
 * Copyright 2026 The Renewal Simulator Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "renewal/gaussian_process.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "renewal/common.hpp"
#include "renewal/hashing.hpp"

namespace renewal::bo {

namespace {

double squared_distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

std::span<const double> row_span(const Eigen::MatrixXd& m, Eigen::Index r, std::vector<double>& buf) {
  buf.resize(static_cast<std::size_t>(m.cols()));
  for (Eigen::Index c = 0; c < m.cols(); ++c) buf[static_cast<std::size_t>(c)] = m(r, c);
  return buf;
}

}  // namespace

GaussianProcess GaussianProcess::fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                     const GpHyperparameters& hyper) {
  if (X.rows() == 0) throw InvalidArgument("gp_fit needs at least one observation");
  if (X.rows() != y.size()) {
    throw InvalidArgument(fmt::format("gp_fit: {} inputs but {} targets", X.rows(), y.size()));
  }
  if (!(hyper.lengthscale > 0.0) || !(hyper.noise_variance > 0.0) || !(hyper.signal_floor > 0.0)) {
    throw InvalidArgument("gp_fit: lengthscale, noise and signal floor must be positive");
  }
  if (!X.allFinite() || !y.allFinite()) throw InvalidArgument("gp_fit: non-finite data");

  GaussianProcess gp;
  gp.X_ = X;
  gp.hyper_ = hyper;
  const double mean = y.mean();
  const double var = (y.array() - mean).square().mean();
  gp.signal_variance_ = std::max(var, hyper.signal_floor);

  const Eigen::Index n = X.rows();
  Eigen::MatrixXd K(n, n);
  std::vector<double> a;
  std::vector<double> b;
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto xi = row_span(X, i, a);
    for (Eigen::Index j = 0; j <= i; ++j) {
      const double k = gp.kernel(xi, row_span(X, j, b));
      K(i, j) = k;
      K(j, i) = k;
    }
  }

  double jitter = 0.0;
  double next_jitter = 10.0 * hyper.noise_variance;
  while (true) {
    Eigen::MatrixXd A = K;
    A.diagonal().array() += hyper.noise_variance + jitter;
    gp.chol_.compute(A);
    if (gp.chol_.info() == Eigen::Success) break;
    if (next_jitter > kMaxJitter) {
      throw FactorizationError(
          fmt::format("kernel matrix not positive definite after jitter {}", jitter));
    }
    jitter = next_jitter;
    next_jitter *= 10.0;
  }
  if (jitter > 0.0) spdlog::debug("gp_fit: factorised with jitter {}", jitter);
  gp.jitter_ = jitter;
  gp.alpha_ = gp.chol_.solve(y);
  return gp;
}

double GaussianProcess::kernel(std::span<const double> a, std::span<const double> b) const {
  const double l = hyper_.lengthscale;
  return signal_variance_ * std::exp(-squared_distance(a, b) / (2.0 * l * l));
}

GpPrediction GaussianProcess::predict(std::span<const double> x) const {
  if (x.size() != dim()) {
    throw DimensionMismatch(fmt::format("gp_predict: point has dimension {}, model {}", x.size(), dim()));
  }
  const Eigen::Index n = X_.rows();
  Eigen::VectorXd kstar(n);
  std::vector<double> buf;
  for (Eigen::Index i = 0; i < n; ++i) kstar(i) = kernel(x, row_span(X_, i, buf));

  const double mean = kstar.dot(alpha_);
  const Eigen::VectorXd v = chol_.matrixL().solve(kstar);
  const double var = std::max(signal_variance_ - v.squaredNorm(), 0.0);
  return {mean, std::sqrt(var)};
}

double median_pairwise_distance(const embedding::Vocabulary& vocab, std::size_t max_points,
                                std::uint64_t seed) {
  if (vocab.size() < 2) return 1.0;
  std::vector<std::size_t> idx(vocab.size());
  std::iota(idx.begin(), idx.end(), 0);
  if (max_points >= 2 && idx.size() > max_points) {
    Rng rng(derive_seed(seed, "median-heuristic"));
    for (std::size_t i = 0; i < max_points; ++i) {
      std::swap(idx[i], idx[i + rng.index(idx.size() - i)]);
    }
    idx.resize(max_points);
  }
  std::vector<double> d;
  d.reserve(idx.size() * (idx.size() - 1) / 2);
  for (std::size_t i = 0; i < idx.size(); ++i) {
    const auto vi = vocab.vector(idx[i]);
    for (std::size_t j = i + 1; j < idx.size(); ++j) {
      d.push_back(std::sqrt(squared_distance(vi, vocab.vector(idx[j]))));
    }
  }
  const auto mid = d.begin() + static_cast<std::ptrdiff_t>(d.size() / 2);
  std::nth_element(d.begin(), mid, d.end());
  double m = *mid;
  if (d.size() % 2 == 0) {
    m = 0.5 * (m + *std::max_element(d.begin(), mid));
  }
  return m > 0.0 ? m : 1.0;
}

}  // namespace renewal::bo
