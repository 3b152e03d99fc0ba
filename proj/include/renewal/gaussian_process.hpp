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

#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include "renewal/embedding_store.hpp"

namespace renewal::bo {

struct GpHyperparameters {
  double lengthscale = 1.0;
  double noise_variance = 1e-6;
  /// Lower bound on the signal variance, which otherwise tracks var(y).
  double signal_floor = 1e-4;
};

struct GpPrediction {
  double mean = 0.0;
  double stddev = 0.0;
};

// Zero-mean GP regression with a squared-exponential kernel
//
//   k(a, b) = sf2 * exp(-|a - b|^2 / (2 l^2)),   sf2 = max(var(y), signal_floor)
//
// fitted by Cholesky factorisation of K + (noise + jitter) I. Jitter starts
// at zero and, on a failed factorisation, escalates by x10 from
// 10 * noise_variance up to 1e-2.
class GaussianProcess {
 public:
  static constexpr double kMaxJitter = 1e-2;

  /// X holds one observation per row. Throws InvalidArgument on empty or
  /// inconsistent input, FactorizationError if escalation is exhausted.
  static GaussianProcess fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                             const GpHyperparameters& hyper);

  /// Throws DimensionMismatch.
  GpPrediction predict(std::span<const double> x) const;

  double kernel(std::span<const double> a, std::span<const double> b) const;

  std::size_t size() const { return static_cast<std::size_t>(X_.rows()); }
  std::size_t dim() const { return static_cast<std::size_t>(X_.cols()); }
  double signal_variance() const { return signal_variance_; }
  double lengthscale() const { return hyper_.lengthscale; }
  double noise_variance() const { return hyper_.noise_variance; }
  /// Extra diagonal added beyond noise_variance to make K factorisable.
  double jitter() const { return jitter_; }

 private:
  Eigen::MatrixXd X_;
  Eigen::VectorXd alpha_;
  Eigen::LLT<Eigen::MatrixXd> chol_;
  GpHyperparameters hyper_;
  double signal_variance_ = 1.0;
  double jitter_ = 0.0;
};

inline GaussianProcess gp_fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                              const GpHyperparameters& hyper) {
  return GaussianProcess::fit(X, y, hyper);
}

inline GpPrediction gp_predict(const GaussianProcess& model, std::span<const double> x) {
  return model.predict(x);
}

/// Median Euclidean distance over all vocabulary pairs. Vocabularies larger
/// than `max_points` are subsampled (seeded) to that many words first.
double median_pairwise_distance(const embedding::Vocabulary& vocab, std::size_t max_points,
                                std::uint64_t seed);

}  // namespace renewal::bo
