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

#include "renewal/perception_metrics.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

namespace renewal::perception {

double PerceptionScores::get(Metric m) const {
  switch (m) {
    case Metric::safe:
      return safe;
    case Metric::beauty:
      return beauty;
    case Metric::lively:
      return lively;
  }
  return safe;
}

double& PerceptionScores::get(Metric m) {
  switch (m) {
    case Metric::safe:
      return safe;
    case Metric::beauty:
      return beauty;
    case Metric::lively:
      return lively;
  }
  return safe;
}

bool check_scores(const PerceptionScores& s) {
  bool in_range = true;
  for (Metric m : kAllMetrics) {
    const double v = s.get(m);
    if (!std::isfinite(v)) {
      throw ProtocolError(fmt::format("non-finite {} score", to_string(m)));
    }
    if (v < kScoreMin || v > kScoreMax) {
      spdlog::warn("{} score {} lies outside [0, 10]", to_string(m), v);
      in_range = false;
    }
  }
  return in_range;
}

PerceptionScores clamped_for_report(const PerceptionScores& s) {
  return {std::clamp(s.safe, kScoreMin, kScoreMax), std::clamp(s.beauty, kScoreMin, kScoreMax),
          std::clamp(s.lively, kScoreMin, kScoreMax)};
}

RewardSpec RewardSpec::single(Metric objective, double epsilon) {
  RewardSpec r;
  r.mode = RewardMode::single;
  r.objective = objective;
  r.epsilon = epsilon;
  return r;
}

RewardSpec RewardSpec::weighted(std::array<double, 3> weights, double epsilon) {
  RewardSpec r;
  r.mode = RewardMode::weighted;
  r.weights = weights;
  r.epsilon = epsilon;
  return r;
}

void RewardSpec::validate() const {
  if (!(epsilon > 0.0)) throw InvalidArgument("reward epsilon must be positive");
  if (mode == RewardMode::weighted) {
    double sum = 0.0;
    for (double w : weights) {
      if (!(w >= 0.0) || !std::isfinite(w)) throw InvalidArgument("reward weights must be >= 0");
      sum += w;
    }
    if (std::abs(sum - 1.0) > 1e-9) {
      throw InvalidArgument(fmt::format("reward weights sum to {}, expected 1", sum));
    }
  }
}

double improvement_rate(double previous, double renewal, double epsilon) {
  if (!(previous > epsilon)) {
    throw UndefinedBaseline(
        fmt::format("previous score {} does not exceed epsilon {}", previous, epsilon));
  }
  return (renewal - previous) / previous;
}

std::array<double, 3> improvement_rates(const PerceptionScores& raw,
                                        const PerceptionScores& edited, double epsilon) {
  std::array<double, 3> out{};
  for (Metric m : kAllMetrics) out[index_of(m)] = improvement_rate(raw.get(m), edited.get(m), epsilon);
  return out;
}

double reward(const PerceptionScores& raw, const PerceptionScores& edited, const RewardSpec& spec) {
  spec.validate();
  if (spec.mode == RewardMode::single) {
    return improvement_rate(raw.get(spec.objective), edited.get(spec.objective), spec.epsilon);
  }
  double total = 0.0;
  for (Metric m : kAllMetrics) {
    const double w = spec.weights[index_of(m)];
    if (w == 0.0) continue;
    total += w * improvement_rate(raw.get(m), edited.get(m), spec.epsilon);
  }
  return total;
}

}  // namespace renewal::perception
