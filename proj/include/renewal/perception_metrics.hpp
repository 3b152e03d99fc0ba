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

#include <array>

#include "renewal/common.hpp"

namespace renewal::perception {

inline constexpr double kDefaultEpsilon = 1e-6;
inline constexpr double kScoreMin = 0.0;
inline constexpr double kScoreMax = 10.0;

/// Safety / beauty / liveliness on the nominal 0-10 scale.
struct PerceptionScores {
  double safe = 0.0;
  double beauty = 0.0;
  double lively = 0.0;

  double get(Metric m) const;
  double& get(Metric m);
  bool operator==(const PerceptionScores&) const = default;
};

/// Throws ProtocolError on non-finite values; logs a warning and returns
/// false when a value falls outside [0, 10]. Never modifies the scores.
bool check_scores(const PerceptionScores& s);

/// Copy clamped to [0, 10]. For report display only.
PerceptionScores clamped_for_report(const PerceptionScores& s);

enum class RewardMode { single, weighted };

struct RewardSpec {
  RewardMode mode = RewardMode::single;
  Metric objective = Metric::beauty;
  /// Indexed by Metric; used in weighted mode.
  std::array<double, 3> weights{0.0, 0.0, 0.0};
  double epsilon = kDefaultEpsilon;

  static RewardSpec single(Metric objective, double epsilon = kDefaultEpsilon);
  static RewardSpec weighted(std::array<double, 3> weights, double epsilon = kDefaultEpsilon);
  /// Throws InvalidArgument.
  void validate() const;
};

/// (renewal - previous) / previous. Throws UndefinedBaseline if
/// previous <= epsilon.
double improvement_rate(double previous, double renewal, double epsilon = kDefaultEpsilon);

std::array<double, 3> improvement_rates(const PerceptionScores& raw,
                                        const PerceptionScores& edited,
                                        double epsilon = kDefaultEpsilon);

/// Scalar the optimizer maximizes: the objective metric's improvement rate
/// (single) or a convex combination of all three (weighted).
double reward(const PerceptionScores& raw, const PerceptionScores& edited, const RewardSpec& spec);

}  // namespace renewal::perception
