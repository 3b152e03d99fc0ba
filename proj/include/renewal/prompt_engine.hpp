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
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "renewal/common.hpp"

namespace renewal::prompt {

inline constexpr std::string_view kDefaultTemplate = "{tr} {ta} in a street";

struct Prompt {
  std::string trigger;
  std::string target;
  std::string templ;
  std::string rendered;
};

/// Underscores in a token render as spaces ("Gin_Palaces" -> "Gin Palaces").
std::string display_token(std::string_view token);

/// Throws InvalidArgument unless {tr} and {ta} each occur exactly once.
void validate_template(std::string_view templ);

Prompt render_prompt(std::string_view trigger, std::string_view target,
                     std::string_view templ = kDefaultTemplate);

/// Manually designed trigger word for a metric: Safe, Beautiful, Lively.
std::string manual_prompt_word(Metric objective);

enum class ScenarioId { NI, BR, GSE, CG };

inline constexpr std::array<ScenarioId, 4> kAllScenarios{ScenarioId::NI, ScenarioId::BR,
                                                          ScenarioId::GSE, ScenarioId::CG};

std::string_view to_string(ScenarioId id);
ScenarioId parse_scenario(std::string_view name);

// Disorder factor names. The default set is Building, Wall, Fence and
// Vegetation; ScenarioTable::add_factor extends it.
using DisorderFactor = std::string;

struct ScenarioSpec {
  ScenarioId id = ScenarioId::NI;
  DisorderFactor source_class;
  std::string target_word;
  Metric objective = Metric::safe;
};

// One row of the scenario table. An unset target_word means "echo the
// detected class" (the NI rule).
struct ScenarioRule {
  ScenarioId id = ScenarioId::NI;
  std::vector<DisorderFactor> sources;
  std::optional<std::string> target_word;
  Metric objective = Metric::safe;
};

class ScenarioTable {
 public:
  static ScenarioTable defaults();

  const ScenarioRule& rule(ScenarioId id) const;
  void set_target_word(ScenarioId id, std::string word);
  void set_objective(ScenarioId id, Metric objective);
  void set_sources(ScenarioId id, std::vector<DisorderFactor> sources);

  const std::vector<DisorderFactor>& factors() const { return factors_; }
  void add_factor(DisorderFactor name);
  /// Canonical spelling of a factor name, matched case-insensitively.
  std::optional<DisorderFactor> canonical_factor(std::string_view name) const;

  /// Resolves a scenario for an image. `detected` must be one of the rule's
  /// sources when given; without it the first source is assumed.
  ScenarioSpec resolve(ScenarioId id, std::optional<std::string_view> detected = {}) const;

 private:
  std::array<ScenarioRule, 4> rules_{};
  std::vector<DisorderFactor> factors_;
};

/// Default-table lookup.
ScenarioSpec scenario_mapping(ScenarioId id, std::optional<std::string_view> detected = {});

}  // namespace renewal::prompt
