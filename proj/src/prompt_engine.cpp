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

#include "renewal/prompt_engine.hpp"

#include <algorithm>

#include <fmt/format.h>

namespace renewal::prompt {

namespace {

constexpr std::string_view kTriggerSlot = "{tr}";
constexpr std::string_view kTargetSlot = "{ta}";

std::size_t count_occurrences(std::string_view haystack, std::string_view needle) {
  std::size_t n = 0;
  for (std::size_t pos = haystack.find(needle); pos != std::string_view::npos;
       pos = haystack.find(needle, pos + needle.size())) {
    ++n;
  }
  return n;
}

}  // namespace

std::string display_token(std::string_view token) {
  std::string out(token);
  std::replace(out.begin(), out.end(), '_', ' ');
  return out;
}

void validate_template(std::string_view templ) {
  const auto tr = count_occurrences(templ, kTriggerSlot);
  const auto ta = count_occurrences(templ, kTargetSlot);
  if (tr != 1 || ta != 1) {
    throw InvalidArgument(fmt::format(
        "prompt template '{}' must contain {{tr}} and {{ta}} exactly once (found {} and {})", templ,
        tr, ta));
  }
}

Prompt render_prompt(std::string_view trigger, std::string_view target, std::string_view templ) {
  validate_template(templ);
  if (trigger.empty() || target.empty()) throw InvalidArgument("prompt tokens must be non-empty");

  // Substitute both slots in a single left-to-right pass so a token that
  // happens to contain "{ta}" is never re-expanded.
  std::string rendered;
  std::size_t pos = 0;
  while (pos < templ.size()) {
    if (templ.substr(pos, kTriggerSlot.size()) == kTriggerSlot) {
      rendered += display_token(trigger);
      pos += kTriggerSlot.size();
    } else if (templ.substr(pos, kTargetSlot.size()) == kTargetSlot) {
      rendered += display_token(target);
      pos += kTargetSlot.size();
    } else {
      rendered += templ[pos++];
    }
  }
  return {std::string(trigger), std::string(target), std::string(templ), std::move(rendered)};
}

std::string manual_prompt_word(Metric objective) {
  switch (objective) {
    case Metric::safe:
      return "Safe";
    case Metric::beauty:
      return "Beautiful";
    case Metric::lively:
      return "Lively";
  }
  return "Beautiful";
}

std::string_view to_string(ScenarioId id) {
  switch (id) {
    case ScenarioId::NI:
      return "NI";
    case ScenarioId::BR:
      return "BR";
    case ScenarioId::GSE:
      return "GSE";
    case ScenarioId::CG:
      return "CG";
  }
  return "?";
}

ScenarioId parse_scenario(std::string_view name) {
  for (ScenarioId id : kAllScenarios) {
    if (fold_case(name) == fold_case(to_string(id))) return id;
  }
  throw InvalidArgument(fmt::format("unknown scenario '{}'", name));
}

ScenarioTable ScenarioTable::defaults() {
  ScenarioTable t;
  t.factors_ = {"Building", "Wall", "Fence", "Vegetation"};
  t.rules_[0] = {ScenarioId::NI, {"Wall", "Fence"}, std::nullopt, Metric::safe};
  t.rules_[1] = {ScenarioId::BR, {"Building"}, "Building", Metric::lively};
  t.rules_[2] = {ScenarioId::GSE, {"Vegetation"}, "Park", Metric::beauty};
  t.rules_[3] = {ScenarioId::CG, {"Vegetation"}, "Gardens", Metric::beauty};
  return t;
}

const ScenarioRule& ScenarioTable::rule(ScenarioId id) const {
  return rules_[static_cast<std::size_t>(id)];
}

void ScenarioTable::set_target_word(ScenarioId id, std::string word) {
  if (word.empty()) throw InvalidArgument("scenario target word must be non-empty");
  rules_[static_cast<std::size_t>(id)].target_word = std::move(word);
}

void ScenarioTable::set_objective(ScenarioId id, Metric objective) {
  rules_[static_cast<std::size_t>(id)].objective = objective;
}

void ScenarioTable::set_sources(ScenarioId id, std::vector<DisorderFactor> sources) {
  if (sources.empty()) throw InvalidArgument("scenario needs at least one source class");
  for (auto& s : sources) {
    auto canon = canonical_factor(s);
    if (!canon) throw InvalidArgument(fmt::format("unknown disorder factor '{}'", s));
    s = *canon;
  }
  rules_[static_cast<std::size_t>(id)].sources = std::move(sources);
}

void ScenarioTable::add_factor(DisorderFactor name) {
  if (name.empty()) throw InvalidArgument("disorder factor name must be non-empty");
  if (!canonical_factor(name)) factors_.push_back(std::move(name));
}

std::optional<DisorderFactor> ScenarioTable::canonical_factor(std::string_view name) const {
  const std::string folded = fold_case(name);
  for (const auto& f : factors_) {
    if (fold_case(f) == folded) return f;
  }
  return std::nullopt;
}

ScenarioSpec ScenarioTable::resolve(ScenarioId id, std::optional<std::string_view> detected) const {
  const ScenarioRule& r = rule(id);
  DisorderFactor source = r.sources.front();
  if (detected) {
    const auto it = std::find_if(r.sources.begin(), r.sources.end(), [&](const auto& s) {
      return fold_case(s) == fold_case(*detected);
    });
    if (it == r.sources.end()) {
      throw InvalidArgument(fmt::format("scenario {} does not apply to factor '{}'", to_string(id),
                                        *detected));
    }
    source = *it;
  }
  return {id, source, r.target_word.value_or(source), r.objective};
}

ScenarioSpec scenario_mapping(ScenarioId id, std::optional<std::string_view> detected) {
  static const ScenarioTable table = ScenarioTable::defaults();
  return table.resolve(id, detected);
}

}  // namespace renewal::prompt
