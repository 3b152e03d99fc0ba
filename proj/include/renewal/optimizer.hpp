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
#include <iosfwd>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "renewal/embedding_store.hpp"
#include "renewal/gateway.hpp"
#include "renewal/gaussian_process.hpp"
#include "renewal/perception_metrics.hpp"
#include "renewal/prompt_engine.hpp"

namespace renewal::bo {

enum class LengthscaleMode { median_heuristic, fixed };

struct OptimizerConfig {
  int budget = 30;
  int patience = 10;
  int init_random = 4;
  double xi = 0.01;
  double noise_variance = 1e-6;
  LengthscaleMode lengthscale_mode = LengthscaleMode::median_heuristic;
  double fixed_lengthscale = 1.0;
  double signal_floor = 1e-4;
  std::uint64_t rng_seed = 0;
  std::optional<std::size_t> candidate_limit;
  /// Word sample size for the median heuristic.
  std::size_t median_sample_limit = 2000;

  /// Throws InvalidArgument.
  void validate() const;
};

/// Lengthscale the GP uses for this vocabulary under `config`.
double resolve_lengthscale(const OptimizerConfig& config, const embedding::Vocabulary& vocab);

// ---- acquisition -----------------------------------------------------------

double normal_pdf(double z);
double normal_cdf(double z);

/// Closed-form EI for maximisation: E[max(f - best - xi, 0)], f ~ N(mean, stddev^2).
double expected_improvement(double mean, double stddev, double best, double xi);

/// Argmax of EI over vocabulary words not marked in `evaluated`, ties to the
/// lexicographically smallest word. With config.candidate_limit set, only a
/// seeded random subset (seed mixed with `round`) is scored.
/// Throws VocabularyExhausted.
std::size_t select_next(const GaussianProcess& model, const embedding::Vocabulary& vocab,
                        const std::vector<bool>& evaluated, double best,
                        const OptimizerConfig& config, std::uint64_t round = 0);

// ---- evaluation ------------------------------------------------------------

// Everything needed to evaluate a trigger word on one image.
struct EditTask {
  std::string record_id;
  std::string image;
  std::string mask;
  std::string target_word;
  std::string prompt_template{prompt::kDefaultTemplate};
  std::uint64_t seed = 0;
  gateway::EditParams params;
};

struct Evaluation {
  prompt::Prompt prompt;
  gateway::EvaluationResult result;
  double reward = 0.0;
  bool ok = false;
  /// The failure was a TransportError (backend unreachable after retries).
  bool transport_error = false;
  std::string error;
};

// Renders, edits, scores and rewards trigger words for one record. Results
// are memoised per (case-folded) trigger so the baselines and the optimizer
// can share evaluations. Not thread-safe; one instance per record.
class TriggerEvaluator {
 public:
  TriggerEvaluator(EditTask task, gateway::Backend& backend, perception::RewardSpec reward,
                   perception::PerceptionScores raw_scores);

  /// Never throws for evaluation failures; they come back with ok = false.
  const Evaluation& evaluate(const std::string& trigger);

  const EditTask& task() const { return task_; }
  const perception::PerceptionScores& raw_scores() const { return raw_; }
  const perception::RewardSpec& reward_spec() const { return reward_; }
  std::size_t backend_evaluations() const { return backend_evaluations_; }

 private:
  EditTask task_;
  gateway::Backend& backend_;
  perception::RewardSpec reward_;
  perception::PerceptionScores raw_;
  std::unordered_map<std::string, Evaluation> memo_;
  std::size_t backend_evaluations_ = 0;
};

// ---- optimisation loop -----------------------------------------------------

enum class Phase { init, bo };

struct TraceEntry {
  int iteration = 0;
  std::string trigger;
  std::string prompt;
  perception::PerceptionScores scores;
  /// -infinity for a failed evaluation.
  double reward = 0.0;
  double best_so_far = 0.0;
  Phase phase = Phase::init;
  double wall_ms = 0.0;
  std::string error;
};

struct OptimizationOutcome {
  prompt::Prompt best_prompt;
  gateway::EvaluationResult best_result;
  double best_reward = 0.0;
  std::vector<TraceEntry> trace;
};

// Bayesian optimisation of the trigger word.
//
// Init phase: the manual word for the scenario's objective (when it is in the
// vocabulary) plus `init_random` seeded random words. BO phase: fit the GP to
// standardised rewards, pick the EI argmax among unevaluated words, evaluate,
// repeat. Stops at `budget` evaluations, after `patience` consecutive BO
// iterations without a strict improvement, or when the vocabulary runs out.
// Failed evaluations use up budget, never reach the GP, and are not retried.
// Throws Error if no evaluation succeeds.
OptimizationOutcome optimize(TriggerEvaluator& evaluator, const embedding::Vocabulary& vocab,
                             const prompt::ScenarioSpec& scenario, const OptimizerConfig& config);

/// One JSON object per line:
/// record_id, iteration, phase, trigger, prompt, scores, reward, best_so_far
/// (+ wall_ms when include_timing). Non-finite rewards are written as null.
void write_trace(std::ostream& out, const std::string& record_id,
                 const std::vector<TraceEntry>& trace, bool include_timing);

std::string_view to_string(Phase p);

}  // namespace renewal::bo
