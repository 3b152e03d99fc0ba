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

#include "renewal/optimizer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <ostream>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "json.hpp"

#include "renewal/hashing.hpp"

namespace renewal::bo {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

}  // namespace

void OptimizerConfig::validate() const {
  if (budget < 1) throw InvalidArgument("optimizer budget must be >= 1");
  if (patience < 1) throw InvalidArgument("optimizer patience must be >= 1");
  if (init_random < 0) throw InvalidArgument("optimizer init_random must be >= 0");
  if (budget < init_random + 1) {
    throw InvalidArgument(
        fmt::format("optimizer budget {} must be at least init_random + 1 = {}", budget, init_random + 1));
  }
  if (!(xi >= 0.0)) throw InvalidArgument("optimizer xi must be >= 0");
  if (!(noise_variance > 0.0)) throw InvalidArgument("optimizer noise variance must be positive");
  if (!(signal_floor > 0.0)) throw InvalidArgument("optimizer signal floor must be positive");
  if (lengthscale_mode == LengthscaleMode::fixed && !(fixed_lengthscale > 0.0)) {
    throw InvalidArgument("optimizer fixed lengthscale must be positive");
  }
  if (candidate_limit && *candidate_limit == 0) {
    throw InvalidArgument("optimizer candidate_limit must be positive");
  }
}

double resolve_lengthscale(const OptimizerConfig& config, const embedding::Vocabulary& vocab) {
  if (config.lengthscale_mode == LengthscaleMode::fixed) return config.fixed_lengthscale;
  return median_pairwise_distance(vocab, config.median_sample_limit, config.rng_seed);
}

double normal_pdf(double z) { return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi); }

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

double expected_improvement(double mean, double stddev, double best, double xi) {
  const double gain = mean - best - xi;
  if (!(stddev > 0.0)) return std::max(gain, 0.0);
  const double z = gain / stddev;
  return std::max(gain * normal_cdf(z) + stddev * normal_pdf(z), 0.0);
}

namespace {

std::vector<std::size_t> candidate_set(const embedding::Vocabulary& vocab,
                                       const std::vector<bool>& evaluated,
                                       const OptimizerConfig& config, std::uint64_t round) {
  std::vector<std::size_t> open;
  for (std::size_t i = 0; i < vocab.size(); ++i) {
    if (i >= evaluated.size() || !evaluated[i]) open.push_back(i);
  }
  if (open.empty()) throw VocabularyExhausted("every vocabulary word has been evaluated");
  if (config.candidate_limit && open.size() > *config.candidate_limit) {
    Rng rng(derive_seed(config.rng_seed, fmt::format("candidates:{}", round)));
    const std::size_t v = *config.candidate_limit;
    for (std::size_t i = 0; i < v; ++i) std::swap(open[i], open[i + rng.index(open.size() - i)]);
    open.resize(v);
  }
  return open;
}

std::size_t smallest_word(const embedding::Vocabulary& vocab, const std::vector<std::size_t>& idx) {
  return *std::min_element(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    return vocab.word(a) < vocab.word(b);
  });
}

}  // namespace

std::size_t select_next(const GaussianProcess& model, const embedding::Vocabulary& vocab,
                        const std::vector<bool>& evaluated, double best,
                        const OptimizerConfig& config, std::uint64_t round) {
  const auto candidates = candidate_set(vocab, evaluated, config, round);
  std::size_t chosen = candidates.front();
  double chosen_ei = kNegInf;
  for (std::size_t i : candidates) {
    const auto p = model.predict(vocab.vector(i));
    const double ei = expected_improvement(p.mean, p.stddev, best, config.xi);
    if (ei > chosen_ei || (ei == chosen_ei && vocab.word(i) < vocab.word(chosen))) {
      chosen = i;
      chosen_ei = ei;
    }
  }
  return chosen;
}

// ---- TriggerEvaluator -----------------------------------------------------

TriggerEvaluator::TriggerEvaluator(EditTask task, gateway::Backend& backend,
                                   perception::RewardSpec reward,
                                   perception::PerceptionScores raw_scores)
    : task_(std::move(task)), backend_(backend), reward_(reward), raw_(raw_scores) {
  reward_.validate();
  prompt::validate_template(task_.prompt_template);
}

const Evaluation& TriggerEvaluator::evaluate(const std::string& trigger) {
  const std::string key = fold_case(trigger);
  if (const auto it = memo_.find(key); it != memo_.end()) return it->second;

  Evaluation ev;
  try {
    ev.prompt = prompt::render_prompt(trigger, task_.target_word, task_.prompt_template);
    gateway::EditRequest req;
    req.image = task_.image;
    req.mask = task_.mask;
    req.prompt = ev.prompt.rendered;
    req.seed = task_.seed;
    req.params = task_.params;
    req.record_id = task_.record_id;
    req.trigger = trigger;
    ++backend_evaluations_;
    ev.result = backend_.edit_and_score(req);
    perception::check_scores(ev.result.scores);
    ev.reward = perception::reward(raw_, ev.result.scores, reward_);
    ev.ok = true;
  } catch (const std::exception& e) {
    ev.ok = false;
    ev.transport_error = dynamic_cast<const TransportError*>(&e) != nullptr;
    ev.reward = kNegInf;
    ev.error = e.what();
    spdlog::warn("record {}: evaluation of '{}' failed: {}", task_.record_id, trigger, e.what());
  }
  return memo_.emplace(key, std::move(ev)).first->second;
}

// ---- optimize -------------------------------------------------------------

OptimizationOutcome optimize(TriggerEvaluator& evaluator, const embedding::Vocabulary& vocab,
                             const prompt::ScenarioSpec& scenario, const OptimizerConfig& config) {
  config.validate();
  if (vocab.empty()) throw InvalidArgument("optimize needs a non-empty vocabulary");

  GpHyperparameters hyper;
  hyper.lengthscale = resolve_lengthscale(config, vocab);
  hyper.noise_variance = config.noise_variance;
  hyper.signal_floor = config.signal_floor;

  OptimizationOutcome out;
  out.best_reward = kNegInf;
  std::vector<bool> evaluated(vocab.size(), false);
  std::vector<std::size_t> observed;  // vocab indices with a successful evaluation
  std::vector<double> rewards;
  const Evaluation* best_eval = nullptr;
  int evaluations = 0;

  // Returns true when the evaluation strictly improved the best reward.
  const auto run = [&](std::size_t index, Phase phase) {
    const auto start = std::chrono::steady_clock::now();
    const std::string& word = vocab.word(index);
    const Evaluation& ev = evaluator.evaluate(word);
    const auto stop = std::chrono::steady_clock::now();
    evaluated[index] = true;
    ++evaluations;

    bool improved = false;
    if (ev.ok) {
      observed.push_back(index);
      rewards.push_back(ev.reward);
      if (ev.reward > out.best_reward) {
        out.best_reward = ev.reward;
        best_eval = &ev;
        improved = true;
      }
    }
    TraceEntry t;
    t.iteration = evaluations;
    t.trigger = word;
    t.prompt = ev.prompt.rendered;
    t.scores = ev.result.scores;
    t.reward = ev.reward;
    t.best_so_far = out.best_reward;
    t.phase = phase;
    t.wall_ms = std::chrono::duration<double, std::milli>(stop - start).count();
    t.error = ev.error;
    out.trace.push_back(std::move(t));
    return improved;
  };
  const auto remaining = [&] {
    return std::find(evaluated.begin(), evaluated.end(), false) != evaluated.end();
  };

  // Init phase.
  const std::string manual = prompt::manual_prompt_word(scenario.objective);
  if (const auto mp = vocab.find(manual)) run(*mp, Phase::init);
  Rng rng(derive_seed(config.rng_seed, "init"));
  for (int k = 0; k < config.init_random && evaluations < config.budget && remaining(); ++k) {
    std::vector<std::size_t> open;
    for (std::size_t i = 0; i < vocab.size(); ++i) {
      if (!evaluated[i]) open.push_back(i);
    }
    run(open[rng.index(open.size())], Phase::init);
  }

  // BO phase.
  int stale = 0;
  std::uint64_t round = 0;
  while (evaluations < config.budget && remaining()) {
    std::size_t next = 0;
    if (observed.empty()) {
      // Prior EI is identical everywhere; the tie rule picks the smallest word.
      next = smallest_word(vocab, candidate_set(vocab, evaluated, config, round));
    } else {
      // Standardise rewards; EI is evaluated in standardised units.
      const double n = static_cast<double>(rewards.size());
      const double mean = std::accumulate(rewards.begin(), rewards.end(), 0.0) / n;
      double var = 0.0;
      for (double r : rewards) var += (r - mean) * (r - mean);
      double sd = std::sqrt(var / n);
      if (!(sd > 1e-12)) sd = 1.0;

      Eigen::MatrixXd X(static_cast<Eigen::Index>(observed.size()), static_cast<Eigen::Index>(vocab.dim()));
      Eigen::VectorXd z(static_cast<Eigen::Index>(observed.size()));
      double best_z = kNegInf;
      for (std::size_t r = 0; r < observed.size(); ++r) {
        const auto v = vocab.vector(observed[r]);
        for (std::size_t c = 0; c < v.size(); ++c) {
          X(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = v[c];
        }
        z(static_cast<Eigen::Index>(r)) = (rewards[r] - mean) / sd;
        best_z = std::max(best_z, z(static_cast<Eigen::Index>(r)));
      }
      const GaussianProcess gp = GaussianProcess::fit(X, z, hyper);
      next = select_next(gp, vocab, evaluated, best_z, config, round);
    }
    ++round;
    if (run(next, Phase::bo)) {
      stale = 0;
    } else if (++stale >= config.patience) {
      break;
    }
  }

  if (best_eval == nullptr) {
    throw Error(fmt::format("record {}: every trigger evaluation failed", evaluator.task().record_id));
  }
  out.best_prompt = best_eval->prompt;
  out.best_result = best_eval->result;
  return out;
}

std::string_view to_string(Phase p) { return p == Phase::init ? "init" : "bo"; }

void write_trace(std::ostream& out, const std::string& record_id,
                 const std::vector<TraceEntry>& trace, bool include_timing) {
  const auto number_or_null = [](double v) -> nlohmann::json {
    if (std::isfinite(v)) return v;
    return nullptr;
  };
  for (const auto& t : trace) {
    nlohmann::ordered_json j;
    j["record_id"] = record_id;
    j["iteration"] = t.iteration;
    j["phase"] = to_string(t.phase);
    j["trigger"] = t.trigger;
    j["prompt"] = t.prompt;
    j["scores"] = {{"safe", t.scores.safe}, {"beauty", t.scores.beauty}, {"lively", t.scores.lively}};
    j["reward"] = number_or_null(t.reward);
    j["best_so_far"] = number_or_null(t.best_so_far);
    if (!t.error.empty()) j["error"] = t.error;
    if (include_timing) j["wall_ms"] = t.wall_ms;
    out << j.dump() << '\n';
  }
}

}  // namespace renewal::bo
