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

#include <filesystem>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "renewal/embedding_store.hpp"
#include "renewal/gateway.hpp"

namespace renewal::gateway {

// Deterministic stand-in for the diffusion editor plus perception scorers.
//
// Every image gets a per-metric base score B_m(id) in [base_low, base_high]
// from a hash of its record id. Editing with trigger w adds an isotropic
// Gaussian bump centred on the optimum word:
//
//   score_m = B_m(id) + A * exp(-|v(w) - v(w*)|^2 / (2 tau^2)) + noise
//
// so the reward landscape over the vocabulary has a single known peak.
struct SyntheticOracleConfig {
  std::shared_ptr<const embedding::Vocabulary> vocab;
  std::string optimum_word;
  double amplitude = 4.0;
  double bandwidth = 0.35;
  double base_low = 3.0;
  double base_high = 6.0;
  double noise_sigma = 0.0;
  std::uint64_t rng_seed = 0;

  /// Throws InvalidArgument.
  void validate() const;
};

inline constexpr std::string_view kOracleModelId = "synthetic-oracle/v1";

/// Seeded uniform choice of an optimum word.
std::string choose_optimum(const embedding::Vocabulary& vocab, std::uint64_t seed);

double base_score(const SyntheticOracleConfig& config, std::string_view record_id, Metric metric);
PerceptionScores base_scores(const SyntheticOracleConfig& config, std::string_view record_id);

/// Throws UnknownWord for triggers outside the vocabulary.
double synthetic_score(const SyntheticOracleConfig& config, std::string_view record_id,
                       std::string_view trigger, Metric metric);
PerceptionScores synthetic_scores(const SyntheticOracleConfig& config, std::string_view record_id,
                                  std::string_view trigger);

/// Reads the oracle settings file (JSON). A missing "optimum_word" is drawn
/// with choose_optimum(vocab, rng_seed).
SyntheticOracleConfig load_oracle_config(const nlohmann::json& j,
                                         std::shared_ptr<const embedding::Vocabulary> vocab);

class SyntheticOracle final : public Backend {
 public:
  explicit SyntheticOracle(SyntheticOracleConfig config);

  /// Returns the input image unchanged; the scores carry the signal.
  EvaluationResult edit_and_score(const EditRequest& request) override;
  PerceptionScores score_raw(const ScoreRequest& request) override;
  std::string describe() const override;

  const SyntheticOracleConfig& config() const { return config_; }

 private:
  SyntheticOracleConfig config_;
};

struct ScanRow {
  std::string word;
  PerceptionScores scores;
  double reward = 0.0;
};

struct ScanResult {
  std::vector<ScanRow> rows;  // vocabulary order
  std::size_t argmax = 0;     // ties resolved to the lexicographically smallest word
};

/// Exhaustive evaluation of every vocabulary word for one record.
ScanResult scan_vocabulary(const SyntheticOracleConfig& config, std::string_view record_id,
                           const perception::RewardSpec& spec);

}  // namespace renewal::gateway
