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

#include "renewal/synthetic_oracle.hpp"

#include <cmath>

#include <fmt/format.h>

#include "renewal/hashing.hpp"
#include "renewal/image.hpp"

namespace renewal::gateway {

void validate_request(const EditRequest& request) {
  if (request.prompt.empty()) throw InvalidArgument("edit request has an empty prompt");
  if (request.params.steps <= 0) throw InvalidArgument("edit request needs steps > 0");
  if (!std::isfinite(request.params.guidance_scale)) {
    throw InvalidArgument("edit request guidance_scale must be finite");
  }
  const auto img = image::inspect_png(request.image);
  const auto mask = image::inspect_png(request.mask);
  if (img.width != mask.width || img.height != mask.height) {
    throw DimensionMismatch(fmt::format("mask {}x{} does not match image {}x{}", mask.width,
                                        mask.height, img.width, img.height));
  }
  if (mask.channels != 1 || mask.bit_depth != 8) {
    throw InvalidArgument(fmt::format("mask must be single-channel 8-bit (got {} channel(s), {} bit)",
                                      mask.channels, mask.bit_depth));
  }
}

void SyntheticOracleConfig::validate() const {
  if (!vocab || vocab->empty()) throw InvalidArgument("oracle needs a non-empty vocabulary");
  if (!vocab->normalized()) throw InvalidArgument("oracle vocabulary must be unit-normalized");
  if (!(amplitude > 0.0)) throw InvalidArgument("oracle amplitude must be positive");
  if (!(bandwidth > 0.0)) throw InvalidArgument("oracle bandwidth must be positive");
  if (!(base_low < base_high)) throw InvalidArgument("oracle needs base_low < base_high");
  if (!(noise_sigma >= 0.0)) throw InvalidArgument("oracle noise_sigma must be >= 0");
  if (!vocab->contains(optimum_word)) {
    throw InvalidArgument(fmt::format("oracle optimum '{}' is not in the vocabulary", optimum_word));
  }
}

std::string choose_optimum(const embedding::Vocabulary& vocab, std::uint64_t seed) {
  Rng rng(derive_seed(seed, "oracle-optimum"));
  return vocab.word(rng.index(vocab.size()));
}

double base_score(const SyntheticOracleConfig& config, std::string_view record_id, Metric metric) {
  const auto d = Sha256().update("base").update_field(record_id).update(to_string(metric)).finish();
  return config.base_low + (config.base_high - config.base_low) * unit_interval(leading_u64(d));
}

PerceptionScores base_scores(const SyntheticOracleConfig& config, std::string_view record_id) {
  return {base_score(config, record_id, Metric::safe), base_score(config, record_id, Metric::beauty),
          base_score(config, record_id, Metric::lively)};
}

double synthetic_score(const SyntheticOracleConfig& config, std::string_view record_id,
                       std::string_view trigger, Metric metric) {
  const auto& vocab = *config.vocab;
  const auto v = vocab.vector(vocab.index_of(trigger));
  const auto opt = vocab.vector(vocab.index_of(config.optimum_word));
  double dist2 = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double d = v[i] - opt[i];
    dist2 += d * d;
  }
  const double tau2 = config.bandwidth * config.bandwidth;
  double score = base_score(config, record_id, metric) + config.amplitude * std::exp(-dist2 / (2.0 * tau2));
  if (config.noise_sigma > 0.0) {
    const auto key = Sha256()
                         .update("noise")
                         .update_u64_be(config.rng_seed)
                         .update_field(record_id)
                         .update_field(fold_case(trigger))
                         .update(to_string(metric))
                         .finish();
    Rng rng(leading_u64(key));
    score += config.noise_sigma * rng.normal();
  }
  return score;
}

PerceptionScores synthetic_scores(const SyntheticOracleConfig& config, std::string_view record_id,
                                  std::string_view trigger) {
  return {synthetic_score(config, record_id, trigger, Metric::safe),
          synthetic_score(config, record_id, trigger, Metric::beauty),
          synthetic_score(config, record_id, trigger, Metric::lively)};
}

SyntheticOracleConfig load_oracle_config(const nlohmann::json& j,
                                         std::shared_ptr<const embedding::Vocabulary> vocab) {
  if (!j.is_object()) throw ParseError("oracle config must be a JSON object");
  SyntheticOracleConfig c;
  c.vocab = std::move(vocab);
  try {
    c.amplitude = j.value("amplitude", c.amplitude);
    c.bandwidth = j.value("bandwidth", c.bandwidth);
    c.base_low = j.value("base_low", c.base_low);
    c.base_high = j.value("base_high", c.base_high);
    c.noise_sigma = j.value("noise_sigma", c.noise_sigma);
    c.rng_seed = j.value("rng_seed", c.rng_seed);
    if (j.contains("optimum_word") && !j["optimum_word"].is_null()) {
      c.optimum_word = j["optimum_word"].get<std::string>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(fmt::format("oracle config: {}", e.what()));
  }
  if (c.optimum_word.empty() && c.vocab && !c.vocab->empty()) {
    c.optimum_word = choose_optimum(*c.vocab, c.rng_seed);
  }
  c.validate();
  return c;
}

SyntheticOracle::SyntheticOracle(SyntheticOracleConfig config) : config_(std::move(config)) {
  config_.validate();
}

EvaluationResult SyntheticOracle::edit_and_score(const EditRequest& request) {
  validate_request(request);
  EvaluationResult r;
  r.scores = synthetic_scores(config_, request.record_id, request.trigger);
  r.edited_image = request.image;
  r.model_id = std::string(kOracleModelId);
  return r;
}

PerceptionScores SyntheticOracle::score_raw(const ScoreRequest& request) {
  image::inspect_png(request.image);
  return base_scores(config_, request.record_id);
}

std::string SyntheticOracle::describe() const {
  return fmt::format("synthetic oracle (|V|={}, A={}, tau={})", config_.vocab->size(),
                     config_.amplitude, config_.bandwidth);
}

ScanResult scan_vocabulary(const SyntheticOracleConfig& config, std::string_view record_id,
                           const perception::RewardSpec& spec) {
  config.validate();
  const PerceptionScores raw = base_scores(config, record_id);
  const auto& vocab = *config.vocab;
  ScanResult out;
  out.rows.reserve(vocab.size());
  for (std::size_t i = 0; i < vocab.size(); ++i) {
    ScanRow row;
    row.word = vocab.word(i);
    row.scores = synthetic_scores(config, record_id, row.word);
    row.reward = perception::reward(raw, row.scores, spec);
    out.rows.push_back(std::move(row));
  }
  for (std::size_t i = 1; i < out.rows.size(); ++i) {
    const auto& best = out.rows[out.argmax];
    if (out.rows[i].reward > best.reward ||
        (out.rows[i].reward == best.reward && out.rows[i].word < best.word)) {
      out.argmax = i;
    }
  }
  return out;
}

}  // namespace renewal::gateway
