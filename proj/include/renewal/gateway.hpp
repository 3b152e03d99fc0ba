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

#include <atomic>
#include <cstdint>
#include <memory>
#include <string>

#include "renewal/perception_metrics.hpp"

namespace renewal::gateway {

using perception::PerceptionScores;

struct EditParams {
  double guidance_scale = 7.5;
  int steps = 30;
};

// One inpainting request. `record_id` and `trigger` are routing tags for
// backends that need them (the synthetic oracle); they are not sent over
// the wire and are not part of the cache key.
struct EditRequest {
  std::string image;  // encoded PNG
  std::string mask;   // encoded single-channel 8-bit PNG, same size
  std::string prompt;
  std::uint64_t seed = 0;
  EditParams params;
  std::string record_id;
  std::string trigger;
};

struct ScoreRequest {
  std::string image;
  std::string record_id;
};

struct EvaluationResult {
  std::string edited_image;
  PerceptionScores scores;
  std::string model_id;
  bool cache_hit = false;
};

/// Rejects a request locally: undecodable rasters, size mismatch, a mask
/// that is not single-channel 8-bit, empty prompt, non-positive steps.
/// Throws DimensionMismatch or InvalidArgument.
void validate_request(const EditRequest& request);

// The boundary through which images are edited and scored. Implementations
// must be safe to call from several threads at once.
class Backend {
 public:
  virtual ~Backend() = default;
  virtual EvaluationResult edit_and_score(const EditRequest& request) = 0;
  virtual PerceptionScores score_raw(const ScoreRequest& request) = 0;
  virtual std::string describe() const = 0;
};

/// Composes a backend with an edit request; free-function form.
inline EvaluationResult edit_and_score(const EditRequest& request, Backend& backend) {
  return backend.edit_and_score(request);
}

inline PerceptionScores score_raw(const ScoreRequest& request, Backend& backend) {
  return backend.score_raw(request);
}

/// Pass-through decorator that counts calls reaching the inner backend.
class CountingBackend final : public Backend {
 public:
  explicit CountingBackend(std::shared_ptr<Backend> inner) : inner_(std::move(inner)) {}

  EvaluationResult edit_and_score(const EditRequest& request) override {
    edits_.fetch_add(1, std::memory_order_relaxed);
    return inner_->edit_and_score(request);
  }
  PerceptionScores score_raw(const ScoreRequest& request) override {
    scores_.fetch_add(1, std::memory_order_relaxed);
    return inner_->score_raw(request);
  }
  std::string describe() const override { return inner_->describe(); }

  std::uint64_t edit_calls() const { return edits_.load(); }
  std::uint64_t score_calls() const { return scores_.load(); }
  std::uint64_t total_calls() const { return edit_calls() + score_calls(); }
  void reset() {
    edits_ = 0;
    scores_ = 0;
  }

 private:
  std::shared_ptr<Backend> inner_;
  std::atomic<std::uint64_t> edits_{0};
  std::atomic<std::uint64_t> scores_{0};
};

}  // namespace renewal::gateway
