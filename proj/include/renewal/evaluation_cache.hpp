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
#include <filesystem>
#include <memory>
#include <optional>
#include <string>

#include "renewal/gateway.hpp"

namespace renewal::gateway {

// Content-addressed, on-disk memoization of a backend.
//
// Edit key: SHA-256 over length-prefixed image bytes, mask bytes and UTF-8
// prompt, then the big-endian seed, then the canonical params (IEEE-754 bits
// of guidance_scale, big-endian steps). Raw-score key: SHA-256 over a
// "score" domain tag, the length-prefixed record id and image bytes.
//
// Entry at <dir>/<first 2 hex>/<64 hex>:
//   "RNWC" | u64be image length | image bytes | u64be json length | json
// where json = {"model_id": ..., "scores": {"safe", "beauty", "lively"}}.
// Entries are written to a temporary file and renamed into place. An
// unreadable entry is treated as a miss and overwritten.
class CachedBackend final : public Backend {
 public:
  CachedBackend(std::shared_ptr<Backend> inner, std::filesystem::path dir);

  EvaluationResult edit_and_score(const EditRequest& request) override;
  PerceptionScores score_raw(const ScoreRequest& request) override;
  std::string describe() const override;

  static std::string edit_key(const EditRequest& request);
  static std::string score_key(const ScoreRequest& request);
  std::filesystem::path entry_path(const std::string& key) const;

  std::uint64_t hits() const { return hits_.load(); }
  std::uint64_t misses() const { return misses_.load(); }

 private:
  std::optional<EvaluationResult> load(const std::string& key) const;
  void store(const std::string& key, const EvaluationResult& result) const;

  std::shared_ptr<Backend> inner_;
  std::filesystem::path dir_;
  std::atomic<std::uint64_t> hits_{0};
  std::atomic<std::uint64_t> misses_{0};
};

std::shared_ptr<Backend> cached(std::shared_ptr<Backend> backend, std::filesystem::path dir);

}  // namespace renewal::gateway
