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

#include <chrono>
#include <string>
#include <utility>
#include <vector>

#include "renewal/gateway.hpp"

namespace renewal::gateway {

// HTTP client for the model service.
//
//   POST /v1/edit   {"image_b64","mask_b64","prompt","seed","params":{"guidance_scale","steps"}}
//                   -> 200 {"image_b64","model_id"}; 400 malformed; 422 size mismatch; 503 busy
//   POST /v1/score  {"image_b64"} -> 200 {"safe","beauty","lively","model_id"}
//   GET  /v1/health -> 200 {"status":"ok"}
//
// Connection failures and 503 are retried with the configured backoff; any
// other non-200 status or malformed body is a ProtocolError.
struct RemoteOptions {
  std::string base_url = "http://127.0.0.1:8080";
  std::chrono::milliseconds connect_timeout{5000};
  std::chrono::milliseconds read_timeout{600000};
  std::vector<std::chrono::milliseconds> retry_delays{std::chrono::milliseconds(500),
                                                      std::chrono::milliseconds(2000),
                                                      std::chrono::milliseconds(8000)};
};

class RemoteBackend final : public Backend {
 public:
  explicit RemoteBackend(RemoteOptions options);

  EvaluationResult edit_and_score(const EditRequest& request) override;
  PerceptionScores score_raw(const ScoreRequest& request) override;
  std::string describe() const override;

  /// GET /v1/health; false on any transport or protocol failure.
  bool healthy() const;

  /// Exact request bodies the client sends.
  static std::string serialize_edit(const EditRequest& request);
  static std::string serialize_score(std::string_view image);

  /// Total HTTP attempts made, including retries.
  std::uint64_t attempts() const { return attempts_.load(); }

 private:
  std::string post(const std::string& path, const std::string& body) const;
  std::pair<PerceptionScores, std::string> score_image(const std::string& image) const;

  RemoteOptions options_;
  mutable std::atomic<std::uint64_t> attempts_{0};
};

}  // namespace renewal::gateway
