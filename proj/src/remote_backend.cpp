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

#include "renewal/remote_backend.hpp"

#include <thread>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "httplib.h"
#include "json.hpp"

#include "renewal/hashing.hpp"
#include "renewal/image.hpp"

namespace renewal::gateway {

namespace {

using nlohmann::json;

json parse_body(const std::string& body, std::string_view endpoint) {
  json j = json::parse(body, nullptr, false);
  if (j.is_discarded() || !j.is_object()) {
    throw ProtocolError(fmt::format("{}: response is not a JSON object", endpoint));
  }
  return j;
}

const json& require(const json& j, const char* key, json::value_t type, std::string_view endpoint) {
  const auto it = j.find(key);
  const bool numeric_ok = type == json::value_t::number_float && it != j.end() && it->is_number();
  if (it == j.end() || (!numeric_ok && it->type() != type)) {
    throw ProtocolError(fmt::format("{}: missing or mistyped field '{}'", endpoint, key));
  }
  return *it;
}

std::string decode_image(const json& j, std::string_view endpoint) {
  std::string bytes;
  try {
    bytes = base64_decode(require(j, "image_b64", json::value_t::string, endpoint).get<std::string>());
    image::inspect_png(bytes);
  } catch (const ParseError& e) {
    throw ProtocolError(fmt::format("{}: bad image payload ({})", endpoint, e.what()));
  }
  return bytes;
}

std::string decode_model_id(const json& j, std::string_view endpoint) {
  auto id = require(j, "model_id", json::value_t::string, endpoint).get<std::string>();
  if (id.empty()) throw ProtocolError(fmt::format("{}: empty model_id", endpoint));
  return id;
}

}  // namespace

RemoteBackend::RemoteBackend(RemoteOptions options) : options_(std::move(options)) {
  if (options_.base_url.empty()) throw InvalidArgument("remote backend needs a base URL");
}

std::string RemoteBackend::serialize_edit(const EditRequest& request) {
  json j;
  j["image_b64"] = base64_encode(request.image);
  j["mask_b64"] = base64_encode(request.mask);
  j["prompt"] = request.prompt;
  j["seed"] = request.seed;
  j["params"] = {{"guidance_scale", request.params.guidance_scale},
                 {"steps", request.params.steps}};
  return j.dump();
}

std::string RemoteBackend::serialize_score(std::string_view image) {
  json j;
  j["image_b64"] = base64_encode(image);
  return j.dump();
}

std::string RemoteBackend::post(const std::string& path, const std::string& body) const {
  std::string last_error;
  const std::size_t max_attempts = options_.retry_delays.size() + 1;
  for (std::size_t attempt = 0; attempt < max_attempts; ++attempt) {
    if (attempt > 0) std::this_thread::sleep_for(options_.retry_delays[attempt - 1]);
    attempts_.fetch_add(1, std::memory_order_relaxed);

    httplib::Client client(options_.base_url);
    client.set_connection_timeout(options_.connect_timeout);
    client.set_read_timeout(options_.read_timeout);
    auto res = client.Post(path, body, "application/json");
    if (!res) {
      last_error = fmt::format("POST {}: {}", path, httplib::to_string(res.error()));
      spdlog::warn("{} (attempt {}/{})", last_error, attempt + 1, max_attempts);
      continue;
    }
    switch (res->status) {
      case 200:
        return res->body;
      case 503:
        last_error = fmt::format("POST {}: model unavailable (503)", path);
        spdlog::warn("{} (attempt {}/{})", last_error, attempt + 1, max_attempts);
        continue;
      case 422:
        throw DimensionMismatch(fmt::format("POST {}: service rejected mask dimensions (422)", path));
      case 400:
        throw ProtocolError(fmt::format("POST {}: service rejected request as malformed (400)", path));
      default:
        throw ProtocolError(fmt::format("POST {}: unexpected status {}", path, res->status));
    }
  }
  throw TransportError(last_error);
}

EvaluationResult RemoteBackend::edit_and_score(const EditRequest& request) {
  validate_request(request);

  const json edit = parse_body(post("/v1/edit", serialize_edit(request)), "/v1/edit");
  EvaluationResult result;
  result.edited_image = decode_image(edit, "/v1/edit");
  const std::string edit_model = decode_model_id(edit, "/v1/edit");

  const auto edited_info = image::inspect_png(result.edited_image);
  const auto input_info = image::inspect_png(request.image);
  if (edited_info.width != input_info.width || edited_info.height != input_info.height) {
    throw ProtocolError("/v1/edit: edited image size differs from the input");
  }

  auto [scores, score_model] = score_image(result.edited_image);
  result.scores = scores;
  result.model_id = edit_model + "+" + score_model;
  return result;
}

std::pair<PerceptionScores, std::string> RemoteBackend::score_image(const std::string& image) const {
  try {
    image::inspect_png(image);
  } catch (const ParseError& e) {
    throw InvalidArgument(fmt::format("score request image does not decode: {}", e.what()));
  }
  const json j = parse_body(post("/v1/score", serialize_score(image)), "/v1/score");
  PerceptionScores s;
  for (Metric m : kAllMetrics) {
    const std::string key(to_string(m));
    s.get(m) = require(j, key.c_str(), json::value_t::number_float, "/v1/score").get<double>();
  }
  std::string model = decode_model_id(j, "/v1/score");
  perception::check_scores(s);
  return {s, std::move(model)};
}

PerceptionScores RemoteBackend::score_raw(const ScoreRequest& request) {
  return score_image(request.image).first;
}

std::string RemoteBackend::describe() const { return fmt::format("remote {}", options_.base_url); }

bool RemoteBackend::healthy() const {
  httplib::Client client(options_.base_url);
  client.set_connection_timeout(options_.connect_timeout);
  client.set_read_timeout(options_.connect_timeout);
  auto res = client.Get("/v1/health");
  if (!res || res->status != 200) return false;
  const json j = json::parse(res->body, nullptr, false);
  return j.is_object() && j.value("status", "") == "ok";
}

}  // namespace renewal::gateway
