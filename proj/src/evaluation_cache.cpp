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

#include "renewal/evaluation_cache.hpp"

#include <bit>
#include <cmath>
#include <fstream>
#include <system_error>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "json.hpp"

#include "renewal/hashing.hpp"
#include "renewal/image.hpp"

namespace renewal::gateway {

namespace {

constexpr std::string_view kMagic = "RNWC";

void append_u64_be(std::string& out, std::uint64_t v) {
  for (int shift = 56; shift >= 0; shift -= 8) out.push_back(static_cast<char>((v >> shift) & 0xffU));
}

bool read_u64_be(std::string_view bytes, std::size_t& pos, std::uint64_t& v) {
  if (bytes.size() - pos < 8) return false;
  v = 0;
  for (int i = 0; i < 8; ++i) v = (v << 8) | static_cast<std::uint8_t>(bytes[pos++]);
  return true;
}

std::string encode_entry(const EvaluationResult& r) {
  nlohmann::json j;
  j["model_id"] = r.model_id;
  j["scores"] = {{"safe", r.scores.safe}, {"beauty", r.scores.beauty}, {"lively", r.scores.lively}};
  const std::string meta = j.dump();
  std::string out(kMagic);
  append_u64_be(out, r.edited_image.size());
  out += r.edited_image;
  append_u64_be(out, meta.size());
  out += meta;
  return out;
}

std::optional<EvaluationResult> decode_entry(std::string_view bytes) {
  if (bytes.substr(0, kMagic.size()) != kMagic) return std::nullopt;
  std::size_t pos = kMagic.size();
  std::uint64_t len = 0;
  if (!read_u64_be(bytes, pos, len) || len > bytes.size() - pos) return std::nullopt;
  EvaluationResult r;
  r.edited_image.assign(bytes.substr(pos, len));
  pos += len;
  if (!read_u64_be(bytes, pos, len) || len != bytes.size() - pos) return std::nullopt;
  const auto j = nlohmann::json::parse(bytes.substr(pos, len), nullptr, false);
  if (j.is_discarded() || !j.is_object() || !j.contains("scores") || !j["scores"].is_object() ||
      !j.contains("model_id") || !j["model_id"].is_string()) {
    return std::nullopt;
  }
  for (Metric m : kAllMetrics) {
    const auto it = j["scores"].find(std::string(to_string(m)));
    if (it == j["scores"].end() || !it->is_number()) return std::nullopt;
    r.scores.get(m) = it->get<double>();
    if (!std::isfinite(r.scores.get(m))) return std::nullopt;
  }
  r.model_id = j["model_id"].get<std::string>();
  return r;
}

}  // namespace

CachedBackend::CachedBackend(std::shared_ptr<Backend> inner, std::filesystem::path dir)
    : inner_(std::move(inner)), dir_(std::move(dir)) {
  if (!inner_) throw InvalidArgument("cache needs an inner backend");
  std::error_code ec;
  std::filesystem::create_directories(dir_, ec);
  if (ec || !std::filesystem::is_directory(dir_)) {
    throw InvalidArgument(fmt::format("cache directory '{}' is not writable", dir_.string()));
  }
}

std::string CachedBackend::edit_key(const EditRequest& request) {
  Sha256 h;
  h.update_field(request.image);
  h.update_field(request.mask);
  h.update_field(request.prompt);
  h.update_u64_be(request.seed);
  h.update_u64_be(std::bit_cast<std::uint64_t>(request.params.guidance_scale));
  h.update_u64_be(static_cast<std::uint64_t>(request.params.steps));
  return to_hex(h.finish());
}

std::string CachedBackend::score_key(const ScoreRequest& request) {
  return to_hex(Sha256().update("score").update_field(request.record_id).update_field(request.image).finish());
}

std::filesystem::path CachedBackend::entry_path(const std::string& key) const {
  return dir_ / key.substr(0, 2) / key;
}

std::optional<EvaluationResult> CachedBackend::load(const std::string& key) const {
  const auto path = entry_path(key);
  std::error_code ec;
  if (!std::filesystem::exists(path, ec)) return std::nullopt;
  std::string bytes;
  try {
    bytes = image::read_file(path);
  } catch (const Error& e) {
    spdlog::warn("cache: unreadable entry {} ({}); treating as miss", key, e.what());
    return std::nullopt;
  }
  auto r = decode_entry(bytes);
  if (!r) spdlog::warn("cache: corrupt entry {}; treating as miss", key);
  return r;
}

void CachedBackend::store(const std::string& key, const EvaluationResult& result) const {
  try {
    image::write_file_atomic(entry_path(key), encode_entry(result));
  } catch (const std::exception& e) {
    spdlog::warn("cache: failed to store {} ({})", key, e.what());
  }
}

EvaluationResult CachedBackend::edit_and_score(const EditRequest& request) {
  // Reject malformed requests before touching the cache or the backend.
  validate_request(request);
  const std::string key = edit_key(request);
  if (auto hit = load(key)) {
    hits_.fetch_add(1, std::memory_order_relaxed);
    hit->cache_hit = true;
    return *hit;
  }
  misses_.fetch_add(1, std::memory_order_relaxed);
  EvaluationResult r = inner_->edit_and_score(request);
  r.cache_hit = false;
  store(key, r);
  return r;
}

PerceptionScores CachedBackend::score_raw(const ScoreRequest& request) {
  const std::string key = score_key(request);
  if (auto hit = load(key)) {
    hits_.fetch_add(1, std::memory_order_relaxed);
    return hit->scores;
  }
  misses_.fetch_add(1, std::memory_order_relaxed);
  const PerceptionScores s = inner_->score_raw(request);
  store(key, EvaluationResult{"", s, "raw-score", false});
  return s;
}

std::string CachedBackend::describe() const {
  return fmt::format("{} (cached at {})", inner_->describe(), dir_.string());
}

std::shared_ptr<Backend> cached(std::shared_ptr<Backend> backend, std::filesystem::path dir) {
  return std::make_shared<CachedBackend>(std::move(backend), std::move(dir));
}

}  // namespace renewal::gateway
