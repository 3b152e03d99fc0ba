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

#include <array>
#include <cstdint>
#include <random>
#include <string>
#include <string_view>

namespace renewal {

using Digest = std::array<std::uint8_t, 32>;

// Incremental SHA-256 (OpenSSL EVP underneath).
class Sha256 {
 public:
  Sha256();
  ~Sha256();
  Sha256(const Sha256&) = delete;
  Sha256& operator=(const Sha256&) = delete;

  Sha256& update(std::string_view bytes);
  Sha256& update_u64_be(std::uint64_t v);
  /// Length-prefixed (u64 big-endian) field.
  Sha256& update_field(std::string_view bytes);
  Digest finish();

 private:
  void* ctx_;
};

Digest sha256(std::string_view bytes);
std::string to_hex(const Digest& d);
/// First 8 digest bytes read big-endian.
std::uint64_t leading_u64(const Digest& d);

/// Stable per-item seed: SHA-256 over (big-endian seed, tag).
std::uint64_t derive_seed(std::uint64_t seed, std::string_view tag);

std::string base64_encode(std::string_view bytes);
/// Throws ParseError on malformed input.
std::string base64_decode(std::string_view text);

// Deterministic RNG. Distribution code is written here rather than taken from
// <random> so draws are identical across standard library implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }
  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  /// Uniform on {0, ..., n-1}; n > 0.
  std::size_t index(std::size_t n);
  double normal();

 private:
  std::mt19937_64 engine_;
};

/// Map 64 hashed bits to [0, 1).
inline double unit_interval(std::uint64_t bits) {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

}  // namespace renewal
