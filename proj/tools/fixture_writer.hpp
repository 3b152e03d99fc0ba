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
#include <filesystem>
#include <string>
#include <vector>

namespace renewal::fixtures {

// A self-contained run directory: vocab.txt, oracle.json, config.json,
// manifest.jsonl, images/ and masks/.
struct FixtureSpec {
  std::size_t records = 8;
  std::size_t vocab_size = 120;
  std::uint64_t seed = 7;
  std::uint32_t width = 64;
  std::uint32_t height = 48;
  /// Every n-th record (1-based) has no detected disorder; 0 disables.
  std::size_t no_upd_every = 8;
  /// One image/mask pair shared by all records (large manifests).
  bool shared_images = false;
  std::string optimum_word = "Tyne";
  int budget = 20;
  std::size_t workers = 2;
};

/// Words placed at the front of every fixture vocabulary.
const std::vector<std::string>& fixture_words();

/// hw_ratio used for record i; cycles through every morphology bucket.
double fixture_hw_ratio(std::size_t i);

void write_fixture_set(const std::filesystem::path& dir, const FixtureSpec& spec);

}  // namespace renewal::fixtures
