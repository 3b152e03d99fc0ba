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

#include "fixture_writer.hpp"

#include <array>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "json.hpp"

#include "renewal/embedding_store.hpp"
#include "renewal/hashing.hpp"
#include "renewal/image.hpp"

namespace renewal::fixtures {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

const std::vector<std::string>& fixture_words() {
  static const std::vector<std::string> words{
      "Safe",     "Beautiful", "Lively",       "Tyne",     "Werribee", "Gin_Palaces",
      "Mayor",    "Coastguards", "Wonderful",  "Vacationland", "Park",  "Gardens",
      "Building", "Wall",      "Fence",        "Vegetation", "Plaza",  "Boulevard",
      "Harbour",  "Orchard",   "Lantern",      "Mural",    "Fountain", "Arcade"};
  return words;
}

double fixture_hw_ratio(std::size_t i) {
  static constexpr std::array<double, 8> ratios{0.3, 0.5, 1.0, 1.5, 1.6, 2.4, 0.1, 0.8};
  return ratios[i % ratios.size()];
}

namespace {

std::string street_image(std::uint32_t w, std::uint32_t h, std::uint64_t seed) {
  Rng rng(seed);
  const auto tint = static_cast<std::uint8_t>(rng.index(64));
  std::vector<std::uint8_t> px(static_cast<std::size_t>(w) * h * 3);
  for (std::uint32_t y = 0; y < h; ++y) {
    for (std::uint32_t x = 0; x < w; ++x) {
      auto* p = &px[(static_cast<std::size_t>(y) * w + x) * 3];
      const bool sky = y < h / 3;
      p[0] = static_cast<std::uint8_t>(sky ? 120 + tint : 90 + (x * 97 / w));
      p[1] = static_cast<std::uint8_t>(sky ? 170 + tint / 2 : 80 + (y * 61 / h));
      p[2] = static_cast<std::uint8_t>(sky ? 230 : 70 + tint);
    }
  }
  return image::encode_png(w, h, 3, px);
}

// Lower-middle band: where a wall or hedge would sit.
std::string band_mask(std::uint32_t w, std::uint32_t h) {
  std::vector<std::uint8_t> px(static_cast<std::size_t>(w) * h, 0);
  for (std::uint32_t y = h / 2; y < h * 5 / 6; ++y) {
    for (std::uint32_t x = w / 8; x < w * 7 / 8; ++x) px[static_cast<std::size_t>(y) * w + x] = 255;
  }
  return image::encode_png(w, h, 1, px);
}

void write_text(const fs::path& path, const std::string& text) { image::write_file_atomic(path, text); }

}  // namespace

void write_fixture_set(const fs::path& dir, const FixtureSpec& spec) {
  fs::create_directories(dir);

  embedding::ManifoldSpec ms;
  ms.count = spec.vocab_size;
  ms.seed = spec.seed;
  ms.named_words = fixture_words();
  if (ms.named_words.size() > ms.count) ms.named_words.resize(ms.count);
  const auto vocab = embedding::make_manifold_vocabulary(ms);
  std::ostringstream vs;
  embedding::write_vocabulary(vs, vocab);
  write_text(dir / "vocab.txt", vs.str());

  ordered_json oracle;
  oracle["optimum_word"] = spec.optimum_word;
  oracle["amplitude"] = 4.0;
  oracle["bandwidth"] = 0.35;
  oracle["base_low"] = 3.0;
  oracle["base_high"] = 6.0;
  oracle["noise_sigma"] = 0.0;
  oracle["rng_seed"] = spec.seed;
  write_text(dir / "oracle.json", oracle.dump(2) + "\n");

  ordered_json config;
  config["vocabulary"] = "vocab.txt";
  config["backend"] = {{"type", "oracle"}, {"oracle", "oracle.json"}};
  config["cache_dir"] = "cache";
  config["manifest"] = "manifest.jsonl";
  config["output_dir"] = "results";
  config["seed"] = spec.seed;
  config["workers"] = spec.workers;
  config["optimizer"] = {{"budget", spec.budget}, {"patience", 10}, {"init_random", 4}};
  write_text(dir / "config.json", config.dump(2) + "\n");

  static constexpr std::array<const char*, 4> scenarios{"NI", "BR", "GSE", "CG"};
  const std::string mask = band_mask(spec.width, spec.height);
  std::string manifest;
  for (std::size_t i = 0; i < spec.records; ++i) {
    const std::string id = fmt::format("r{:03d}", i + 1);
    const char* scenario = scenarios[i % scenarios.size()];
    const bool upd = spec.no_upd_every == 0 || (i + 1) % spec.no_upd_every != 0;
    const std::string stem = spec.shared_images ? "street" : id;

    const fs::path image_rel = fs::path("images") / (stem + ".png");
    const fs::path mask_rel = fs::path("masks") / (stem + ".png");
    if (!spec.shared_images || i == 0) {
      image::write_file_atomic(dir / image_rel, street_image(spec.width, spec.height, spec.seed + i));
      image::write_file_atomic(dir / mask_rel, mask);
    }

    std::string factor;
    switch (i % scenarios.size()) {
      case 0:
        factor = (i / scenarios.size()) % 2 == 0 ? "Wall" : "Fence";
        break;
      case 1:
        factor = "Building";
        break;
      default:
        factor = "Vegetation";
    }

    ordered_json r;
    r["id"] = id;
    r["image"] = image_rel.generic_string();
    r["upd_detected"] = upd;
    r["factor"] = upd ? ordered_json(factor) : ordered_json(nullptr);
    r["mask"] = upd ? ordered_json(mask_rel.generic_string()) : ordered_json(nullptr);
    r["hw_ratio"] = fixture_hw_ratio(i);
    r["scenario"] = scenario;
    manifest += r.dump() + "\n";
  }
  write_text(dir / "manifest.jsonl", manifest);
}

}  // namespace renewal::fixtures
