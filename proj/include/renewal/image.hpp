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
#include <span>
#include <string>
#include <string_view>

namespace renewal::image {

struct RasterInfo {
  std::uint32_t width = 0;
  std::uint32_t height = 0;
  int channels = 0;
  int bit_depth = 0;
};

/// Reads the PNG header. Throws ParseError if the bytes are not a PNG.
RasterInfo inspect_png(std::string_view bytes);

/// 8-bit PNG; channels is 1 (gray), 3 (RGB) or 4 (RGBA). Pixels row-major.
std::string encode_png(std::uint32_t width, std::uint32_t height, int channels,
                       std::span<const std::uint8_t> pixels);

std::string read_file(const std::filesystem::path& path);
/// Write-to-temp then rename.
void write_file_atomic(const std::filesystem::path& path, std::string_view bytes);

}  // namespace renewal::image
