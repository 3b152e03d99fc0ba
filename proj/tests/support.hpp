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

// Shared helpers for the test executables.

#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <map>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <fmt/format.h>

#include "renewal/embedding_store.hpp"
#include "renewal/image.hpp"

namespace renewal::testing {

// Unique scratch directory, removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("renewal-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& p) const { return path_ / p; }

 private:
  std::filesystem::path path_;
};

inline std::string gray_png(std::uint32_t w, std::uint32_t h, std::uint8_t value = 255) {
  std::vector<std::uint8_t> px(static_cast<std::size_t>(w) * h, value);
  return image::encode_png(w, h, 1, px);
}

inline std::string rgb_png(std::uint32_t w, std::uint32_t h, std::uint8_t seed = 0) {
  std::vector<std::uint8_t> px(static_cast<std::size_t>(w) * h * 3);
  for (std::size_t i = 0; i < px.size(); ++i) px[i] = static_cast<std::uint8_t>(i * 31 + seed);
  return image::encode_png(w, h, 3, px);
}

inline embedding::Vocabulary make_vocab(const std::vector<std::pair<std::string, std::vector<double>>>& rows,
                                        bool normalize = false) {
  std::vector<std::string> words;
  std::vector<double> data;
  const std::size_t dim = rows.empty() ? 2 : rows.front().second.size();
  for (const auto& [w, v] : rows) {
    words.push_back(w);
    data.insert(data.end(), v.begin(), v.end());
  }
  return embedding::Vocabulary(std::move(words), std::move(data), dim, normalize);
}

// Gaussian random vocabulary "g00000".. with the given dimension.
inline embedding::Vocabulary random_vocab(std::size_t count, std::size_t dim, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> n(0.0, 1.0);
  std::vector<std::string> words;
  std::vector<double> data;
  for (std::size_t i = 0; i < count; ++i) {
    words.push_back(fmt::format("g{:05}", i));
    for (std::size_t d = 0; d < dim; ++d) data.push_back(n(gen));
  }
  return embedding::Vocabulary(std::move(words), std::move(data), dim, false);
}

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

// Relative path -> contents for every regular file under `dir`.
inline std::map<std::string, std::string> snapshot(const std::filesystem::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& e : std::filesystem::recursive_directory_iterator(dir)) {
    if (e.is_regular_file()) out[std::filesystem::relative(e.path(), dir).generic_string()] = slurp(e.path());
  }
  return out;
}

// A loopback port with nothing listening on it (bound, then closed).
inline int unused_port() {
  const int fd = ::socket(AF_INET, SOCK_STREAM, 0);
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
  addr.sin_port = 0;
  socklen_t len = sizeof(addr);
  ::bind(fd, reinterpret_cast<sockaddr*>(&addr), sizeof(addr));
  ::getsockname(fd, reinterpret_cast<sockaddr*>(&addr), &len);
  ::close(fd);
  return ntohs(addr.sin_port);
}

}  // namespace renewal::testing
