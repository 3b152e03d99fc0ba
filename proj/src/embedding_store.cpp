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

#include "renewal/embedding_store.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "renewal/common.hpp"
#include "renewal/hashing.hpp"

namespace renewal::embedding {

namespace {

double l2_norm(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t' && line[j] != '\r') ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

template <typename T>
bool parse_number(std::string_view s, T& out) {
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

}  // namespace

Vocabulary::Vocabulary(std::vector<std::string> words, std::vector<double> data, std::size_t dim,
                       bool normalize)
    : dim_(dim), normalized_(normalize) {
  if (dim < 2) throw InvalidArgument("vocabulary dimension must be at least 2");
  if (data.size() != words.size() * dim) {
    throw DimensionMismatch(fmt::format("vocabulary holds {} values for {} words of dimension {}",
                                        data.size(), words.size(), dim));
  }
  words_.reserve(words.size());
  data_.reserve(data.size());
  norms_.reserve(words.size());
  for (std::size_t i = 0; i < words.size(); ++i) {
    if (words[i].empty()) throw InvalidArgument("empty word in vocabulary");
    std::string key = fold_case(words[i]);
    if (index_.contains(key)) {
      ++duplicates_dropped_;
      continue;
    }
    std::span<const double> row(data.data() + i * dim, dim);
    const double n = l2_norm(row);
    if (!(n > 0.0) || !std::isfinite(n)) {
      throw ZeroNorm(fmt::format("word '{}' has a zero or non-finite vector", words[i]));
    }
    for (double x : row) data_.push_back(normalize ? x / n : x);
    norms_.push_back(normalize ? l2_norm({data_.data() + data_.size() - dim, dim}) : n);
    index_.emplace(std::move(key), words_.size());
    words_.push_back(std::move(words[i]));
  }
  if (duplicates_dropped_ > 0) {
    spdlog::warn("vocabulary: dropped {} case-folded duplicate word(s)", duplicates_dropped_);
  }
}

std::span<const double> Vocabulary::vector(std::size_t i) const {
  if (i >= words_.size()) throw InvalidArgument("vocabulary index out of range");
  return {data_.data() + i * dim_, dim_};
}

std::optional<std::size_t> Vocabulary::find(std::string_view word) const {
  const auto it = index_.find(fold_case(word));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::size_t Vocabulary::index_of(std::string_view word) const {
  if (auto i = find(word)) return *i;
  throw UnknownWord(fmt::format("'{}' is not in the vocabulary", word));
}

Vocabulary load_vocabulary(std::istream& in, bool normalize) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError("vocabulary: missing header line");
  const auto header = split_ws(line);
  std::size_t count = 0;
  std::size_t dim = 0;
  if (header.size() != 2 || !parse_number(header[0], count) || !parse_number(header[1], dim) ||
      dim < 2) {
    throw ParseError(fmt::format("vocabulary: malformed header '{}'", line));
  }

  std::vector<std::string> words;
  std::vector<double> data;
  words.reserve(count);
  data.reserve(count * dim);
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    const auto fields = split_ws(line);
    if (fields.empty()) continue;
    if (words.size() == count) {
      throw ParseError(fmt::format("vocabulary: more than {} entries (line {})", count, line_no));
    }
    if (fields.size() != dim + 1) {
      throw DimensionMismatch(fmt::format("vocabulary line {}: expected {} components, found {}",
                                          line_no, dim, fields.size() - 1));
    }
    words.emplace_back(fields[0]);
    for (std::size_t k = 1; k <= dim; ++k) {
      double v = 0.0;
      if (!parse_number(fields[k], v) || !std::isfinite(v)) {
        throw ParseError(fmt::format("vocabulary line {}: bad component '{}'", line_no, fields[k]));
      }
      data.push_back(v);
    }
  }
  if (words.size() != count) {
    throw ParseError(
        fmt::format("vocabulary: header declares {} entries, found {}", count, words.size()));
  }
  return Vocabulary(std::move(words), std::move(data), dim, normalize);
}

Vocabulary load_vocabulary_file(const std::filesystem::path& path, bool normalize) {
  std::ifstream in(path);
  if (!in) throw ParseError(fmt::format("cannot open vocabulary '{}'", path.string()));
  return load_vocabulary(in, normalize);
}

void write_vocabulary(std::ostream& out, const Vocabulary& vocab) {
  out << vocab.size() << ' ' << vocab.dim() << '\n';
  for (std::size_t i = 0; i < vocab.size(); ++i) {
    out << vocab.word(i);
    for (double x : vocab.vector(i)) out << ' ' << fmt::format("{:.6f}", x);
    out << '\n';
  }
}

double cosine_similarity(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw DimensionMismatch(fmt::format("cosine_similarity: {} vs {}", a.size(), b.size()));
  }
  const double na = l2_norm(a);
  const double nb = l2_norm(b);
  if (!(na > 0.0) || !(nb > 0.0)) throw ZeroNorm("cosine_similarity: zero-norm input");
  return std::clamp(dot(a, b) / (na * nb), -1.0, 1.0);
}

std::vector<NeighborResult> nearest_neighbors(const Vocabulary& vocab, std::string_view query,
                                              std::size_t k, bool exclude_self) {
  const std::size_t q = vocab.index_of(query);
  if (k < 1 || k > vocab.size()) {
    throw InvalidArgument(fmt::format("nearest_neighbors: k={} outside [1, {}]", k, vocab.size()));
  }
  const auto qv = vocab.vector(q);
  const double qn = vocab.norm(q);

  struct Scored {
    std::size_t index;
    double similarity;
  };
  std::vector<Scored> scored;
  scored.reserve(vocab.size());
  for (std::size_t i = 0; i < vocab.size(); ++i) {
    if (exclude_self && i == q) continue;
    const double s = std::clamp(dot(qv, vocab.vector(i)) / (qn * vocab.norm(i)), -1.0, 1.0);
    scored.push_back({i, s});
  }
  const std::size_t take = std::min(k, scored.size());
  const auto better = [&](const Scored& a, const Scored& b) {
    if (a.similarity != b.similarity) return a.similarity > b.similarity;
    return vocab.word(a.index) < vocab.word(b.index);
  };
  std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(take),
                    scored.end(), better);

  std::vector<NeighborResult> out;
  out.reserve(take);
  for (std::size_t i = 0; i < take; ++i) {
    out.push_back({vocab.word(scored[i].index), scored[i].similarity});
  }
  return out;
}

Vocabulary make_manifold_vocabulary(const ManifoldSpec& spec) {
  if (spec.latent_dim < 2 || spec.latent_dim > spec.dim) {
    throw InvalidArgument("manifold latent dimension must be in [2, dim]");
  }
  if (spec.named_words.size() > spec.count) {
    throw InvalidArgument("more named words than vocabulary slots");
  }
  Rng rng(spec.seed);

  // Orthonormal embedding of the latent sphere (Gram-Schmidt on Gaussian columns).
  std::vector<std::vector<double>> basis;
  while (basis.size() < spec.latent_dim) {
    std::vector<double> col(spec.dim);
    for (double& x : col) x = rng.normal();
    for (const auto& b : basis) {
      const double p = dot(col, b);
      for (std::size_t i = 0; i < spec.dim; ++i) col[i] -= p * b[i];
    }
    const double n = l2_norm(col);
    if (n < 1e-8) continue;
    for (double& x : col) x /= n;
    basis.push_back(std::move(col));
  }

  std::vector<std::string> words;
  std::vector<double> data;
  words.reserve(spec.count);
  data.reserve(spec.count * spec.dim);
  std::vector<double> latent(spec.latent_dim);
  std::vector<double> point(spec.dim);
  for (std::size_t w = 0; w < spec.count; ++w) {
    double ln = 0.0;
    do {
      for (double& x : latent) x = rng.normal();
      ln = l2_norm(latent);
    } while (ln < 1e-8);
    std::fill(point.begin(), point.end(), 0.0);
    for (std::size_t a = 0; a < spec.latent_dim; ++a) {
      for (std::size_t i = 0; i < spec.dim; ++i) point[i] += latent[a] / ln * basis[a][i];
    }
    for (double& x : point) x += spec.noise * rng.normal();
    data.insert(data.end(), point.begin(), point.end());
    words.push_back(w < spec.named_words.size()
                        ? spec.named_words[w]
                        : fmt::format("w{:05d}", w - spec.named_words.size()));
  }
  return Vocabulary(std::move(words), std::move(data), spec.dim, true);
}

}  // namespace renewal::embedding
