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
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace renewal::embedding {

/// Word-vector vocabulary: the discrete search space for trigger words.
///
/// Immutable once built. Lookup is case-insensitive; the spelling of the
/// first occurrence is kept for display.
class Vocabulary {
 public:
  Vocabulary() = default;

  /// `data` holds words.size() * dim values, row-major. Throws
  /// DimensionMismatch, ZeroNorm or InvalidArgument. Case-folded duplicates
  /// after the first are dropped and counted.
  Vocabulary(std::vector<std::string> words, std::vector<double> data, std::size_t dim,
             bool normalize);

  std::size_t size() const { return words_.size(); }
  bool empty() const { return words_.empty(); }
  std::size_t dim() const { return dim_; }
  bool normalized() const { return normalized_; }
  std::size_t duplicates_dropped() const { return duplicates_dropped_; }

  const std::string& word(std::size_t i) const { return words_.at(i); }
  const std::vector<std::string>& words() const { return words_; }
  std::span<const double> vector(std::size_t i) const;
  double norm(std::size_t i) const { return norms_.at(i); }

  std::optional<std::size_t> find(std::string_view word) const;
  /// Throws UnknownWord.
  std::size_t index_of(std::string_view word) const;
  bool contains(std::string_view word) const { return find(word).has_value(); }

 private:
  std::vector<std::string> words_;
  std::vector<double> data_;
  std::vector<double> norms_;
  std::unordered_map<std::string, std::size_t> index_;
  std::size_t dim_ = 0;
  bool normalized_ = false;
  std::size_t duplicates_dropped_ = 0;
};

struct NeighborResult {
  std::string word;
  double similarity = 0.0;
};

/// Parses the "count dim" / "word v1 ... vdim" text format.
Vocabulary load_vocabulary(std::istream& in, bool normalize);
Vocabulary load_vocabulary_file(const std::filesystem::path& path, bool normalize);

/// Writes `vocab` back in the text format with fixed 6-decimal components.
void write_vocabulary(std::ostream& out, const Vocabulary& vocab);

/// Cosine similarity clamped to [-1, 1]. Throws DimensionMismatch / ZeroNorm.
double cosine_similarity(std::span<const double> a, std::span<const double> b);

/// Top-k words by cosine similarity to `query`, ties by ascending word.
/// Requires 1 <= k <= |vocab|; with exclude_self at most |vocab| - 1 results.
std::vector<NeighborResult> nearest_neighbors(const Vocabulary& vocab, std::string_view query,
                                              std::size_t k, bool exclude_self);

// Synthetic vocabularies for fixtures and acceptance runs. Points lie on a
// low-dimensional unit sphere rotated into `dim` dimensions with a little
// isotropic noise, which gives the smooth neighbourhood structure real
// embeddings have at a fraction of the size.
struct ManifoldSpec {
  std::size_t count = 2000;
  std::size_t dim = 50;
  std::size_t latent_dim = 3;
  double noise = 0.002;
  std::uint64_t seed = 1;
  /// Placed first; remaining slots are named w00000, w00001, ...
  std::vector<std::string> named_words;
};

Vocabulary make_manifold_vocabulary(const ManifoldSpec& spec);

}  // namespace renewal::embedding
