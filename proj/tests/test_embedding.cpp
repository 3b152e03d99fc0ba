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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>
#include <sstream>

#include "renewal/common.hpp"
#include "renewal/embedding_store.hpp"
#include "support.hpp"

using namespace renewal;
using namespace renewal::embedding;

namespace {

Vocabulary toy(bool normalize = true) {
  std::istringstream in("3 2\na 1 0\nb 0 1\nc 1 1\n");
  return load_vocabulary(in, normalize);
}

}  // namespace

TEST_CASE("toy vocabulary loads and normalizes") {
  const auto v = toy();
  CHECK(v.size() == 3);
  CHECK(v.dim() == 2);
  CHECK(v.normalized());
  const auto c = v.vector(v.index_of("c"));
  CHECK(c[0] == doctest::Approx(0.70710678).epsilon(1e-8));
  CHECK(c[1] == doctest::Approx(0.70710678).epsilon(1e-8));
}

TEST_CASE("loader errors") {
  SUBCASE("row with too many components") {
    std::istringstream in("2 2\na 1 0\nb 1 2 3\n");
    CHECK_THROWS_AS(load_vocabulary(in, true), DimensionMismatch);
  }
  SUBCASE("row with too few components") {
    std::istringstream in("2 3\na 1 0 0\nb 1 2\n");
    CHECK_THROWS_AS(load_vocabulary(in, true), DimensionMismatch);
  }
  SUBCASE("malformed header") {
    std::istringstream in("two 2\na 1 0\n");
    CHECK_THROWS_AS(load_vocabulary(in, true), ParseError);
  }
  SUBCASE("count mismatch") {
    std::istringstream in("3 2\na 1 0\nb 0 1\n");
    CHECK_THROWS_AS(load_vocabulary(in, true), ParseError);
  }
  SUBCASE("zero vector") {
    std::istringstream in("2 2\na 1 0\nz 0 0\n");
    CHECK_THROWS_AS(load_vocabulary(in, true), ZeroNorm);
  }
  SUBCASE("non-numeric component") {
    std::istringstream in("1 2\na 1 x\n");
    CHECK_THROWS_AS(load_vocabulary(in, true), ParseError);
  }
  SUBCASE("dimension below 2") {
    std::istringstream in("1 1\na 1\n");
    CHECK_THROWS_AS(load_vocabulary(in, true), ParseError);
  }
}

TEST_CASE("case-folded duplicates: first occurrence wins") {
  std::istringstream in("3 2\nTyne 1 0\ntyne 0 1\nMayor 1 1\n");
  const auto v = load_vocabulary(in, false);
  CHECK(v.size() == 2);
  CHECK(v.duplicates_dropped() == 1);
  CHECK(v.word(v.index_of("TYNE")) == "Tyne");
  CHECK(v.vector(v.index_of("tyne"))[0] == 1.0);
  CHECK(v.contains("mayor"));
  CHECK_THROWS_AS(v.index_of("Werribee"), UnknownWord);
}

TEST_CASE("cosine similarity") {
  const std::vector<double> a{1, 2, 3}, b{4, 5, 6};
  CHECK(cosine_similarity(a, b) == doctest::Approx(0.974632).epsilon(1e-6));
  // Independent arithmetic: 32 / sqrt(14 * 77).
  CHECK(std::abs(cosine_similarity(a, b) - 32.0 / std::sqrt(14.0 * 77.0)) < 1e-12);
  CHECK(cosine_similarity(a, a) == doctest::Approx(1.0));
  const std::vector<double> x{1, 0}, y{0, 1};
  CHECK(cosine_similarity(x, y) == 0.0);
  const std::vector<double> zero{0, 0};
  CHECK_THROWS_AS(cosine_similarity(x, zero), ZeroNorm);
  CHECK_THROWS_AS(cosine_similarity(a, x), DimensionMismatch);
}

TEST_CASE("cosine similarity is symmetric, scale invariant and bounded") {
  std::mt19937_64 gen(3);
  std::normal_distribution<double> n;
  std::uniform_real_distribution<double> scale(0.01, 100.0);
  for (int t = 0; t < 500; ++t) {
    std::vector<double> a(7), b(7);
    for (auto& v : a) v = n(gen);
    for (auto& v : b) v = n(gen);
    const double s = cosine_similarity(a, b);
    CHECK(s == cosine_similarity(b, a));
    CHECK(s >= -1.0);
    CHECK(s <= 1.0);
    const double alpha = scale(gen), beta = scale(gen);
    std::vector<double> sa = a, sb = b;
    for (auto& v : sa) v *= alpha;
    for (auto& v : sb) v *= beta;
    CHECK(std::abs(cosine_similarity(sa, sb) - s) < 1e-9);
  }
}

TEST_CASE("nearest neighbours on the toy vocabulary") {
  const auto v = toy();
  const auto self = nearest_neighbors(v, "a", 1, false);
  REQUIRE(self.size() == 1);
  CHECK(self[0].word == "a");
  CHECK(self[0].similarity == doctest::Approx(1.0));

  const auto two = nearest_neighbors(v, "a", 2, true);
  REQUIRE(two.size() == 2);
  CHECK(two[0].word == "c");
  CHECK(two[0].similarity == doctest::Approx(0.7071).epsilon(1e-4));
  CHECK(two[1].word == "b");
  CHECK(two[1].similarity == doctest::Approx(0.0));

  CHECK(nearest_neighbors(v, "a", 3, false).size() == 3);
  CHECK(nearest_neighbors(v, "a", 3, true).size() == 2);
  CHECK_THROWS_AS(nearest_neighbors(v, "zzz", 1, false), UnknownWord);
  CHECK_THROWS_AS(nearest_neighbors(v, "a", 0, false), InvalidArgument);
  CHECK_THROWS_AS(nearest_neighbors(v, "a", 4, false), InvalidArgument);
}

TEST_CASE("ties are broken by ascending word") {
  const auto v = testing::make_vocab({{"q", {1, 0}}, {"zeta", {0, 1}}, {"alpha", {0, -1}}, {"mid", {0, 2}}});
  const auto r = nearest_neighbors(v, "q", 3, true);
  REQUIRE(r.size() == 3);
  // All three are orthogonal to q.
  CHECK(r[0].word == "alpha");
  CHECK(r[1].word == "mid");
  CHECK(r[2].word == "zeta");
}

TEST_CASE("nearest neighbours match an exhaustive scan") {
  const auto v = testing::random_vocab(2000, 16, 11);
  std::mt19937_64 gen(12);
  for (int q = 0; q < 100; ++q) {
    const std::size_t qi = gen() % v.size();
    const std::size_t k = 1 + gen() % 25;
    const auto got = nearest_neighbors(v, v.word(qi), k, true);
    std::vector<std::pair<double, std::string>> all;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (i != qi) all.emplace_back(cosine_similarity(v.vector(qi), v.vector(i)), v.word(i));
    }
    std::sort(all.begin(), all.end(), [](const auto& a, const auto& b) {
      return a.first != b.first ? a.first > b.first : a.second < b.second;
    });
    REQUIRE(got.size() == k);
    for (std::size_t r = 0; r < k; ++r) {
      CHECK(got[r].word == all[r].second);
      CHECK(std::abs(got[r].similarity - all[r].first) < 1e-12);
    }
  }
}

TEST_CASE("a written 50-dim vocabulary reloads with unit norms") {
  ManifoldSpec spec;
  spec.count = 300;
  spec.named_words = {"Tyne", "Werribee", "Gin_Palaces"};
  const auto made = make_manifold_vocabulary(spec);
  std::ostringstream out;
  write_vocabulary(out, made);
  const std::string text = out.str();

  std::istringstream in(text);
  const auto v = load_vocabulary(in, true);

  // Independent line-by-line recount and renormalisation.
  std::istringstream lines(text);
  std::size_t count = 0, dim = 0;
  lines >> count >> dim;
  CHECK(count == 300);
  CHECK(dim == 50);
  std::string word;
  std::size_t seen = 0;
  while (lines >> word) {
    std::vector<double> row(dim);
    for (auto& x : row) lines >> x;
    double norm = 0.0;
    for (double x : row) norm += x * x;
    norm = std::sqrt(norm);
    const auto got = v.vector(v.index_of(word));
    for (std::size_t d = 0; d < dim; ++d) CHECK(std::abs(got[d] - row[d] / norm) < 1e-12);
    ++seen;
  }
  CHECK(seen == count);
  CHECK(v.size() == count);
  for (std::size_t i = 0; i < v.size(); ++i) {
    double n2 = 0.0;
    for (double x : v.vector(i)) n2 += x * x;
    CHECK(std::abs(std::sqrt(n2) - 1.0) < 1e-6);
  }
  CHECK(v.word(2) == "Gin_Palaces");
}

TEST_CASE("rankings are deterministic across loads") {
  ManifoldSpec spec;
  spec.count = 500;
  std::ostringstream out;
  write_vocabulary(out, make_manifold_vocabulary(spec));
  std::istringstream a(out.str()), b(out.str());
  const auto va = load_vocabulary(a, true), vb = load_vocabulary(b, true);
  for (const char* q : {"w00000", "w00123", "w00499"}) {
    const auto ra = nearest_neighbors(va, q, 10, true), rb = nearest_neighbors(vb, q, 10, true);
    REQUIRE(ra.size() == rb.size());
    for (std::size_t i = 0; i < ra.size(); ++i) {
      CHECK(ra[i].word == rb[i].word);
      CHECK(ra[i].similarity == rb[i].similarity);
    }
  }
}

TEST_CASE("manifold vocabulary is seeded") {
  ManifoldSpec spec;
  spec.count = 50;
  const auto a = make_manifold_vocabulary(spec), b = make_manifold_vocabulary(spec);
  spec.seed = 2;
  const auto c = make_manifold_vocabulary(spec);
  CHECK(std::equal(a.vector(7).begin(), a.vector(7).end(), b.vector(7).begin()));
  CHECK_FALSE(std::equal(a.vector(7).begin(), a.vector(7).end(), c.vector(7).begin()));
}
