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

// Acceptance suite. Prints one PASS/FAIL line per criterion and exits
// non-zero if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <iostream>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "fixture_writer.hpp"
#include "renewal/app.hpp"
#include "renewal/embedding_store.hpp"
#include "renewal/gaussian_process.hpp"
#include "renewal/hashing.hpp"
#include "renewal/optimizer.hpp"
#include "renewal/perception_metrics.hpp"
#include "renewal/pipeline.hpp"
#include "renewal/synthetic_oracle.hpp"
#include "support.hpp"

using namespace renewal;
namespace fs = std::filesystem;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

// ---- dense reference solver ---------------------------------------------------

// Solves A x = b by Gaussian elimination with partial pivoting.
std::vector<double> dense_solve(std::vector<std::vector<double>> A, std::vector<double> b) {
  const std::size_t n = b.size();
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t p = c;
    for (std::size_t r = c + 1; r < n; ++r) {
      if (std::abs(A[r][c]) > std::abs(A[p][c])) p = r;
    }
    std::swap(A[c], A[p]);
    std::swap(b[c], b[p]);
    for (std::size_t r = c + 1; r < n; ++r) {
      const double f = A[r][c] / A[c][c];
      for (std::size_t k = c; k < n; ++k) A[r][k] -= f * A[c][k];
      b[r] -= f * b[c];
    }
  }
  std::vector<double> x(n);
  for (std::size_t i = n; i-- > 0;) {
    double s = b[i];
    for (std::size_t k = i + 1; k < n; ++k) s -= A[i][k] * x[k];
    x[i] = s / A[i][i];
  }
  return x;
}

Verdict a1_gp() {
  double worst = 0.0;
  std::size_t checked = 0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    std::mt19937_64 gen(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    const std::size_t dim = 4;
    const std::size_t n = 4 + seed;  // 5..9 observations
    const double ell = 0.8 + 0.1 * static_cast<double>(seed);
    const double noise = 1e-4;

    Eigen::MatrixXd X(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(dim));
    Eigen::VectorXd y(static_cast<Eigen::Index>(n));
    std::vector<std::vector<double>> pts(n, std::vector<double>(dim));
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t d = 0; d < dim; ++d) {
        pts[i][d] = u(gen);
        X(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(d)) = pts[i][d];
      }
      y(static_cast<Eigen::Index>(i)) = 3.0 * u(gen);
    }
    bo::GpHyperparameters hyper;
    hyper.lengthscale = ell;
    hyper.noise_variance = noise;
    const auto gp = bo::GaussianProcess::fit(X, y, hyper);

    double mean_y = y.mean();
    const double sf2 = std::max((y.array() - mean_y).square().mean(), hyper.signal_floor);
    const auto k = [&](const std::vector<double>& a, const std::vector<double>& b) {
      double s = 0.0;
      for (std::size_t d = 0; d < dim; ++d) s += (a[d] - b[d]) * (a[d] - b[d]);
      return sf2 * std::exp(-s / (2.0 * ell * ell));
    };
    std::vector<std::vector<double>> K(n, std::vector<double>(n));
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) K[i][j] = k(pts[i], pts[j]) + (i == j ? noise : 0.0);
    }
    std::vector<double> yv(y.data(), y.data() + n);
    const auto alpha = dense_solve(K, yv);

    for (int probe = 0; probe < 100; ++probe) {
      std::vector<double> x(dim);
      for (auto& v : x) v = u(gen);
      std::vector<double> ks(n);
      for (std::size_t i = 0; i < n; ++i) ks[i] = k(x, pts[i]);
      const double mu = std::inner_product(ks.begin(), ks.end(), alpha.begin(), 0.0);
      const auto w = dense_solve(K, ks);
      const double var = k(x, x) - std::inner_product(ks.begin(), ks.end(), w.begin(), 0.0);
      const auto p = gp.predict(x);
      worst = std::max({worst, std::abs(p.mean - mu), std::abs(p.stddev * p.stddev - std::max(var, 0.0))});
      ++checked;
    }
  }
  return {worst <= 1e-8, fmt::format("{} probes, max |diff| {:.3g} (tol 1e-8)", checked, worst)};
}

Verdict a2_ei() {
  std::mt19937_64 gen(20260);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst = 0.0;
  for (int t = 0; t < 20; ++t) {
    const double mean = 4.0 * u(gen) - 2.0;
    const double stddev = t < 4 ? 0.0 : 0.05 + 0.95 * u(gen);
    const double best = 4.0 * u(gen) - 2.0;
    const double xi = t % 2 == 0 ? 0.0 : 0.1 * u(gen);
    std::normal_distribution<double> f(mean, stddev > 0 ? stddev : 1.0);
    double sum = 0.0;
    constexpr int kSamples = 1'000'000;
    for (int i = 0; i < kSamples; ++i) {
      const double draw = stddev > 0 ? f(gen) : mean;
      sum += std::max(draw - best - xi, 0.0);
    }
    const double mc = sum / kSamples;
    worst = std::max(worst, std::abs(bo::expected_improvement(mean, stddev, best, xi) - mc));
  }
  return {worst <= 2e-3, fmt::format("20 tuples (4 with stddev 0), max |EI - MC| {:.3g} (tol 2e-3)", worst)};
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

Verdict a3_optimizer() {
  testing::TempDir tmp;
  embedding::ManifoldSpec ms;
  ms.count = 2000;
  ms.seed = 2026;
  ms.named_words = {"Safe", "Beautiful", "Lively"};
  const auto vocab = std::make_shared<const embedding::Vocabulary>(embedding::make_manifold_vocabulary(ms));

  const std::string manual = "Beautiful";  // GSE scenario optimises beauty
  std::vector<bool> near(vocab->size(), false);
  near[vocab->index_of(manual)] = true;
  for (const auto& n : embedding::nearest_neighbors(*vocab, manual, 20, true)) near[vocab->index_of(n.word)] = true;
  std::vector<std::size_t> far;
  for (std::size_t i = 0; i < vocab->size(); ++i) {
    if (!near[i]) far.push_back(i);
  }

  image::write_file_atomic(tmp / "img.png", testing::rgb_png(32, 24));
  image::write_file_atomic(tmp / "mask.png", testing::gray_png(32, 24));

  std::vector<double> bo_r, sw_r, mp_r;
  int near_optimum = 0;
  std::string failures;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    Rng rng(derive_seed(seed, "a3-optimum"));
    gateway::SyntheticOracleConfig oc;
    oc.vocab = vocab;
    oc.optimum_word = vocab->word(far[rng.index(far.size())]);
    oc.rng_seed = seed;
    gateway::SyntheticOracle oracle(oc);

    pipeline::StreetViewRecord rec;
    rec.id = fmt::format("a3-{:02d}", seed);
    rec.image_path = tmp / "img.png";
    rec.mask_path = tmp / "mask.png";
    rec.upd_detected = true;
    rec.factor = "Vegetation";
    rec.scenario = prompt::ScenarioId::GSE;
    rec.hw_ratio = 1.0;

    pipeline::PipelineConfig pc;
    pc.global_seed = seed;
    pc.optimizer.budget = 30;
    const auto out = pipeline::process_record(rec, *vocab, oracle, pc);

    const auto scan = gateway::scan_vocabulary(
        oc, rec.id, perception::RewardSpec::single(Metric::beauty));
    const double optimum = scan.rows[scan.argmax].reward;
    for (const auto& r : out.results) {
      if (r.method == pipeline::Method::BO) {
        bo_r.push_back(r.reward);
        if (r.reward >= 0.9 * optimum) {
          ++near_optimum;
        } else {
          failures += fmt::format(" {}:{:.2f}", seed, r.reward / optimum);
        }
      }
      if (r.method == pipeline::Method::SW) sw_r.push_back(r.reward);
      if (r.method == pipeline::Method::MP) mp_r.push_back(r.reward);
    }
  }
  const double mb = median(bo_r), ms_ = median(sw_r), mm = median(mp_r);
  const bool ok = near_optimum >= 16 && bo_r.size() == 20 && mb > ms_ && mb > mm;
  return {ok, fmt::format("(a) {}/20 runs >= 0.9 x optimum{}; (b) median BO {:.4f} SW {:.4f} MP {:.4f}",
                          near_optimum, failures.empty() ? "" : " [misses" + failures + "]", mb, ms_, mm)};
}

Verdict a4_rates() {
  const std::vector<std::tuple<double, double, double>> cases{
      {4.78, 5.97, 0.2490}, {5.59, 7.65, 0.3685}, {6.08, 7.91, 0.3010}, {7.79, 8.93, 0.1463}};
  double worst = 0.0;
  for (const auto& [prev, renew, expect] : cases) {
    worst = std::max(worst, std::abs(perception::improvement_rate(prev, renew) - expect));
  }
  return {worst <= 5e-5, fmt::format("4 score pairs, max |diff| {:.2g} (tol 5e-5)", worst)};
}

Verdict a5_gating() {
  testing::TempDir tmp;
  fixtures::FixtureSpec spec;
  spec.records = 4;
  spec.no_upd_every = 2;  // r002 and r004 have no detected disorder
  fixtures::write_fixture_set(tmp.path(), spec);
  const auto manifest = pipeline::ingest_manifest(tmp / "manifest.jsonl");
  const auto vocab = std::make_shared<const embedding::Vocabulary>(
      embedding::load_vocabulary_file(tmp / "vocab.txt", true));
  auto oracle = std::make_shared<gateway::SyntheticOracle>(gateway::load_oracle_config(
      nlohmann::json::parse(testing::slurp(tmp / "oracle.json")), vocab));
  gateway::CountingBackend counter(oracle);

  std::size_t calls = 0, results = 0, gated = 0;
  bool outputs_clean = true;
  for (const auto& rec : manifest.records) {
    if (rec.upd_detected) continue;
    ++gated;
    counter.reset();
    const auto out = pipeline::process_record(rec, *vocab, counter, {});
    calls += counter.total_calls();
    results += out.results.size();
    const fs::path dir = tmp / ("out-" + rec.id);
    pipeline::write_outputs(dir, {out}, {}, false);
    outputs_clean = outputs_clean && !fs::exists(dir / "best") && !fs::exists(dir / "traces");
  }
  const bool ok = gated == 2 && calls == 0 && results == 0 && outputs_clean;
  return {ok, fmt::format("{} no-UPD records: {} backend calls, {} results, edited output {}", gated, calls,
                          results, outputs_clean ? "absent" : "PRESENT")};
}

Verdict a6_determinism() {
  testing::TempDir tmp;
  fixtures::FixtureSpec spec;
  spec.records = 8;
  fixtures::write_fixture_set(tmp.path(), spec);
  const std::string cfg = (tmp / "config.json").string();
  std::ostringstream out, err;

  const auto batch = [&](const std::string& dir, int workers, app::CliStats& stats) {
    return app::run_cli({"batch", "--config", cfg, "--out", (tmp / dir).string(), "--workers",
                         std::to_string(workers)},
                        out, err, &stats);
  };
  app::CliStats cold, warm, single;
  const int e1 = batch("cold", 4, cold);
  const int e2 = batch("warm", 4, warm);
  // Fresh cache so the single-worker run really evaluates.
  fs::remove_all(tmp / "cache");
  const int e3 = batch("w1", 1, single);
  if (e1 || e2 || e3) return {false, fmt::format("exit codes {} {} {}: {}", e1, e2, e3, err.str())};

  const auto a = testing::snapshot(tmp / "cold");
  const auto b = testing::snapshot(tmp / "warm");
  const auto c = testing::snapshot(tmp / "w1");
  const auto reports = [](const std::map<std::string, std::string>& m) {
    std::map<std::string, std::string> r;
    for (const auto& [k, v] : m) {
      if (k.rfind("report_", 0) == 0) r[k] = v;
    }
    return r;
  };
  const bool identical = a == b;
  const bool tables = reports(a) == reports(c) && !reports(a).empty();
  const bool ok = cold.backend_calls > 0 && warm.backend_calls == 0 && identical && tables &&
                  single.backend_calls == cold.backend_calls;
  return {ok, fmt::format("cold {} calls, warm {} calls; warm outputs {} ({} files); workers 1 vs 4 tables {}",
                          cold.backend_calls, warm.backend_calls, identical ? "byte-identical" : "DIFFER",
                          a.size(), tables ? "identical" : "DIFFER")};
}

Verdict a7_buckets() {
  using pipeline::MorphologyBucket;
  const std::vector<std::pair<double, MorphologyBucket>> cases{
      {0.3, MorphologyBucket::BarelyPopulated}, {0.5, MorphologyBucket::LivingSpaces},
      {1.0, MorphologyBucket::LivingSpaces},    {1.5, MorphologyBucket::LivingSpaces},
      {1.6, MorphologyBucket::UrbanHub}};
  std::string got;
  bool ok = true;
  for (const auto& [alpha, expect] : cases) {
    const auto b = pipeline::bucket_morphology(alpha);
    ok = ok && b == expect;
    got += fmt::format(" {}->{}", alpha, pipeline::to_string(b));
  }
  return {ok, got.substr(1)};
}

Verdict a8_neighbors() {
  const auto vocab = testing::random_vocab(10'000, 50, 88);
  std::mt19937_64 gen(8);
  constexpr std::size_t k = 10;
  std::size_t mismatches = 0;
  double worst = 0.0;
  for (int q = 0; q < 100; ++q) {
    const std::size_t qi = gen() % vocab.size();
    const auto got = embedding::nearest_neighbors(vocab, vocab.word(qi), k, true);

    // Exhaustive scan with an independent cosine.
    const auto a = vocab.vector(qi);
    std::vector<std::pair<double, std::string>> all;
    for (std::size_t i = 0; i < vocab.size(); ++i) {
      if (i == qi) continue;
      const auto b = vocab.vector(i);
      double dot = 0, na = 0, nb = 0;
      for (std::size_t d = 0; d < a.size(); ++d) {
        dot += a[d] * b[d];
        na += a[d] * a[d];
        nb += b[d] * b[d];
      }
      all.emplace_back(dot / std::sqrt(na * nb), vocab.word(i));
    }
    std::sort(all.begin(), all.end(), [](const auto& x, const auto& y) {
      return x.first != y.first ? x.first > y.first : x.second < y.second;
    });
    if (got.size() != k) ++mismatches;
    for (std::size_t r = 0; r < std::min(k, got.size()); ++r) {
      if (got[r].word != all[r].second) ++mismatches;
      worst = std::max(worst, std::abs(got[r].similarity - all[r].first));
    }
  }
  return {mismatches == 0 && worst <= 1e-9,
          fmt::format("100 queries x top-{}: {} rank mismatches, max |sim diff| {:.2g}", k, mismatches, worst)};
}

}  // namespace

int main() {
  spdlog::set_level(spdlog::level::err);
  struct Criterion {
    const char* id;
    const char* name;
    double limit_s;
    std::function<Verdict()> run;
  };
  const std::vector<Criterion> criteria{
      {"A1", "GP posterior vs dense solve", 5.0, a1_gp},
      {"A2", "EI vs Monte Carlo", 30.0, a2_ei},
      {"A3", "optimizer vs baselines and optimum", 180.0, a3_optimizer},
      {"A4", "improvement-rate arithmetic", 1.0, a4_rates},
      {"A5", "no-UPD gating", 10.0, a5_gating},
      {"A6", "determinism and cache soundness", 60.0, a6_determinism},
      {"A7", "morphology bucketing", 1.0, a7_buckets},
      {"A8", "nearest neighbours vs exhaustive scan", 60.0, a8_neighbors},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = c.run();
    } catch (const std::exception& e) {
      v = {false, fmt::format("threw: {}", e.what())};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = secs <= c.limit_s;
    const bool pass = v.pass && in_time;
    failed += pass ? 0 : 1;
    std::cout << fmt::format("{} {} {} ({:.2f} s, limit {:.0f} s{}): {}", c.id, pass ? "PASS" : "FAIL", c.name,
                             secs, c.limit_s, in_time ? "" : ", OVER", v.detail)
              << std::endl;
  }
  std::cout << fmt::format("{} of {} acceptance criteria passed", criteria.size() - failed, criteria.size())
            << std::endl;
  return failed == 0 ? 0 : 1;
}
