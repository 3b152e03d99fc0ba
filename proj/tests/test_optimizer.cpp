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
#include <functional>
#include <limits>
#include <random>
#include <set>
#include <sstream>

#include "json.hpp"

#include "renewal/common.hpp"
#include "renewal/optimizer.hpp"
#include "renewal/synthetic_oracle.hpp"
#include "support.hpp"

using namespace renewal;
using namespace renewal::bo;
using gateway::EditRequest;
using perception::PerceptionScores;

namespace {

// Scores come from a function of the trigger; raw scores are fixed.
class FunctionBackend final : public gateway::Backend {
 public:
  using Fn = std::function<PerceptionScores(const std::string& trigger)>;
  explicit FunctionBackend(Fn fn) : fn_(std::move(fn)) {}

  gateway::EvaluationResult edit_and_score(const EditRequest& request) override {
    ++calls;
    triggers.push_back(request.trigger);
    gateway::EvaluationResult r;
    r.edited_image = request.image;
    r.scores = fn_(request.trigger);
    r.model_id = "fn";
    return r;
  }
  PerceptionScores score_raw(const gateway::ScoreRequest&) override { return {5, 5, 5}; }
  std::string describe() const override { return "fn"; }

  int calls = 0;
  std::vector<std::string> triggers;

 private:
  Fn fn_;
};

EditTask task(const std::string& id = "rec") {
  EditTask t;
  t.record_id = id;
  t.image = testing::rgb_png(16, 12);
  t.mask = testing::gray_png(16, 12);
  t.target_word = "Building";
  t.seed = 99;
  return t;
}

prompt::ScenarioSpec gse() { return prompt::scenario_mapping(prompt::ScenarioId::GSE, "Vegetation"); }

OptimizerConfig small_config(int budget, int init, int patience) {
  OptimizerConfig c;
  c.budget = budget;
  c.init_random = init;
  c.patience = patience;
  c.rng_seed = 5;
  return c;
}

// Vocabulary of `count` random words plus the manual word for beauty.
embedding::Vocabulary vocab_with_manual(std::size_t count, std::size_t dim, std::uint64_t seed) {
  const auto base = testing::random_vocab(count, dim, seed);
  std::vector<std::pair<std::string, std::vector<double>>> rows;
  for (std::size_t i = 0; i < base.size(); ++i) {
    rows.emplace_back(base.word(i), std::vector<double>(base.vector(i).begin(), base.vector(i).end()));
  }
  std::vector<double> manual(dim, 0.0);
  manual[0] = 1.0;
  rows.emplace_back("Beautiful", manual);
  return testing::make_vocab(rows, true);
}

}  // namespace

// ---- acquisition ------------------------------------------------------------

TEST_CASE("expected improvement closed form") {
  CHECK(expected_improvement(0, 0, 0, 0) == 0.0);
  CHECK(expected_improvement(2, 0, 0, 0) == 2.0);
  // phi(1) + Phi(1)
  CHECK(expected_improvement(1, 1, 0, 0) == doctest::Approx(1.08332).epsilon(1e-5));
  const double tail = expected_improvement(-5, 1, 0, 0);
  CHECK(tail >= 0.0);
  CHECK(tail == doctest::Approx(5.346166e-8).epsilon(1e-5));
  CHECK(expected_improvement(1, 1, 0, 0.5) < expected_improvement(1, 1, 0, 0));
}

TEST_CASE("expected improvement against Monte Carlo") {
  std::mt19937_64 gen(404);
  std::normal_distribution<double> n(1.0, 1.0);
  double sum = 0.0;
  const int samples = 1000000;
  for (int i = 0; i < samples; ++i) sum += std::max(n(gen), 0.0);
  CHECK(std::abs(sum / samples - expected_improvement(1, 1, 0, 0)) < 2e-3);
}

TEST_CASE("expected improvement is non-negative and grows with uncertainty below the best") {
  std::mt19937_64 gen(405);
  std::uniform_real_distribution<double> u(-6, 6), s(0, 4), x(0, 0.5);
  for (int t = 0; t < 5000; ++t) CHECK(expected_improvement(u(gen), s(gen), u(gen), x(gen)) >= 0.0);
  for (double gain : {-3.0, -1.0, -0.1, 0.0}) {
    double prev = expected_improvement(gain, 0.0, 0.0, 0.0);
    for (double sd = 0.05; sd <= 5.0; sd += 0.05) {
      const double ei = expected_improvement(gain, sd, 0.0, 0.0);
      CHECK(ei >= prev);
      prev = ei;
    }
  }
}

// ---- select_next ------------------------------------------------------------

TEST_CASE("select_next forced choice and exhaustion") {
  const auto v = testing::random_vocab(5, 3, 1);
  GpHyperparameters h;
  h.lengthscale = 1.0;
  Eigen::MatrixXd X(1, 3);
  X << v.vector(0)[0], v.vector(0)[1], v.vector(0)[2];
  const auto gp = gp_fit(X, Eigen::VectorXd::Constant(1, 0.5), h);
  OptimizerConfig c;
  std::vector<bool> evaluated(5, true);
  evaluated[3] = false;
  CHECK(select_next(gp, v, evaluated, 0.5, c) == 3);
  evaluated[3] = true;
  CHECK_THROWS_AS(select_next(gp, v, evaluated, 0.5, c), VocabularyExhausted);
}

TEST_CASE("select_next breaks exact ties by the smallest word") {
  // A tiny lengthscale makes every candidate sit at the prior.
  const auto v = testing::make_vocab(
      {{"obs", {1, 0}}, {"pear", {0, 1}}, {"apple", {-1, 0}}, {"zucchini", {0, -1}}, {"melon", {-1, -1}}});
  GpHyperparameters h;
  h.lengthscale = 0.01;
  Eigen::MatrixXd X(1, 2);
  X << 1, 0;
  const auto gp = gp_fit(X, Eigen::VectorXd::Constant(1, 1.0), h);
  OptimizerConfig c;
  std::vector<bool> evaluated{true, false, false, false, false};
  CHECK(v.word(select_next(gp, v, evaluated, 1.0, c)) == "apple");
  evaluated[v.index_of("apple")] = true;
  CHECK(v.word(select_next(gp, v, evaluated, 1.0, c)) == "melon");
}

TEST_CASE("select_next equals an exhaustive EI scan") {
  const auto v = testing::random_vocab(100, 6, 21);
  std::mt19937_64 gen(22);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<bool> evaluated(v.size(), false);
    const int n_obs = 2 + trial % 6;
    Eigen::MatrixXd X(n_obs, 6);
    Eigen::VectorXd y(n_obs);
    for (int r = 0; r < n_obs; ++r) {
      std::size_t i = gen() % v.size();
      while (evaluated[i]) i = gen() % v.size();
      evaluated[i] = true;
      for (int c = 0; c < 6; ++c) X(r, c) = v.vector(i)[static_cast<std::size_t>(c)];
      y(r) = std::normal_distribution<double>()(gen);
    }
    GpHyperparameters h;
    h.lengthscale = 0.5 + 0.1 * trial;
    const auto gp = gp_fit(X, y, h);
    OptimizerConfig c;
    c.xi = 0.01;
    const double best = y.maxCoeff();

    std::size_t want = v.size();
    double want_ei = -1.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (evaluated[i]) continue;
      const auto p = gp.predict(v.vector(i));
      const double ei = expected_improvement(p.mean, p.stddev, best, c.xi);
      if (want == v.size() || ei > want_ei || (ei == want_ei && v.word(i) < v.word(want))) {
        want = i;
        want_ei = ei;
      }
    }
    const std::size_t got = select_next(gp, v, evaluated, best, c);
    CHECK(got == want);
    CHECK_FALSE(evaluated[got]);
  }
}

TEST_CASE("candidate_limit restricts scoring to a seeded subset") {
  const auto v = testing::random_vocab(200, 4, 31);
  GpHyperparameters h;
  h.lengthscale = 0.01;  // flat EI, so the choice is the smallest word in the subset
  Eigen::MatrixXd X(1, 4);
  X << 9, 9, 9, 9;
  const auto gp = gp_fit(X, Eigen::VectorXd::Constant(1, 0.0), h);
  std::vector<bool> evaluated(v.size(), false);
  OptimizerConfig c;
  c.rng_seed = 3;
  c.candidate_limit = 5;
  const auto a = select_next(gp, v, evaluated, 0.0, c, 0);
  CHECK(a == select_next(gp, v, evaluated, 0.0, c, 0));
  std::set<std::size_t> picks;
  for (std::uint64_t round = 0; round < 20; ++round) picks.insert(select_next(gp, v, evaluated, 0.0, c, round));
  CHECK(picks.size() > 1);
  c.candidate_limit.reset();
  CHECK(v.word(select_next(gp, v, evaluated, 0.0, c)) == "g00000");
}

// ---- optimize -----------------------------------------------------------------

TEST_CASE("single-word vocabulary with no random init evaluates once") {
  const auto v = testing::make_vocab({{"Tyne", {1, 0, 0}}}, true);
  FunctionBackend b([](const std::string&) { return PerceptionScores{5, 6, 5}; });
  TriggerEvaluator ev(task(), b, perception::RewardSpec::single(Metric::beauty), {5, 5, 5});
  const auto out = optimize(ev, v, gse(), small_config(10, 0, 3));
  REQUIRE(out.trace.size() == 1);
  CHECK(out.trace[0].trigger == "Tyne");
  CHECK(out.trace[0].phase == Phase::bo);
  CHECK(out.best_prompt.trigger == "Tyne");
  CHECK(out.best_reward == doctest::Approx(0.2));
  CHECK(b.calls == 1);
}

TEST_CASE("constant rewards stop after patience") {
  const auto v = vocab_with_manual(40, 4, 41);
  FunctionBackend b([](const std::string&) { return PerceptionScores{5, 6, 5}; });
  for (int k0 : {0, 2, 5}) {
    TriggerEvaluator ev(task(), b, perception::RewardSpec::single(Metric::beauty), {5, 5, 5});
    const auto out = optimize(ev, v, gse(), small_config(30, k0, 1));
    CHECK(out.trace.size() == static_cast<std::size_t>(k0 + 2));
    CHECK(out.trace.front().trigger == "Beautiful");
    CHECK(out.best_prompt.trigger == "Beautiful");  // first of the ties
  }
}

TEST_CASE("trace invariants on the synthetic oracle") {
  auto vocab = std::make_shared<embedding::Vocabulary>(vocab_with_manual(300, 8, 51));
  gateway::SyntheticOracleConfig oc;
  oc.vocab = vocab;
  oc.optimum_word = vocab->word(17);
  oc.bandwidth = 0.6;
  gateway::SyntheticOracle oracle(oc);
  for (int budget : {1, 5, 12, 25}) {
    const int k0 = std::min(3, budget - 1);
    TriggerEvaluator ev(task(), oracle, perception::RewardSpec::single(Metric::beauty),
                        oracle.score_raw({task().image, "rec"}));
    const auto out = optimize(ev, *vocab, gse(), small_config(budget, k0, 100));
    CHECK(static_cast<int>(out.trace.size()) == budget);
    std::set<std::string> seen;
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < out.trace.size(); ++i) {
      const auto& t = out.trace[i];
      CHECK(t.iteration == static_cast<int>(i + 1));
      CHECK(seen.insert(t.trigger).second);
      best = std::max(best, t.reward);
      CHECK(t.best_so_far == best);
      CHECK(t.phase == (static_cast<int>(i) < 1 + k0 ? Phase::init : Phase::bo));
    }
    CHECK(out.best_reward == best);
    CHECK(ev.backend_evaluations() == out.trace.size());
  }
}

TEST_CASE("optimisation is reproducible") {
  auto vocab = std::make_shared<embedding::Vocabulary>(vocab_with_manual(300, 8, 52));
  gateway::SyntheticOracleConfig oc;
  oc.vocab = vocab;
  oc.optimum_word = vocab->word(100);
  gateway::SyntheticOracle oracle(oc);
  const auto once = [&] {
    TriggerEvaluator ev(task(), oracle, perception::RewardSpec::single(Metric::beauty),
                        oracle.score_raw({task().image, "rec"}));
    std::ostringstream s;
    write_trace(s, "rec", optimize(ev, *vocab, gse(), small_config(20, 4, 6)).trace, false);
    return s.str();
  };
  CHECK(once() == once());
}

TEST_CASE("word sequence is invariant to positive reward scaling") {
  const auto v = vocab_with_manual(200, 5, 61);
  std::unordered_map<std::string, double> shape;
  std::mt19937_64 gen(62);
  for (std::size_t i = 0; i < v.size(); ++i) shape[v.word(i)] = std::uniform_real_distribution<double>(0, 1)(gen);
  const auto run = [&](double scale) {
    FunctionBackend b([&](const std::string& w) {
      return PerceptionScores{5, 5 + scale * shape.at(w), 5};
    });
    TriggerEvaluator ev(task(), b, perception::RewardSpec::single(Metric::beauty), {5, 5, 5});
    auto c = small_config(25, 3, 50);
    c.lengthscale_mode = LengthscaleMode::fixed;
    c.fixed_lengthscale = 0.8;
    optimize(ev, v, gse(), c);
    return b.triggers;
  };
  const auto a = run(1.0);
  CHECK(a.size() == 25);
  CHECK(run(0.25) == a);
  CHECK(run(3.0) == a);
}

TEST_CASE("failed evaluations take budget, are not retried and never win") {
  const auto v = vocab_with_manual(60, 4, 71);
  const std::string bad1 = v.word(0), bad2 = v.word(1);
  FunctionBackend b([&](const std::string& w) -> PerceptionScores {
    if (w == bad1) throw ProtocolError("scripted failure");
    if (w == bad2) throw TransportError("scripted outage");
    return {5, 5.5, 5};
  });
  TriggerEvaluator ev(task(), b, perception::RewardSpec::single(Metric::beauty), {5, 5, 5});
  // Make sure both failing words are evaluated by putting them in the init draw.
  CHECK_FALSE(ev.evaluate(bad1).ok);
  CHECK_FALSE(ev.evaluate(bad1).transport_error);
  CHECK(ev.evaluate(bad2).transport_error);
  CHECK(b.calls == 2);
  const auto out = optimize(ev, v, gse(), small_config(static_cast<int>(v.size()), 0, 100));
  CHECK(out.trace.size() == v.size());
  CHECK(b.calls == static_cast<int>(v.size()));  // memoised failures are not sent again
  int failed = 0;
  for (const auto& t : out.trace) {
    if (t.trigger == bad1 || t.trigger == bad2) {
      ++failed;
      CHECK(std::isinf(t.reward));
      CHECK(t.reward < 0);
      CHECK_FALSE(t.error.empty());
    }
  }
  CHECK(failed == 2);
  CHECK(out.best_reward == doctest::Approx(0.1));
  CHECK(out.best_prompt.trigger != bad1);
}

TEST_CASE("all evaluations failing is an error") {
  const auto v = vocab_with_manual(10, 3, 72);
  FunctionBackend b([](const std::string&) -> PerceptionScores { throw ProtocolError("down"); });
  TriggerEvaluator ev(task(), b, perception::RewardSpec::single(Metric::beauty), {5, 5, 5});
  CHECK_THROWS_AS(optimize(ev, v, gse(), small_config(5, 2, 3)), Error);
}

TEST_CASE("optimizer config validation") {
  const auto bad = [](auto mutate) {
    OptimizerConfig c;
    mutate(c);
    CHECK_THROWS_AS(c.validate(), InvalidArgument);
  };
  bad([](OptimizerConfig& c) { c.budget = 0; });
  bad([](OptimizerConfig& c) { c.patience = 0; });
  bad([](OptimizerConfig& c) { c.init_random = -1; });
  bad([](OptimizerConfig& c) { c.budget = 3, c.init_random = 3; });
  bad([](OptimizerConfig& c) { c.xi = -0.1; });
  bad([](OptimizerConfig& c) { c.noise_variance = 0; });
  bad([](OptimizerConfig& c) { c.lengthscale_mode = LengthscaleMode::fixed, c.fixed_lengthscale = 0; });
  bad([](OptimizerConfig& c) { c.candidate_limit = 0; });
  OptimizerConfig ok;
  CHECK_NOTHROW(ok.validate());
}

TEST_CASE("trace lines") {
  std::vector<TraceEntry> trace(2);
  trace[0].iteration = 1;
  trace[0].trigger = "Tyne";
  trace[0].prompt = "Tyne Building in a street";
  trace[0].scores = {5, 6, 7};
  trace[0].reward = 0.25;
  trace[0].best_so_far = 0.25;
  trace[0].wall_ms = 3.5;
  trace[1].iteration = 2;
  trace[1].trigger = "Mayor";
  trace[1].reward = -std::numeric_limits<double>::infinity();
  trace[1].best_so_far = 0.25;
  trace[1].phase = Phase::bo;
  trace[1].error = "boom";

  std::ostringstream plain;
  write_trace(plain, "r1", trace, false);
  std::istringstream lines(plain.str());
  std::string line;
  std::vector<nlohmann::json> rows;
  while (std::getline(lines, line)) rows.push_back(nlohmann::json::parse(line));
  REQUIRE(rows.size() == 2);
  CHECK(rows[0]["record_id"] == "r1");
  CHECK(rows[0]["phase"] == "init");
  CHECK(rows[0]["scores"]["lively"] == 7.0);
  CHECK(rows[0]["reward"] == 0.25);
  CHECK_FALSE(rows[0].contains("wall_ms"));
  CHECK_FALSE(rows[0].contains("error"));
  CHECK(rows[1]["reward"].is_null());
  CHECK(rows[1]["phase"] == "bo");
  CHECK(rows[1]["error"] == "boom");

  std::ostringstream timed;
  write_trace(timed, "r1", trace, true);
  const auto first = nlohmann::json::parse(timed.str().substr(0, timed.str().find('\n')));
  CHECK(first["wall_ms"] == 3.5);
}
