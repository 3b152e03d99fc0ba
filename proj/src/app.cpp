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

#include "renewal/app.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <ostream>
#include <set>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "CLI11.hpp"

#include "renewal/evaluation_cache.hpp"
#include "renewal/image.hpp"
#include "renewal/synthetic_oracle.hpp"

namespace renewal::app {

namespace fs = std::filesystem;
using nlohmann::json;

// ---- configuration -------------------------------------------------------------

namespace {

void check_keys(const json& j, std::string_view section, std::initializer_list<std::string_view> allowed) {
  if (!j.is_object()) throw ParseError(fmt::format("config section '{}' must be an object", section));
  for (const auto& [key, _] : j.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      throw ParseError(fmt::format("unknown config key '{}{}{}'", section, section.empty() ? "" : ".", key));
    }
  }
}

template <typename T>
T get_or(const json& j, const char* key, T fallback, std::string_view section) {
  const auto it = j.find(key);
  if (it == j.end() || it->is_null()) return fallback;
  try {
    return it->get<T>();
  } catch (const json::exception&) {
    throw ParseError(fmt::format("config key '{}{}{}' has the wrong type", section,
                                 section.empty() ? "" : ".", key));
  }
}

fs::path resolve(const fs::path& base, const std::string& p) {
  const fs::path path(p);
  return path.is_absolute() ? path : base / path;
}

std::chrono::milliseconds millis(double ms) {
  if (!(ms >= 0.0)) throw InvalidArgument("durations must be non-negative");
  return std::chrono::milliseconds(static_cast<std::int64_t>(ms));
}

void parse_backend(const json& j, const fs::path& base, BackendSettings& out) {
  check_keys(j, "backend",
             {"type", "oracle", "url", "connect_timeout_ms", "read_timeout_ms", "retry_delays_ms"});
  const auto type = get_or<std::string>(j, "type", "", "backend");
  if (type == "oracle") {
    out.kind = BackendKind::oracle;
    for (const char* k : {"url", "connect_timeout_ms", "read_timeout_ms", "retry_delays_ms"}) {
      if (j.contains(k)) throw ParseError(fmt::format("backend.{} only applies to the remote backend", k));
    }
    const auto it = j.find("oracle");
    if (it == j.end() || it->is_null()) {
      out.oracle = json::object();
    } else if (it->is_string()) {
      const fs::path path = resolve(base, it->get<std::string>());
      std::ifstream in(path);
      if (!in) throw ParseError(fmt::format("cannot read oracle config '{}'", path.string()));
      out.oracle = json::parse(in, nullptr, false);
      if (out.oracle.is_discarded()) {
        throw ParseError(fmt::format("oracle config '{}' is not valid JSON", path.string()));
      }
    } else if (it->is_object()) {
      out.oracle = *it;
    } else {
      throw ParseError("backend.oracle must be a path or an object");
    }
  } else if (type == "remote") {
    out.kind = BackendKind::remote;
    if (j.contains("oracle")) throw ParseError("backend.oracle only applies to the oracle backend");
    out.remote.base_url = get_or<std::string>(j, "url", "", "backend");
    if (out.remote.base_url.empty()) throw ParseError("remote backend needs backend.url");
    if (j.contains("connect_timeout_ms")) {
      out.remote.connect_timeout = millis(get_or<double>(j, "connect_timeout_ms", 0, "backend"));
    }
    if (j.contains("read_timeout_ms")) {
      out.remote.read_timeout = millis(get_or<double>(j, "read_timeout_ms", 0, "backend"));
    }
    if (j.contains("retry_delays_ms")) {
      out.remote.retry_delays.clear();
      for (double d : get_or<std::vector<double>>(j, "retry_delays_ms", {}, "backend")) {
        out.remote.retry_delays.push_back(millis(d));
      }
    }
  } else {
    throw ParseError(fmt::format("backend.type must be \"oracle\" or \"remote\", got \"{}\"", type));
  }
}

void parse_optimizer(const json& j, bo::OptimizerConfig& o) {
  check_keys(j, "optimizer",
             {"budget", "patience", "init_random", "xi", "noise_variance", "lengthscale",
              "signal_floor", "candidate_limit", "median_sample_limit"});
  o.budget = get_or(j, "budget", o.budget, "optimizer");
  o.patience = get_or(j, "patience", o.patience, "optimizer");
  o.init_random = get_or(j, "init_random", o.init_random, "optimizer");
  o.xi = get_or(j, "xi", o.xi, "optimizer");
  o.noise_variance = get_or(j, "noise_variance", o.noise_variance, "optimizer");
  o.signal_floor = get_or(j, "signal_floor", o.signal_floor, "optimizer");
  o.median_sample_limit = get_or(j, "median_sample_limit", o.median_sample_limit, "optimizer");
  if (const auto it = j.find("lengthscale"); it != j.end() && !it->is_null()) {
    if (it->is_string() && it->get<std::string>() == "median_heuristic") {
      o.lengthscale_mode = bo::LengthscaleMode::median_heuristic;
    } else if (it->is_number()) {
      o.lengthscale_mode = bo::LengthscaleMode::fixed;
      o.fixed_lengthscale = it->get<double>();
    } else {
      throw ParseError("optimizer.lengthscale must be \"median_heuristic\" or a number");
    }
  }
  if (const auto it = j.find("candidate_limit"); it != j.end() && !it->is_null()) {
    if (!it->is_number_unsigned()) throw ParseError("optimizer.candidate_limit must be a positive integer");
    o.candidate_limit = it->get<std::size_t>();
  }
  o.validate();
}

void parse_reward(const json& j, pipeline::RewardSettings& r) {
  check_keys(j, "reward", {"mode", "objective", "weights", "epsilon"});
  const auto mode = get_or<std::string>(j, "mode", "single", "reward");
  r.epsilon = get_or(j, "epsilon", r.epsilon, "reward");
  if (const auto it = j.find("objective"); it != j.end() && !it->is_null()) {
    r.objective = parse_metric(get_or<std::string>(j, "objective", "", "reward"));
  }
  if (mode == "single") {
    r.mode = perception::RewardMode::single;
    if (j.contains("weights")) throw ParseError("reward.weights only applies to weighted mode");
  } else if (mode == "weighted") {
    r.mode = perception::RewardMode::weighted;
    const auto it = j.find("weights");
    if (it == j.end()) throw ParseError("weighted reward needs reward.weights");
    check_keys(*it, "reward.weights", {"safe", "beauty", "lively"});
    for (Metric m : kAllMetrics) {
      r.weights[index_of(m)] = get_or<double>(*it, std::string(to_string(m)).c_str(), 0.0, "reward.weights");
    }
    perception::RewardSpec::weighted(r.weights, r.epsilon).validate();
  } else {
    throw ParseError(fmt::format("reward.mode must be \"single\" or \"weighted\", got \"{}\"", mode));
  }
  if (!(r.epsilon > 0.0)) throw InvalidArgument("reward.epsilon must be positive");
}

void parse_scenarios(const json& j, prompt::ScenarioTable& table) {
  check_keys(j, "scenarios", {"NI", "BR", "GSE", "CG"});
  for (const auto& [name, rule] : j.items()) {
    const auto id = prompt::parse_scenario(name);
    const std::string section = "scenarios." + name;
    check_keys(rule, section, {"sources", "target_word", "objective"});
    if (rule.contains("sources")) {
      auto sources = get_or<std::vector<std::string>>(rule, "sources", {}, section);
      for (const auto& s : sources) table.add_factor(s);
      table.set_sources(id, std::move(sources));
    }
    if (rule.contains("target_word") && !rule["target_word"].is_null()) {
      table.set_target_word(id, get_or<std::string>(rule, "target_word", "", section));
    }
    if (rule.contains("objective")) {
      table.set_objective(id, parse_metric(get_or<std::string>(rule, "objective", "", section)));
    }
  }
}

}  // namespace

RunConfig parse_run_config(const json& j, const fs::path& base) {
  check_keys(j, "",
             {"vocabulary", "normalize_vocabulary", "backend", "cache_dir", "manifest", "output_dir",
              "workers", "seed", "trace_timing", "prompt_template", "sw_neighbors", "edit_params",
              "optimizer", "reward", "scenarios", "factors"});
  RunConfig c;
  const auto vocab = get_or<std::string>(j, "vocabulary", "", "");
  if (vocab.empty()) throw ParseError("config needs \"vocabulary\"");
  c.vocabulary = resolve(base, vocab);
  c.normalize_vocabulary = get_or(j, "normalize_vocabulary", c.normalize_vocabulary, "");
  if (!j.contains("backend")) throw ParseError("config needs a \"backend\" section");
  parse_backend(j["backend"], base, c.backend);
  if (const auto p = get_or<std::string>(j, "cache_dir", "", ""); !p.empty()) c.cache_dir = resolve(base, p);
  if (const auto p = get_or<std::string>(j, "manifest", "", ""); !p.empty()) c.manifest = resolve(base, p);
  c.output_dir = resolve(base, get_or<std::string>(j, "output_dir", "results", ""));

  const auto workers = get_or<std::int64_t>(j, "workers", 1, "");
  if (workers < 1) throw InvalidArgument("workers must be >= 1");
  c.workers = static_cast<std::size_t>(workers);
  c.trace_timing = get_or(j, "trace_timing", c.trace_timing, "");

  auto& p = c.pipeline;
  p.global_seed = get_or<std::uint64_t>(j, "seed", 0, "");
  p.prompt_template = get_or(j, "prompt_template", p.prompt_template, "");
  prompt::validate_template(p.prompt_template);
  p.sw_neighbors = get_or(j, "sw_neighbors", p.sw_neighbors, "");
  if (j.contains("edit_params")) {
    const json& e = j["edit_params"];
    check_keys(e, "edit_params", {"guidance_scale", "steps"});
    p.edit_params.guidance_scale = get_or(e, "guidance_scale", p.edit_params.guidance_scale, "edit_params");
    p.edit_params.steps = get_or(e, "steps", p.edit_params.steps, "edit_params");
    if (p.edit_params.steps < 1) throw InvalidArgument("edit_params.steps must be >= 1");
  }
  if (j.contains("factors")) {
    for (const auto& f : get_or<std::vector<std::string>>(j, "factors", {}, "")) p.scenarios.add_factor(f);
  }
  if (j.contains("scenarios")) parse_scenarios(j["scenarios"], p.scenarios);
  if (j.contains("optimizer")) parse_optimizer(j["optimizer"], p.optimizer);
  p.optimizer.validate();
  if (j.contains("reward")) parse_reward(j["reward"], p.reward);
  return c;
}

RunConfig load_run_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(fmt::format("cannot read config file '{}'", path.string()));
  const json j = json::parse(in, nullptr, false);
  if (j.is_discarded()) throw ParseError(fmt::format("config file '{}' is not valid JSON", path.string()));
  const fs::path base = path.has_parent_path() ? path.parent_path() : fs::path(".");
  return parse_run_config(j, base);
}

BackendStack build_backend(const RunConfig& config, std::shared_ptr<const embedding::Vocabulary> vocab) {
  BackendStack s;
  s.vocab = std::move(vocab);
  if (config.backend.kind == BackendKind::oracle) {
    s.raw = std::make_shared<gateway::SyntheticOracle>(gateway::load_oracle_config(config.backend.oracle, s.vocab));
  } else {
    s.raw = std::make_shared<gateway::RemoteBackend>(config.backend.remote);
  }
  s.counter = std::make_shared<gateway::CountingBackend>(s.raw);
  s.top = s.counter;

  std::optional<fs::path> cache_dir = config.cache_dir;
  if (const char* env = std::getenv(kCacheDirEnv); env != nullptr && *env != '\0') cache_dir = fs::path(env);
  if (cache_dir) s.top = gateway::cached(s.top, *cache_dir);
  return s;
}

// ---- commands ------------------------------------------------------------------

namespace {

// Carries an exit code to the top-level handler.
struct CommandError : Error {
  CommandError(int code, std::string kind, const std::string& message)
      : Error(message), code(code), kind(std::move(kind)) {}
  int code;
  std::string kind;
};

[[noreturn]] void fail(int code, std::string kind, const std::string& message) {
  throw CommandError(code, std::move(kind), message);
}

struct Options {
  std::string config;
  std::string manifest;
  std::string record;
  std::string out;
  std::size_t workers = 0;
  std::string group_by;
};

RunConfig config_or_fail(const Options& o) {
  if (o.config.empty()) fail(kExitUsage, "usage", "--config is required");
  try {
    return load_run_config(o.config);
  } catch (const Error& e) {
    fail(kExitUsage, "config", e.what());
  }
}

std::shared_ptr<const embedding::Vocabulary> vocab_or_fail(const RunConfig& c) {
  try {
    return std::make_shared<const embedding::Vocabulary>(
        embedding::load_vocabulary_file(c.vocabulary, c.normalize_vocabulary));
  } catch (const Error& e) {
    fail(kExitUsage, "config", fmt::format("vocabulary '{}': {}", c.vocabulary.string(), e.what()));
  }
}

BackendStack backend_or_fail(const RunConfig& c, std::shared_ptr<const embedding::Vocabulary> vocab) {
  BackendStack s;
  try {
    s = build_backend(c, std::move(vocab));
  } catch (const Error& e) {
    fail(kExitUsage, "config", fmt::format("backend: {}", e.what()));
  }
  if (c.backend.kind == BackendKind::remote) {
    const auto& remote = static_cast<const gateway::RemoteBackend&>(*s.raw);
    if (!remote.healthy()) {
      fail(kExitUnreachable, "backend_unreachable",
           fmt::format("model service at {} is not healthy", c.backend.remote.base_url));
    }
  }
  return s;
}

fs::path manifest_path_or_fail(const Options& o, const RunConfig& c) {
  if (!o.manifest.empty()) return o.manifest;
  if (c.manifest) return *c.manifest;
  fail(kExitUsage, "usage", "no manifest given (--manifest or config \"manifest\")");
}

pipeline::Manifest manifest_or_fail(const fs::path& path, const RunConfig& c) {
  try {
    return pipeline::ingest_manifest(path, c.pipeline.scenarios);
  } catch (const ParseError& e) {
    fail(kExitInvalidInput, "manifest", e.what());
  }
}

const pipeline::StreetViewRecord& find_record(const pipeline::Manifest& m, const std::string& id) {
  if (id.empty()) fail(kExitUsage, "usage", "--record is required");
  for (const auto& r : m.records) {
    if (r.id == id) return r;
  }
  for (const auto& r : m.rejected) {
    if (r.id == id) fail(kExitInvalidInput, "invalid_record", fmt::format("record '{}': {}", id, r.reason));
  }
  fail(kExitInvalidInput, "invalid_record", fmt::format("record '{}' is not in the manifest", id));
}

fs::path out_dir(const Options& o, const RunConfig& c) { return o.out.empty() ? c.output_dir : fs::path(o.out); }

std::string_view status_name(pipeline::RecordStatus s) {
  switch (s) {
    case pipeline::RecordStatus::skipped:
      return "skipped";
    case pipeline::RecordStatus::processed:
      return "processed";
    case pipeline::RecordStatus::failed:
      return "failed";
  }
  return "?";
}

int cmd_run(const Options& o, std::ostream& out, CliStats* stats) {
  const RunConfig c = config_or_fail(o);
  const auto manifest = manifest_or_fail(manifest_path_or_fail(o, c), c);
  const auto& record = find_record(manifest, o.record);
  const auto vocab = vocab_or_fail(c);
  const auto stack = backend_or_fail(c, vocab);

  const auto outcome = pipeline::process_record(record, *vocab, *stack.top, c.pipeline);
  pipeline::Manifest single;
  single.entries = 1;
  const std::vector<pipeline::RecordOutcome> outcomes{outcome};
  pipeline::write_outputs(out_dir(o, c), outcomes, pipeline::summarize(single, outcomes), c.trace_timing);
  if (stats) stats->backend_calls = stack.counter->total_calls();
  spdlog::info("run {}: {} backend calls", record.id, stack.counter->total_calls());

  nlohmann::ordered_json report;
  report["record_id"] = record.id;
  report["status"] = status_name(outcome.status);
  if (outcome.optimization) {
    report["best_trigger"] = outcome.optimization->best_prompt.trigger;
    report["best_prompt"] = outcome.optimization->best_prompt.rendered;
    report["best_reward"] = outcome.optimization->best_reward;
    report["evaluations"] = outcome.optimization->trace.size();
  }
  out << report.dump() << '\n';

  if (outcome.status == pipeline::RecordStatus::failed) {
    const std::string detail = outcome.errors.empty() ? "record failed" : outcome.errors.front();
    if (outcome.transport_failure) fail(kExitUnreachable, "backend_unreachable", detail);
    fail(kExitAllFailed, "record_failed", detail);
  }
  return kExitOk;
}

int cmd_batch(const Options& o, std::ostream& out, CliStats* stats) {
  const RunConfig c = config_or_fail(o);
  const auto manifest = manifest_or_fail(manifest_path_or_fail(o, c), c);
  if (manifest.entries == 0) fail(kExitInvalidInput, "empty_manifest", "manifest has no entries");
  if (manifest.records.empty()) {
    fail(kExitInvalidInput, "empty_manifest", fmt::format("all {} manifest entries were rejected", manifest.entries));
  }
  const std::size_t workers = o.workers > 0 ? o.workers : c.workers;
  const auto vocab = vocab_or_fail(c);
  const auto stack = backend_or_fail(c, vocab);

  const auto outcomes = pipeline::run_batch(manifest.records, *vocab, *stack.top, c.pipeline, workers);
  const auto summary = pipeline::summarize(manifest, outcomes);
  pipeline::write_outputs(out_dir(o, c), outcomes, summary, c.trace_timing);
  if (stats) stats->backend_calls = stack.counter->total_calls();
  spdlog::info("batch: {} records on {} workers, {} backend calls", outcomes.size(), workers,
               stack.counter->total_calls());

  nlohmann::ordered_json report;
  report["manifest_entries"] = summary.manifest_entries;
  report["rejected"] = summary.rejected;
  report["skipped"] = summary.skipped;
  report["processed"] = summary.processed;
  report["failed"] = summary.failed;
  out << report.dump() << '\n';

  if (summary.processed > 0 && summary.failed == summary.processed) {
    const bool transport = std::all_of(outcomes.begin(), outcomes.end(), [](const auto& x) {
      return x.status != pipeline::RecordStatus::failed || x.transport_failure;
    });
    if (transport) fail(kExitUnreachable, "backend_unreachable", "every record failed on transport errors");
    fail(kExitAllFailed, "all_failed", fmt::format("all {} records failed", summary.failed));
  }
  return kExitOk;
}

int cmd_oracle_scan(const Options& o, std::ostream& out) {
  const RunConfig c = config_or_fail(o);
  if (c.backend.kind != BackendKind::oracle) {
    fail(kExitRefused, "refused", "oracle-scan evaluates every word and only runs on the oracle backend");
  }
  const auto manifest = manifest_or_fail(manifest_path_or_fail(o, c), c);
  const auto& record = find_record(manifest, o.record);
  const auto vocab = vocab_or_fail(c);

  gateway::SyntheticOracleConfig oracle;
  prompt::ScenarioSpec scenario;
  try {
    oracle = gateway::load_oracle_config(c.backend.oracle, vocab);
    scenario = c.pipeline.scenarios.resolve(record.scenario, record.factor);
  } catch (const Error& e) {
    fail(kExitUsage, "config", e.what());
  }
  const auto spec = c.pipeline.reward.for_scenario(scenario);
  const auto scan = gateway::scan_vocabulary(oracle, record.id, spec);

  std::string table = "word,safe,beauty,lively,reward\n";
  for (const auto& row : scan.rows) {
    table += fmt::format("{},{},{},{},{}\n", row.word, row.scores.safe, row.scores.beauty, row.scores.lively,
                         row.reward);
  }
  const auto& best = scan.rows.at(scan.argmax);
  nlohmann::ordered_json argmax;
  argmax["record_id"] = record.id;
  argmax["word"] = best.word;
  argmax["reward"] = best.reward;
  argmax["scores"] = {{"safe", best.scores.safe}, {"beauty", best.scores.beauty}, {"lively", best.scores.lively}};
  argmax["rows"] = scan.rows.size();
  argmax["optimum_word"] = oracle.optimum_word;

  const fs::path dir = out_dir(o, c) / "scan";
  image::write_file_atomic(dir / (record.id + ".csv"), table);
  image::write_file_atomic(dir / (record.id + ".argmax.json"), argmax.dump(2) + "\n");
  out << argmax.dump() << '\n';
  return kExitOk;
}

int cmd_report(const Options& o, std::ostream& out) {
  fs::path dir = o.out;
  if (dir.empty()) {
    if (o.config.empty()) fail(kExitUsage, "usage", "report needs --out or --config");
    dir = config_or_fail(o).output_dir;
  }
  std::vector<pipeline::GroupBy> groups{pipeline::GroupBy::method, pipeline::GroupBy::scenario,
                                        pipeline::GroupBy::morphology};
  if (!o.group_by.empty()) groups = {pipeline::parse_group_by(o.group_by)};

  if (!fs::is_regular_file(dir / "results.jsonl")) {
    fail(kExitInvalidInput, "no_results", fmt::format("no results.jsonl under '{}'", dir.string()));
  }
  std::vector<pipeline::MethodResult> results;
  try {
    results = pipeline::load_results(dir);
  } catch (const ParseError& e) {
    fail(kExitInvalidInput, "bad_results", e.what());
  }
  if (results.empty()) fail(kExitInvalidInput, "no_results", fmt::format("'{}' holds no results", dir.string()));

  for (auto g : groups) {
    if (g != pipeline::GroupBy::method && pipeline::only_method(results, pipeline::Method::BO).empty()) {
      fail(kExitInvalidInput, "no_results", "no optimizer results to group");
    }
    const auto table = pipeline::build_report(results, g);
    pipeline::write_report(dir, table);
    out << pipeline::render_markdown(table) << '\n';
  }
  return kExitOk;
}

void report_error(std::ostream& err, int code, std::string_view kind, std::string_view message) {
  nlohmann::ordered_json j;
  j["error"] = kind;
  j["message"] = message;
  j["exit_code"] = code;
  err << j.dump() << '\n';
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err, CliStats* stats) {
  CLI::App app{"Perception-driven trigger word optimization for street view renewal"};
  app.require_subcommand(1, 1);
  Options o;

  auto* run = app.add_subcommand("run", "Optimize one record");
  run->add_option("--config", o.config, "Run configuration (JSON)")->required();
  run->add_option("--manifest", o.manifest, "Manifest (JSON lines)");
  run->add_option("--record", o.record, "Record id")->required();
  run->add_option("--out", o.out, "Output directory");

  auto* batch = app.add_subcommand("batch", "Process every record of a manifest");
  batch->add_option("--config", o.config, "Run configuration (JSON)")->required();
  batch->add_option("--manifest", o.manifest, "Manifest (JSON lines)");
  batch->add_option("--out", o.out, "Output directory");
  batch->add_option("--workers", o.workers, "Worker threads")->check(CLI::PositiveNumber);

  auto* scan = app.add_subcommand("oracle-scan", "Evaluate every vocabulary word on the synthetic oracle");
  scan->add_option("--config", o.config, "Run configuration (JSON)")->required();
  scan->add_option("--manifest", o.manifest, "Manifest (JSON lines)");
  scan->add_option("--record", o.record, "Record id")->required();
  scan->add_option("--out", o.out, "Output directory");

  auto* report = app.add_subcommand("report", "Aggregate results.jsonl into report tables");
  report->add_option("--config", o.config, "Run configuration (JSON)");
  report->add_option("--out", o.out, "Results directory");
  report->add_option("--group-by", o.group_by, "method, scenario or morphology")
      ->check(CLI::IsMember({"method", "scenario", "morphology"}));

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    report_error(err, kExitUsage, "usage", e.what());
    return kExitUsage;
  }

  try {
    if (run->parsed()) return cmd_run(o, out, stats);
    if (batch->parsed()) return cmd_batch(o, out, stats);
    if (scan->parsed()) return cmd_oracle_scan(o, out);
    return cmd_report(o, out);
  } catch (const CommandError& e) {
    report_error(err, e.code, e.kind, e.what());
    return e.code;
  } catch (const TransportError& e) {
    report_error(err, kExitUnreachable, "backend_unreachable", e.what());
    return kExitUnreachable;
  } catch (const InvalidArgument& e) {
    report_error(err, kExitUsage, "invalid_argument", e.what());
    return kExitUsage;
  } catch (const std::exception& e) {
    report_error(err, kExitAllFailed, "internal", e.what());
    return kExitAllFailed;
  }
}

}  // namespace renewal::app
