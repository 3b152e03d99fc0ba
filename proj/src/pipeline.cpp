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

#include "renewal/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <thread>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "renewal/hashing.hpp"
#include "renewal/image.hpp"

namespace renewal::pipeline {

namespace fs = std::filesystem;
using nlohmann::json;

// ---- manifest ----------------------------------------------------------------

namespace {

bool valid_record_id(std::string_view id) {
  if (id.empty() || id == "." || id == "..") return false;
  return std::all_of(id.begin(), id.end(), [](char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
           c == '.' || c == '_' || c == '-';
  });
}

PerceptionScores scores_from_json(const json& j) {
  if (!j.is_object()) throw ParseError("scores must be an object");
  PerceptionScores s;
  for (Metric m : kAllMetrics) {
    const auto it = j.find(std::string(to_string(m)));
    if (it == j.end() || !it->is_number()) {
      throw ParseError(fmt::format("scores.{} missing or not a number", to_string(m)));
    }
    s.get(m) = it->get<double>();
  }
  return s;
}

json scores_to_json(const PerceptionScores& s) {
  return {{"safe", s.safe}, {"beauty", s.beauty}, {"lively", s.lively}};
}

// Returns the record or throws ParseError with the rejection reason.
StreetViewRecord parse_record(const json& j, const fs::path& base,
                              const prompt::ScenarioTable& scenarios) {
  if (!j.is_object()) throw ParseError("entry is not a JSON object");
  const auto field = [&](const char* key) -> const json& {
    const auto it = j.find(key);
    if (it == j.end()) throw ParseError(fmt::format("missing field '{}'", key));
    return *it;
  };
  const auto str = [&](const char* key) {
    const json& v = field(key);
    if (!v.is_string() || v.get<std::string>().empty()) {
      throw ParseError(fmt::format("field '{}' must be a non-empty string", key));
    }
    return v.get<std::string>();
  };
  const auto optional_str = [&](const char* key) -> std::optional<std::string> {
    const auto it = j.find(key);
    if (it == j.end() || it->is_null()) return std::nullopt;
    if (!it->is_string() || it->get<std::string>().empty()) {
      throw ParseError(fmt::format("field '{}' must be a non-empty string or null", key));
    }
    return it->get<std::string>();
  };

  StreetViewRecord r;
  r.id = str("id");
  if (!valid_record_id(r.id)) {
    throw ParseError(fmt::format("id '{}' may only contain letters, digits, '.', '_' and '-'", r.id));
  }
  r.image_path = base / str("image");
  const json& upd = field("upd_detected");
  if (!upd.is_boolean()) throw ParseError("field 'upd_detected' must be a boolean");
  r.upd_detected = upd.get<bool>();
  const json& hw = field("hw_ratio");
  if (!hw.is_number()) throw ParseError("field 'hw_ratio' must be a number");
  r.hw_ratio = hw.get<double>();
  if (!std::isfinite(r.hw_ratio) || r.hw_ratio < 0.0) {
    throw ParseError(fmt::format("hw_ratio {} must be a finite non-negative number", r.hw_ratio));
  }
  try {
    r.scenario = prompt::parse_scenario(str("scenario"));
  } catch (const InvalidArgument& e) {
    throw ParseError(e.what());
  }

  const auto factor = optional_str("factor");
  const auto mask = optional_str("mask");
  if (r.upd_detected) {
    if (!factor) throw ParseError("upd_detected is true but 'factor' is missing");
    if (!mask) throw ParseError("upd_detected is true but 'mask' is missing");
    const auto canon = scenarios.canonical_factor(*factor);
    if (!canon) throw ParseError(fmt::format("unknown disorder factor '{}'", *factor));
    try {
      scenarios.resolve(r.scenario, *canon);
    } catch (const InvalidArgument& e) {
      throw ParseError(e.what());
    }
    r.factor = *canon;
    r.mask_path = base / *mask;
  } else if (factor || mask) {
    throw ParseError("'factor' and 'mask' must be null when upd_detected is false");
  }

  if (!fs::is_regular_file(r.image_path)) {
    throw ParseError(fmt::format("image '{}' does not exist", r.image_path.string()));
  }
  if (r.mask_path) {
    if (!fs::is_regular_file(*r.mask_path)) {
      throw ParseError(fmt::format("mask '{}' does not exist", r.mask_path->string()));
    }
    try {
      const auto img = image::inspect_png(image::read_file(r.image_path));
      const auto msk = image::inspect_png(image::read_file(*r.mask_path));
      if (img.width != msk.width || img.height != msk.height) {
        throw ParseError(fmt::format("mask {}x{} does not match image {}x{}", msk.width, msk.height,
                                     img.width, img.height));
      }
      if (msk.channels != 1 || msk.bit_depth != 8) {
        throw ParseError("mask must be a single-channel 8-bit PNG");
      }
    } catch (const ParseError&) {
      throw;
    } catch (const Error& e) {
      throw ParseError(e.what());
    }
  }

  if (const auto it = j.find("external_results"); it != j.end() && !it->is_null()) {
    if (!it->is_array()) throw ParseError("'external_results' must be an array");
    for (const auto& e : *it) {
      if (!e.is_object() || !e.contains("label") || !e["label"].is_string() ||
          e["label"].get<std::string>().empty()) {
        throw ParseError("external result needs a non-empty 'label'");
      }
      ExternalResult x;
      x.label = e["label"].get<std::string>();
      if (x.label == "MP" || x.label == "SW" || x.label == "BO") {
        throw ParseError(fmt::format("external label '{}' collides with a built-in method", x.label));
      }
      if (e.contains("trigger") && e["trigger"].is_string()) x.trigger = e["trigger"].get<std::string>();
      if (!e.contains("scores")) throw ParseError("external result needs 'scores'");
      x.scores = scores_from_json(e["scores"]);
      r.external.push_back(std::move(x));
    }
  }
  return r;
}

}  // namespace

Manifest ingest_manifest(const fs::path& path, const prompt::ScenarioTable& scenarios) {
  std::ifstream in(path);
  if (!in) throw ParseError(fmt::format("cannot read manifest '{}'", path.string()));
  const fs::path base = path.has_parent_path() ? path.parent_path() : fs::path(".");

  Manifest m;
  std::set<std::string> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    ++m.entries;
    const json j = json::parse(line, nullptr, false);
    std::string id;
    if (!j.is_discarded() && j.is_object() && j.contains("id") && j["id"].is_string()) {
      id = j["id"].get<std::string>();
    }
    try {
      if (j.is_discarded()) throw ParseError("line is not valid JSON");
      StreetViewRecord r = parse_record(j, base, scenarios);
      if (!seen.insert(r.id).second) throw ParseError(fmt::format("duplicate id '{}'", r.id));
      m.records.push_back(std::move(r));
    } catch (const ParseError& e) {
      spdlog::warn("manifest line {}: rejected ({})", line_no, e.what());
      m.rejected.push_back({line_no, id, e.what()});
    }
  }
  return m;
}

// ---- morphology --------------------------------------------------------------

MorphologyBucket bucket_morphology(double alpha) {
  if (!(alpha >= 0.0)) throw InvalidArgument(fmt::format("H/W ratio {} must be >= 0", alpha));
  if (alpha < 0.5) return MorphologyBucket::BarelyPopulated;
  if (alpha <= 1.5) return MorphologyBucket::LivingSpaces;
  return MorphologyBucket::UrbanHub;
}

std::string_view to_string(MorphologyBucket b) {
  switch (b) {
    case MorphologyBucket::BarelyPopulated:
      return "BarelyPopulated";
    case MorphologyBucket::LivingSpaces:
      return "LivingSpaces";
    case MorphologyBucket::UrbanHub:
      return "UrbanHub";
  }
  return "?";
}

// ---- method results ------------------------------------------------------------

std::string_view to_string(Method m) {
  switch (m) {
    case Method::MP:
      return "MP";
    case Method::SW:
      return "SW";
    case Method::BO:
      return "BO";
    case Method::EXTERNAL:
      return "EXTERNAL";
  }
  return "?";
}

nlohmann::ordered_json to_json(const MethodResult& r) {
  nlohmann::ordered_json j;
  j["record_id"] = r.record_id;
  j["method"] = to_string(r.method);
  j["label"] = r.label;
  j["scenario"] = prompt::to_string(r.scenario);
  j["hw_ratio"] = r.hw_ratio;
  j["trigger"] = r.trigger;
  j["raw"] = scores_to_json(r.raw);
  j["edited"] = scores_to_json(r.edited);
  j["rates"] = {{"safe", r.rates[0]}, {"beauty", r.rates[1]}, {"lively", r.rates[2]}};
  j["reward"] = r.reward;
  return j;
}

MethodResult method_result_from_json(const json& j) {
  try {
    MethodResult r;
    r.record_id = j.at("record_id").get<std::string>();
    const std::string method = j.at("method").get<std::string>();
    if (method == "MP") {
      r.method = Method::MP;
    } else if (method == "SW") {
      r.method = Method::SW;
    } else if (method == "BO") {
      r.method = Method::BO;
    } else if (method == "EXTERNAL") {
      r.method = Method::EXTERNAL;
    } else {
      throw ParseError(fmt::format("unknown method '{}'", method));
    }
    r.label = j.at("label").get<std::string>();
    r.scenario = prompt::parse_scenario(j.at("scenario").get<std::string>());
    r.hw_ratio = j.at("hw_ratio").get<double>();
    r.trigger = j.at("trigger").get<std::string>();
    r.raw = scores_from_json(j.at("raw"));
    r.edited = scores_from_json(j.at("edited"));
    const PerceptionScores rates = scores_from_json(j.at("rates"));
    r.rates = {rates.safe, rates.beauty, rates.lively};
    r.reward = j.at("reward").get<double>();
    const auto recomputed = perception::improvement_rates(r.raw, r.edited);
    for (std::size_t i = 0; i < 3; ++i) {
      if (std::abs(recomputed[i] - r.rates[i]) > 1e-12) {
        throw ParseError(fmt::format("record {}: stored rates disagree with scores", r.record_id));
      }
    }
    return r;
  } catch (const json::exception& e) {
    throw ParseError(fmt::format("malformed result: {}", e.what()));
  } catch (const InvalidArgument& e) {
    throw ParseError(e.what());
  } catch (const UndefinedBaseline& e) {
    throw ParseError(e.what());
  }
}

// ---- processing ----------------------------------------------------------------

perception::RewardSpec RewardSettings::for_scenario(const prompt::ScenarioSpec& scenario) const {
  if (mode == perception::RewardMode::weighted) return perception::RewardSpec::weighted(weights, epsilon);
  return perception::RewardSpec::single(objective.value_or(scenario.objective), epsilon);
}

std::uint64_t record_seed(std::uint64_t global_seed, std::string_view record_id) {
  return derive_seed(global_seed, record_id);
}

PipelineConfig with_resolved_lengthscale(PipelineConfig config, const embedding::Vocabulary& vocab) {
  if (config.optimizer.lengthscale_mode == bo::LengthscaleMode::median_heuristic) {
    bo::OptimizerConfig probe = config.optimizer;
    probe.rng_seed = config.global_seed;
    config.optimizer.fixed_lengthscale = bo::resolve_lengthscale(probe, vocab);
    config.optimizer.lengthscale_mode = bo::LengthscaleMode::fixed;
  }
  return config;
}

namespace {

MethodResult make_result(Method method, std::string label, const StreetViewRecord& record,
                         std::string trigger, const PerceptionScores& raw,
                         const PerceptionScores& edited, double reward, double epsilon) {
  MethodResult r;
  r.method = method;
  r.label = std::move(label);
  r.record_id = record.id;
  r.scenario = record.scenario;
  r.hw_ratio = record.hw_ratio;
  r.trigger = std::move(trigger);
  r.raw = raw;
  r.edited = edited;
  r.rates = perception::improvement_rates(raw, edited, epsilon);
  r.reward = reward;
  return r;
}

}  // namespace

RecordOutcome process_record(const StreetViewRecord& record, const embedding::Vocabulary& vocab,
                             gateway::Backend& backend, const PipelineConfig& input_config) {
  RecordOutcome out;
  out.record_id = record.id;
  if (!record.upd_detected) {
    out.status = RecordStatus::skipped;
    return out;
  }
  const PipelineConfig config = with_resolved_lengthscale(input_config, vocab);

  const auto fail = [&](std::string message, bool transport) {
    spdlog::error("record {}: {}", record.id, message);
    out.status = RecordStatus::failed;
    out.errors.push_back(std::move(message));
    out.transport_failure = out.transport_failure || transport;
    return out;
  };

  bo::EditTask task;
  prompt::ScenarioSpec scenario;
  PerceptionScores raw;
  try {
    if (!record.factor || !record.mask_path) throw InvalidArgument("record lacks factor or mask");
    scenario = config.scenarios.resolve(record.scenario, *record.factor);
    task.record_id = record.id;
    task.image = image::read_file(record.image_path);
    task.mask = image::read_file(*record.mask_path);
    task.target_word = scenario.target_word;
    task.prompt_template = config.prompt_template;
    task.seed = record_seed(config.global_seed, record.id);
    task.params = config.edit_params;
    raw = backend.score_raw({task.image, record.id});
    perception::check_scores(raw);
  } catch (const TransportError& e) {
    return fail(fmt::format("raw scoring failed: {}", e.what()), true);
  } catch (const std::exception& e) {
    return fail(fmt::format("record setup failed: {}", e.what()), false);
  }

  const perception::RewardSpec reward_spec = config.reward.for_scenario(scenario);
  bo::TriggerEvaluator evaluator(task, backend, reward_spec, raw);
  bool any_transport = false;
  const auto note_failure = [&](std::string_view method, const bo::Evaluation& ev) {
    out.errors.push_back(fmt::format("{}: {}", method, ev.error));
    any_transport = any_transport || ev.transport_error;
  };

  // MP baseline.
  const std::string manual = prompt::manual_prompt_word(scenario.objective);
  const bo::Evaluation& mp = evaluator.evaluate(manual);
  if (mp.ok) {
    out.results.push_back(make_result(Method::MP, "MP", record, manual, raw, mp.result.scores,
                                      mp.reward, reward_spec.epsilon));
  } else {
    note_failure("MP", mp);
  }

  // SW baseline: the manual word and its nearest neighbours.
  std::vector<std::string> sw_words{manual};
  if (vocab.contains(manual) && vocab.size() > 1 && config.sw_neighbors > 0) {
    const std::size_t k = std::min(config.sw_neighbors, vocab.size() - 1);
    for (const auto& n : embedding::nearest_neighbors(vocab, manual, k, true)) sw_words.push_back(n.word);
  }
  const bo::Evaluation* sw_best = nullptr;
  std::string sw_word;
  for (const auto& w : sw_words) {
    const bo::Evaluation& ev = evaluator.evaluate(w);
    if (ev.ok && (sw_best == nullptr || ev.reward > sw_best->reward)) {
      sw_best = &ev;
      sw_word = w;
    }
  }
  if (sw_best != nullptr) {
    out.results.push_back(make_result(Method::SW, "SW", record, sw_word, raw, sw_best->result.scores,
                                      sw_best->reward, reward_spec.epsilon));
  } else {
    out.errors.push_back("SW: every candidate evaluation failed");
  }

  // Optimizer.
  bo::OptimizerConfig opt = config.optimizer;
  opt.rng_seed = derive_seed(task.seed, "optimizer");
  try {
    auto result = bo::optimize(evaluator, vocab, scenario, opt);
    out.results.push_back(make_result(Method::BO, "BO", record, result.best_prompt.trigger, raw,
                                      result.best_result.scores, result.best_reward,
                                      reward_spec.epsilon));
    out.optimization = std::move(result);
  } catch (const std::exception& e) {
    out.errors.push_back(fmt::format("BO: {}", e.what()));
  }

  for (const auto& x : record.external) {
    try {
      out.results.push_back(make_result(Method::EXTERNAL, x.label, record, x.trigger, raw, x.scores,
                                        perception::reward(raw, x.scores, reward_spec),
                                        reward_spec.epsilon));
    } catch (const std::exception& e) {
      out.errors.push_back(fmt::format("{}: {}", x.label, e.what()));
    }
  }

  out.status = out.optimization ? RecordStatus::processed : RecordStatus::failed;
  out.transport_failure = any_transport && !out.optimization;
  return out;
}

std::vector<RecordOutcome> run_batch(const std::vector<StreetViewRecord>& records,
                                     const embedding::Vocabulary& vocab, gateway::Backend& backend,
                                     const PipelineConfig& input_config, std::size_t workers) {
  if (workers == 0) throw InvalidArgument("worker count must be >= 1");
  const PipelineConfig config = with_resolved_lengthscale(input_config, vocab);
  std::vector<RecordOutcome> outcomes(records.size());
  std::atomic<std::size_t> next{0};
  const auto work = [&] {
    for (std::size_t i = next.fetch_add(1); i < records.size(); i = next.fetch_add(1)) {
      outcomes[i] = process_record(records[i], vocab, backend, config);
    }
  };
  const std::size_t n = std::min(workers, std::max<std::size_t>(records.size(), 1));
  if (n == 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(n);
    for (std::size_t t = 0; t < n; ++t) pool.emplace_back(work);
  }
  std::sort(outcomes.begin(), outcomes.end(),
            [](const RecordOutcome& a, const RecordOutcome& b) { return a.record_id < b.record_id; });
  return outcomes;
}

// ---- reports -------------------------------------------------------------------

GroupBy parse_group_by(std::string_view s) {
  if (s == "method") return GroupBy::method;
  if (s == "scenario") return GroupBy::scenario;
  if (s == "morphology") return GroupBy::morphology;
  throw InvalidArgument(fmt::format("unknown grouping '{}'", s));
}

std::string_view to_string(GroupBy g) {
  switch (g) {
    case GroupBy::method:
      return "method";
    case GroupBy::scenario:
      return "scenario";
    case GroupBy::morphology:
      return "morphology";
  }
  return "?";
}

ReportTable aggregate(const std::vector<MethodResult>& results, GroupBy group_by) {
  if (results.empty()) throw InvalidArgument("aggregate needs at least one result");

  std::vector<std::string> groups;
  const auto key = [&](const MethodResult& r) -> std::string {
    switch (group_by) {
      case GroupBy::method:
        return r.label;
      case GroupBy::scenario:
        return std::string(prompt::to_string(r.scenario));
      case GroupBy::morphology:
        return std::string(to_string(bucket_morphology(r.hw_ratio)));
    }
    return {};
  };
  switch (group_by) {
    case GroupBy::method: {
      groups = {"MP", "SW"};
      std::set<std::string> external;
      for (const auto& r : results) {
        if (r.method == Method::EXTERNAL) external.insert(r.label);
      }
      groups.insert(groups.end(), external.begin(), external.end());
      groups.push_back("BO");
      break;
    }
    case GroupBy::scenario:
      for (auto id : prompt::kAllScenarios) groups.emplace_back(prompt::to_string(id));
      break;
    case GroupBy::morphology:
      for (auto b : kAllBuckets) groups.emplace_back(to_string(b));
      break;
  }

  std::map<std::string, std::pair<std::size_t, std::array<double, 3>>> sums;
  for (const auto& r : results) {
    auto& [count, total] = sums[key(r)];
    ++count;
    for (std::size_t i = 0; i < 3; ++i) total[i] += r.rates[i];
  }

  ReportTable table;
  table.group_by = group_by;
  for (const auto& g : groups) {
    ReportRow row;
    row.group = g;
    const auto it = sums.find(g);
    if (it == sums.end()) {
      row.mean_rates.fill(std::nan(""));
    } else {
      row.count = it->second.first;
      for (std::size_t i = 0; i < 3; ++i) {
        row.mean_rates[i] = it->second.second[i] / static_cast<double>(row.count);
      }
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

std::vector<MethodResult> only_method(const std::vector<MethodResult>& results, Method m) {
  std::vector<MethodResult> out;
  std::copy_if(results.begin(), results.end(), std::back_inserter(out),
               [m](const MethodResult& r) { return r.method == m; });
  return out;
}

ReportTable build_report(const std::vector<MethodResult>& results, GroupBy group_by) {
  if (group_by == GroupBy::method) return aggregate(results, group_by);
  return aggregate(only_method(results, Method::BO), group_by);
}

namespace {

std::string percent(double fraction) {
  if (std::isnan(fraction)) return "";
  return fmt::format("{:.2f}", 100.0 * fraction);
}

}  // namespace

std::string render_csv(const ReportTable& table) {
  std::string out = fmt::format("{},count,safe_pct,beauty_pct,lively_pct\n", to_string(table.group_by));
  for (const auto& row : table.rows) {
    out += fmt::format("{},{},{},{},{}\n", row.group, row.count, percent(row.mean_rates[0]),
                       percent(row.mean_rates[1]), percent(row.mean_rates[2]));
  }
  return out;
}

std::string render_markdown(const ReportTable& table) {
  const auto cell = [](double v) { return std::isnan(v) ? std::string() : percent(v) + "%"; };
  std::string out = fmt::format("| {} | n | Safe | Beauty | Lively |\n|---|---:|---:|---:|---:|\n",
                                to_string(table.group_by));
  for (const auto& row : table.rows) {
    out += fmt::format("| {} | {} | {} | {} | {} |\n", row.group, row.count, cell(row.mean_rates[0]),
                       cell(row.mean_rates[1]), cell(row.mean_rates[2]));
  }
  return out;
}

BatchSummary summarize(const Manifest& manifest, const std::vector<RecordOutcome>& outcomes) {
  BatchSummary s;
  s.manifest_entries = manifest.entries;
  s.rejected = manifest.rejected.size();
  for (const auto& o : outcomes) {
    switch (o.status) {
      case RecordStatus::skipped:
        ++s.skipped;
        break;
      case RecordStatus::processed:
        ++s.processed;
        break;
      case RecordStatus::failed:
        ++s.processed;
        ++s.failed;
        break;
    }
  }
  return s;
}

void write_report(const fs::path& out_dir, const ReportTable& table) {
  const std::string stem = fmt::format("report_{}", to_string(table.group_by));
  image::write_file_atomic(out_dir / (stem + ".csv"), render_csv(table));
  image::write_file_atomic(out_dir / (stem + ".md"), render_markdown(table));
}

void write_outputs(const fs::path& out_dir, const std::vector<RecordOutcome>& outcomes,
                   const BatchSummary& summary, bool include_timing) {
  fs::create_directories(out_dir);
  std::vector<MethodResult> all;
  json failures = json::array();
  for (const auto& o : outcomes) {
    all.insert(all.end(), o.results.begin(), o.results.end());
    if (!o.errors.empty()) failures.push_back({{"record_id", o.record_id}, {"errors", o.errors}});
    if (!o.optimization) continue;
    const auto& opt = *o.optimization;
    std::ostringstream trace;
    bo::write_trace(trace, o.record_id, opt.trace, include_timing);
    image::write_file_atomic(out_dir / "traces" / (o.record_id + ".jsonl"), trace.str());

    nlohmann::ordered_json best;
    best["record_id"] = o.record_id;
    best["trigger"] = opt.best_prompt.trigger;
    best["target"] = opt.best_prompt.target;
    best["prompt"] = opt.best_prompt.rendered;
    best["reward"] = opt.best_reward;
    best["scores"] = scores_to_json(opt.best_result.scores);
    best["model_id"] = opt.best_result.model_id;
    best["edited_image"] = o.record_id + ".png";
    image::write_file_atomic(out_dir / "best" / (o.record_id + ".json"), best.dump(2) + "\n");
    image::write_file_atomic(out_dir / "best" / (o.record_id + ".png"), opt.best_result.edited_image);
  }

  std::string lines;
  for (const auto& r : all) lines += to_json(r).dump() + "\n";
  image::write_file_atomic(out_dir / "results.jsonl", lines);

  if (!all.empty()) {
    for (GroupBy g : {GroupBy::method, GroupBy::scenario, GroupBy::morphology}) {
      if (g != GroupBy::method && only_method(all, Method::BO).empty()) continue;
      write_report(out_dir, build_report(all, g));
    }
  }

  nlohmann::ordered_json s;
  s["manifest_entries"] = summary.manifest_entries;
  s["rejected"] = summary.rejected;
  s["skipped"] = summary.skipped;
  s["processed"] = summary.processed;
  s["failed"] = summary.failed;
  s["failures"] = failures;
  image::write_file_atomic(out_dir / "summary.json", s.dump(2) + "\n");
}

std::vector<MethodResult> load_results(const fs::path& results_dir) {
  const fs::path path = results_dir / "results.jsonl";
  std::ifstream in(path);
  if (!in) throw ParseError(fmt::format("cannot read '{}'", path.string()));
  std::vector<MethodResult> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const json j = json::parse(line, nullptr, false);
    if (j.is_discarded()) throw ParseError(fmt::format("'{}' holds a malformed line", path.string()));
    out.push_back(method_result_from_json(j));
  }
  return out;
}

}  // namespace renewal::pipeline
