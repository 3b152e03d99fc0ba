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

#include <array>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "renewal/embedding_store.hpp"
#include "renewal/gateway.hpp"
#include "renewal/optimizer.hpp"
#include "renewal/perception_metrics.hpp"
#include "renewal/prompt_engine.hpp"

namespace renewal::pipeline {

using perception::PerceptionScores;

// ---- records -----------------------------------------------------------------

/// Precomputed result of a third-party method (e.g. DiffEdit) for reports.
struct ExternalResult {
  std::string label;
  std::string trigger;
  PerceptionScores scores;
};

struct StreetViewRecord {
  std::string id;
  std::filesystem::path image_path;
  bool upd_detected = false;
  std::optional<prompt::DisorderFactor> factor;
  std::optional<std::filesystem::path> mask_path;
  double hw_ratio = 0.0;
  prompt::ScenarioId scenario = prompt::ScenarioId::NI;
  std::vector<ExternalResult> external;
};

struct Rejection {
  std::size_t line = 0;
  std::string id;
  std::string reason;
};

struct Manifest {
  std::vector<StreetViewRecord> records;
  std::vector<Rejection> rejected;
  std::size_t entries = 0;
};

/// JSON-lines manifest; relative paths resolve against the manifest's
/// directory. Invalid records are rejected individually with a reason.
/// Throws ParseError if the file cannot be read.
Manifest ingest_manifest(const std::filesystem::path& path,
                         const prompt::ScenarioTable& scenarios = prompt::ScenarioTable::defaults());

// ---- morphology --------------------------------------------------------------

enum class MorphologyBucket { BarelyPopulated, LivingSpaces, UrbanHub };

inline constexpr std::array<MorphologyBucket, 3> kAllBuckets{
    MorphologyBucket::BarelyPopulated, MorphologyBucket::LivingSpaces, MorphologyBucket::UrbanHub};

/// alpha < 0.5 | 0.5 <= alpha <= 1.5 | alpha > 1.5. Throws on negative alpha.
MorphologyBucket bucket_morphology(double alpha);
std::string_view to_string(MorphologyBucket b);

// ---- per-method results ------------------------------------------------------

enum class Method { MP, SW, BO, EXTERNAL };

std::string_view to_string(Method m);

struct MethodResult {
  Method method = Method::BO;
  /// "MP", "SW", "BO" or the external method's label.
  std::string label;
  std::string record_id;
  prompt::ScenarioId scenario = prompt::ScenarioId::NI;
  double hw_ratio = 0.0;
  std::string trigger;
  PerceptionScores raw;
  PerceptionScores edited;
  /// Improvement rate per metric, indexed by Metric.
  std::array<double, 3> rates{};
  double reward = 0.0;
};

nlohmann::ordered_json to_json(const MethodResult& r);
/// Throws ParseError, including when stored rates disagree with the scores.
MethodResult method_result_from_json(const nlohmann::json& j);

// ---- processing ----------------------------------------------------------------

struct RewardSettings {
  perception::RewardMode mode = perception::RewardMode::single;
  /// Single mode: unset means "the scenario's objective metric".
  std::optional<Metric> objective;
  std::array<double, 3> weights{1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0};
  double epsilon = perception::kDefaultEpsilon;

  perception::RewardSpec for_scenario(const prompt::ScenarioSpec& scenario) const;
};

struct PipelineConfig {
  prompt::ScenarioTable scenarios = prompt::ScenarioTable::defaults();
  std::string prompt_template{prompt::kDefaultTemplate};
  bo::OptimizerConfig optimizer;
  RewardSettings reward;
  gateway::EditParams edit_params;
  std::uint64_t global_seed = 0;
  /// Neighbours of the manual word evaluated by the SW baseline.
  std::size_t sw_neighbors = 10;
};

/// Per-record seed derived from (global seed, record id).
std::uint64_t record_seed(std::uint64_t global_seed, std::string_view record_id);

/// Returns `config` with the GP lengthscale resolved for `vocab`, so records
/// processed separately share one value.
PipelineConfig with_resolved_lengthscale(PipelineConfig config, const embedding::Vocabulary& vocab);

enum class RecordStatus { skipped, processed, failed };

struct RecordOutcome {
  std::string record_id;
  RecordStatus status = RecordStatus::skipped;
  std::vector<MethodResult> results;
  std::vector<std::string> errors;
  bool transport_failure = false;
  std::optional<bo::OptimizationOutcome> optimization;
};

// MP, SW and BO for one record, sharing one raw-score fetch and one seed.
// Records without detected disorder are returned as skipped with no backend
// calls. The SW candidate set is the manual word plus its nearest
// neighbours, so SW never does worse than MP.
RecordOutcome process_record(const StreetViewRecord& record, const embedding::Vocabulary& vocab,
                             gateway::Backend& backend, const PipelineConfig& config);

/// Processes records on `workers` threads; outcomes come back sorted by id.
std::vector<RecordOutcome> run_batch(const std::vector<StreetViewRecord>& records,
                                     const embedding::Vocabulary& vocab, gateway::Backend& backend,
                                     const PipelineConfig& config, std::size_t workers);

// ---- reports -------------------------------------------------------------------

enum class GroupBy { method, scenario, morphology };

GroupBy parse_group_by(std::string_view s);
std::string_view to_string(GroupBy g);

struct ReportRow {
  std::string group;
  std::size_t count = 0;
  /// Mean improvement rate per metric (fractions, not percent); NaN when empty.
  std::array<double, 3> mean_rates{};
};

struct ReportTable {
  GroupBy group_by = GroupBy::method;
  std::vector<ReportRow> rows;
};

/// Mean improvement rates per group. Every known group gets a row, empty
/// ones with count 0. Throws InvalidArgument on empty input.
ReportTable aggregate(const std::vector<MethodResult>& results, GroupBy group_by);

std::vector<MethodResult> only_method(const std::vector<MethodResult>& results, Method m);

/// Method reports cover every method; scenario and morphology reports cover
/// the optimizer's results only.
ReportTable build_report(const std::vector<MethodResult>& results, GroupBy group_by);

std::string render_csv(const ReportTable& table);
std::string render_markdown(const ReportTable& table);

struct BatchSummary {
  std::size_t manifest_entries = 0;
  std::size_t rejected = 0;
  std::size_t skipped = 0;
  std::size_t processed = 0;
  std::size_t failed = 0;
};

BatchSummary summarize(const Manifest& manifest, const std::vector<RecordOutcome>& outcomes);

/// Writes traces/<id>.jsonl, best/<id>.json, best/<id>.png, results.jsonl,
/// report_<group>.{csv,md} and summary.json under `out_dir`.
void write_outputs(const std::filesystem::path& out_dir, const std::vector<RecordOutcome>& outcomes,
                   const BatchSummary& summary, bool include_timing);

/// Writes report_<group>.{csv,md}.
void write_report(const std::filesystem::path& out_dir, const ReportTable& table);

/// Reads results.jsonl from a results directory.
std::vector<MethodResult> load_results(const std::filesystem::path& results_dir);

}  // namespace renewal::pipeline
