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
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "renewal/pipeline.hpp"
#include "renewal/remote_backend.hpp"

namespace renewal::app {

// Process exit codes. Stable; documented in the README.
enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 2,        // bad flags, unreadable or invalid config
  kExitUnreachable = 3,  // remote backend down
  kExitInvalidInput = 4, // unknown/invalid record, empty manifest, no results
  kExitAllFailed = 5,
  kExitRefused = 6,      // oracle-scan on a remote backend
};

enum class BackendKind { oracle, remote };

struct BackendSettings {
  BackendKind kind = BackendKind::oracle;
  /// Oracle settings, read from a file or given inline.
  nlohmann::json oracle = nlohmann::json::object();
  gateway::RemoteOptions remote;
};

// Everything a command needs, read from one JSON file. Relative paths are
// resolved against the file's directory.
struct RunConfig {
  std::filesystem::path vocabulary;
  bool normalize_vocabulary = true;
  BackendSettings backend;
  std::optional<std::filesystem::path> cache_dir;
  std::optional<std::filesystem::path> manifest;
  std::filesystem::path output_dir;
  std::size_t workers = 1;
  bool trace_timing = false;
  pipeline::PipelineConfig pipeline;
};

/// Throws ParseError (unreadable file, bad JSON, unknown keys, wrong types)
/// or InvalidArgument (out-of-range values).
RunConfig parse_run_config(const nlohmann::json& j, const std::filesystem::path& base_dir);
RunConfig load_run_config(const std::filesystem::path& path);

/// Environment override for the cache directory.
inline constexpr const char* kCacheDirEnv = "RENEWAL_CACHE_DIR";

// Backend stack built from a RunConfig: counter over the raw backend,
// optionally wrapped by the on-disk cache.
struct BackendStack {
  std::shared_ptr<const embedding::Vocabulary> vocab;
  std::shared_ptr<gateway::Backend> raw;
  std::shared_ptr<gateway::CountingBackend> counter;
  std::shared_ptr<gateway::Backend> top;
};

BackendStack build_backend(const RunConfig& config,
                           std::shared_ptr<const embedding::Vocabulary> vocab);

struct CliStats {
  std::uint64_t backend_calls = 0;
};

/// Runs one command. `args` excludes the program name. Errors are reported
/// on `err` as a single JSON object. Returns the exit code.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err,
            CliStats* stats = nullptr);

}  // namespace renewal::app
