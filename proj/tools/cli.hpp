// Copyright 2026 The faithrefine Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace faithrefine::cli {

enum ExitCode : int {
  kSuccess = 0,
  kConfigError = 1,
  kDataError = 2,
  kPartialFailure = 3,
};

struct CommonOptions {
  std::filesystem::path config;
  std::filesystem::path input;
  std::filesystem::path out;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> preset;
  std::optional<int> max_rounds;
  std::optional<std::filesystem::path> transcripts_dir;
  std::optional<int> parallelism;
  /// The command line, recorded in the manifest.
  std::vector<std::string> argv;
};

struct EvalOptions : CommonOptions {
  std::string task;  // detect | rerank | critique | refine
  std::optional<std::filesystem::path> baseline;
  std::optional<std::string> scorer_url;
  bool scorer_stub = false;
  std::optional<int> n_distractors;
};

/// Runs the pipeline over a grounded-items file and writes results.jsonl,
/// one transcript file per debate and manifest.json into `out`.
int cmd_refine(const CommonOptions& options);

/// Runs one evaluation and writes metrics.json, a per-item CSV, transcripts
/// and manifest.json into `out`.
int cmd_eval(const EvalOptions& options);

/// Parses the command line and dispatches.
int run(int argc, char** argv);

}  // namespace faithrefine::cli
