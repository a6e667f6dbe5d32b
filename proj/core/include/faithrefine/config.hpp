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

// Run configuration files.
//
//   {
//     "seed": 7,
//     "parallelism": 1,
//     "models": {"gpt": {AgentSpec...}, "claude": {AgentSpec...}},
//     "preset": {"name": "mamm_refine", "model_a": "gpt", "model_b": "claude"},
//     "pipeline": {PipelineConfig...},
//     "judge": {AgentSpec..., "model"?: "gpt"},
//     "eval": {"n_distractors": 2, "split": "test", "bootstrap_resamples": 1000},
//     "scorer": {"url": "http://localhost:8000", "stub": false, "mode": "model"}
//   }
//
// Exactly one of "preset" and "pipeline" describes the pipeline; eval-only
// runs may omit both. Pipeline keys mirror PipelineConfig field names.

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "faithrefine/dataset.hpp"
#include "faithrefine/gateway.hpp"
#include "faithrefine/pipeline.hpp"
#include "faithrefine/scorer.hpp"

namespace faithrefine {

struct PresetSelection {
  PresetName name = PresetName::mamm_refine;
  std::string model_a = "model_a";
  std::optional<std::string> model_b = "model_b";
};

struct EvalSettings {
  int n_distractors = 2;
  std::optional<Split> split;
  int bootstrap_resamples = 1000;
};

struct ScorerSettings {
  std::optional<std::string> url;
  bool stub = false;
  ScoreMode mode = ScoreMode::model;
};

struct RunConfig {
  std::uint64_t seed = 0;
  int parallelism = 1;
  /// Named AgentSpec templates.
  nlohmann::json models = nlohmann::json::object();
  std::optional<PresetSelection> preset;
  std::optional<PipelineConfig> pipeline;
  std::optional<AgentSpec> judge;
  EvalSettings eval;
  ScorerSettings scorer;

  /// The pipeline to run: the preset expanded over its models, or the
  /// explicit pipeline, with the run seed applied. Throws ConfigError if neither is set.
  PipelineConfig resolved_pipeline() const;
};

/// Throws ConfigError on any schema violation or unknown key.
RunConfig parse_run_config(const nlohmann::json& j);
RunConfig load_run_config(const std::filesystem::path& path);

/// The model template `name` as an AgentSpec. Throws ConfigError if undefined.
AgentSpec model_template(const RunConfig& config, const std::string& name);

}  // namespace faithrefine
