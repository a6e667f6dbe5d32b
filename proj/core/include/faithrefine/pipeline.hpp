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
#include <optional>
#include <string_view>
#include <vector>

#include "faithrefine/debate.hpp"
#include "faithrefine/domain.hpp"
#include "faithrefine/gateway.hpp"
#include "faithrefine/subtasks.hpp"

namespace faithrefine {

/// Agent specs per subtask role. Every entry becomes its own agent instance,
/// so [A, A] is two independent instances of model A.
struct PoolSpecs {
  std::vector<AgentSpec> detect_pool;
  std::vector<AgentSpec> critique_pool;
  std::vector<AgentSpec> refine_pool;
  std::vector<AgentSpec> rerank_pool;
};

struct PipelineConfig {
  PipelineMode mode = PipelineMode::dcr;
  PoolSpecs pools;
  Framing critique_framing = Framing::single;
  Framing refine_framing = Framing::single;
  /// Unset: critique_subtask for dcr, detect_cot otherwise.
  std::optional<CritiqueSource> critique_source;
  DebateConfig debate;
  /// Base seed for every rerank shuffle.
  std::uint64_t seed = 0;

  CritiqueSource effective_critique_source() const;
  /// Throws ConfigError when a required pool is missing or the combination is invalid.
  void validate() const;
};

enum class PresetName { sasm, samm, masm, mamm_refine };

std::string_view to_string(PresetName v);
PresetName parse_preset_name(std::string_view s);

/// Expands a named recipe over two abstract models. model_b is required for
/// samm and mamm_refine. Agent ids are "<role>-<n>".
///
///   sasm         detect [A]     critique [A]          refine [A]
///   samm         detect [B]     critique [B]          refine [A]
///   masm         detect [A, A]  critique [A, A] rerank refine [A, A] rerank
///   mamm_refine  detect [A, B]  critique [B, B] rerank refine [A, A] rerank
///
/// All presets run dcr with the critique subtask and a 10-round debate cap.
PipelineConfig preset(PresetName name, const AgentSpec& model_a,
                      const std::optional<AgentSpec>& model_b = std::nullopt);

/// A pipeline with live agents. Scripted agents keep their replay position
/// across items, so items must be run in a fixed order for reproducibility.
class Pipeline {
 public:
  explicit Pipeline(PipelineConfig config, const BackendFactory& factory = {});

  /// Throws StageError carrying the item id and failing stage.
  RefinementResult run(const GroundedItem& item) const;

  const PipelineConfig& config() const noexcept { return config_; }
  const AgentPoolAssignment& pools() const noexcept { return pools_; }

 private:
  PipelineConfig config_;
  AgentPoolAssignment pools_;
};

RefinementResult run_pipeline(const PipelineConfig& config, const GroundedItem& item);

}  // namespace faithrefine
