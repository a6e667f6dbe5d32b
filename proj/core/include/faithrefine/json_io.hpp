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

// JSON encodings of the library's value types. Decoders throw ConfigError
// (configuration types) or DataError (data types) on schema violations.

#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "faithrefine/debate.hpp"
#include "faithrefine/domain.hpp"
#include "faithrefine/gateway.hpp"
#include "faithrefine/pipeline.hpp"

namespace faithrefine {

using nlohmann::json;

/// Serializes with invalid UTF-8 replaced rather than throwing.
std::string dump_json(const json& j, int indent = -1);

void to_json(json& j, const GroundedItem& v);
void from_json(const json& j, GroundedItem& v);

void to_json(json& j, const SentenceSpan& v);
void to_json(json& j, const SentenceVerdict& v);
void from_json(const json& j, SentenceVerdict& v);
void to_json(json& j, const CritiqueRecord& v);
void from_json(const json& j, CritiqueRecord& v);
void to_json(json& j, const AgentTurn& v);
void from_json(const json& j, AgentTurn& v);
void to_json(json& j, const DebateTranscript& v);
void from_json(const json& j, DebateTranscript& v);
void to_json(json& j, const StageCalls& v);

/// A result line. `transcript_refs` replaces inline transcripts when non-empty.
json result_to_json(const RefinementResult& r, const std::vector<std::string>& transcript_refs = {});
/// Reads a result line; transcripts given by reference are left empty.
RefinementResult result_from_json(const json& j);

void to_json(json& j, const AgentSpec& v);
/// Accepts the fields of AgentSpec; unknown keys are rejected.
void from_json(const json& j, AgentSpec& v);

void to_json(json& j, const DebateConfig& v);
void from_json(const json& j, DebateConfig& v);

void to_json(json& j, const PipelineConfig& v);

/// Decodes a PipelineConfig. Pool entries are AgentSpec objects; an entry may
/// name a template from `models` under the key "model", whose fields it then
/// overrides.
PipelineConfig pipeline_config_from_json(const json& j, const json& models = json::object());

/// Reads a JSONL file, one JSON value per non-blank line.
/// Throws DataError naming the line on malformed JSON.
std::vector<json> read_jsonl(const std::filesystem::path& path);

}  // namespace faithrefine
