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

// Value types shared by every stage of the refinement engine.

#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace faithrefine {

enum class TaskKind { summarization, grounded_qa };

/// A source context and the generated text that should be faithful to it.
struct GroundedItem {
  std::string id;
  std::string context;
  std::optional<std::string> topic;
  std::string output;
  TaskKind task_kind = TaskKind::summarization;
  /// Optional pre-segmented sentences; when present they replace segment_output.
  std::optional<std::vector<std::string>> sentences;

  /// Throws InvalidArgument when id, context or output is empty.
  void validate() const;
};

/// A sentence of an output, addressed by byte offsets into that output.
struct SentenceSpan {
  std::size_t index = 0;
  std::string text;
  std::size_t char_start = 0;
  std::size_t char_end = 0;

  friend bool operator==(const SentenceSpan&, const SentenceSpan&) = default;
};

enum class Label { faithful, unfaithful };

struct SentenceVerdict {
  std::size_t sentence_index = 0;
  Label label = Label::faithful;
  std::string reasoning;
  std::vector<std::pair<std::string, Label>> per_agent_final;
  bool converged = false;
  int rounds_used = 1;
};

/// CritiqueRecord::sentence_index value for a critique of the whole output.
inline constexpr int kWholeOutput = -1;

enum class CritiqueSource { detect_cot, critique_subtask };

struct CritiqueRecord {
  int sentence_index = kWholeOutput;
  std::string text;
  std::optional<std::string> error_span;
  std::optional<std::string> suggested_fix;
  CritiqueSource source = CritiqueSource::critique_subtask;
};

enum class ParsePath { strict_json, fenced_json, keyword_fallback };

/// One agent call (plus at most one re-ask) inside a debate round.
struct AgentTurn {
  std::string agent_id;
  std::string prompt;
  std::string raw;
  std::string reasoning;
  std::string answer;
  bool abstained = false;
  std::optional<ParsePath> parse_path;
  /// Backend calls spent on this turn: 1, or 2 when a re-ask was issued.
  int calls = 1;
};

struct DebateRound {
  std::vector<AgentTurn> turns;
};

enum class DebateKind { closed_set, generative };

struct DebateTranscript {
  std::string subtask;
  int sentence_index = kWholeOutput;
  DebateKind kind = DebateKind::closed_set;
  std::vector<DebateRound> rounds;
  bool converged = false;
  /// Closed-set only: the final answer came from a tie-break.
  bool tied = false;
  /// Closed-set consensus or aggregated answer.
  std::string final_answer;
  /// Generative only: every agent's final-round output, in agent order.
  std::vector<std::pair<std::string, std::string>> finals;

  int rounds_used() const { return static_cast<int>(rounds.size()); }
  int total_calls() const;
};

enum class PipelineMode { direct, detect_refine, critique_refine, dcr };

/// Backend calls issued per pipeline stage.
struct StageCalls {
  int detect = 0;
  int critique = 0;
  int refine = 0;

  int total() const { return detect + critique + refine; }
  friend bool operator==(const StageCalls&, const StageCalls&) = default;
};

struct RefinementResult {
  std::string item_id;
  std::string original;
  std::string refined;
  std::vector<SentenceVerdict> verdicts;
  std::vector<CritiqueRecord> critiques;
  std::vector<DebateTranscript> transcripts;
  PipelineMode pipeline_mode = PipelineMode::dcr;
  StageCalls calls;
};

std::string_view to_string(TaskKind v);
std::string_view to_string(Label v);
std::string_view to_string(CritiqueSource v);
std::string_view to_string(ParsePath v);
std::string_view to_string(DebateKind v);
std::string_view to_string(PipelineMode v);

// Parsers throw ConfigError on an unknown name.
TaskKind parse_task_kind(std::string_view s);
Label parse_label(std::string_view s);
CritiqueSource parse_critique_source(std::string_view s);
ParsePath parse_parse_path(std::string_view s);
DebateKind parse_debate_kind(std::string_view s);
PipelineMode parse_pipeline_mode(std::string_view s);

/// Splits a generated output into sentences with a deterministic rule set.
///
/// A boundary follows '.', '?' or '!' (plus any closing quotes or brackets)
/// when the next non-space character is an uppercase letter, a digit or an
/// opening quote, unless the token ending in the period is on the shipped
/// abbreviation list. Spans exclude the whitespace
/// between sentences. A whitespace-only output yields one span holding it.
/// Throws InvalidArgument on an empty output.
std::vector<SentenceSpan> segment_output(std::string_view output);

/// Locates pre-segmented sentences inside `output`, in order.
/// Throws DataError when a sentence cannot be found after the previous one.
std::vector<SentenceSpan> align_sentences(std::string_view output,
                                          const std::vector<std::string>& sentences);

/// Sentences of the item: its pre-segmented list if present, else segment_output.
std::vector<SentenceSpan> item_sentences(const GroundedItem& item);

/// The abbreviation exception list the splitter uses.
const std::vector<std::string>& abbreviations();

}  // namespace faithrefine
