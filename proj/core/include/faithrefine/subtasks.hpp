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

// The refinement subtasks: detect, critique, refine and rerank. Each one runs
// as a single agent or as a debate over a pool of agents.

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "faithrefine/debate.hpp"
#include "faithrefine/domain.hpp"
#include "faithrefine/gateway.hpp"

namespace faithrefine {

/// How a generative subtask uses a pool: one agent, draft-then-select, or a
/// generative debate.
enum class Framing { single, rerank, generate };

std::string_view to_string(Framing v);
Framing parse_framing(std::string_view s);

/// Live pools bound to the four subtask roles.
struct AgentPoolAssignment {
  AgentPool detect_pool;
  AgentPool critique_pool;
  AgentPool refine_pool;
  AgentPool rerank_pool;
};

struct RerankOutcome {
  /// 0-based slot in the presented (shuffled) order.
  std::size_t chosen_index = 0;
  /// Index into the caller's candidate list.
  std::size_t original_candidate_id = 0;
  /// permutation[slot] is the original index shown at that slot.
  std::vector<std::size_t> permutation;
  DebateTranscript transcript;
};

/// What the candidates being reranked are; selects the prompt.
enum class CandidateKind { summaries, critiques };

/// Shuffles the candidates with `seed`, debates over {"1".."k"} and maps the
/// chosen slot back. `target` is the sentence being critiqued (critiques
/// only; defaults to the full output). Throws NoVerdictError.
RerankOutcome rerank(const GroundedItem& item, const std::vector<std::string>& candidates,
                     const AgentPool& pool, const DebateConfig& config, std::uint64_t seed,
                     CandidateKind kind = CandidateKind::summaries,
                     std::optional<std::string> target = std::nullopt);

struct DetectOutcome {
  SentenceVerdict verdict;
  DebateTranscript transcript;
};

/// Closed-set debate over {yes, no}; "yes" means faithful. The verdict's
/// reasoning is that of the lowest-indexed agent holding the final answer.
DetectOutcome detect(const GroundedItem& item, const SentenceSpan& sentence,
                     const AgentPool& pool, const DebateConfig& config);

struct CritiqueOutcome {
  /// One record for single/rerank, every agent's final for generate.
  std::vector<CritiqueRecord> critiques;
  /// Index into `critiques` of the record used downstream.
  std::size_t primary = 0;
  std::vector<DebateTranscript> transcripts;
  std::optional<RerankOutcome> selection;
};

/// Critiques one sentence, or the whole output when `sentence` is empty.
CritiqueOutcome critique(const GroundedItem& item, const std::optional<SentenceSpan>& sentence,
                         const AgentPool& pool, Framing framing, const DebateConfig& config,
                         std::uint64_t seed);

struct RefineOutcome {
  std::string refined;
  /// Generate framing: every agent's final rewrite.
  std::vector<std::pair<std::string, std::string>> finals;
  std::vector<DebateTranscript> transcripts;
  std::optional<RerankOutcome> selection;
};

/// Rewrites item.output using the critiques as feedback. Throws
/// InvalidArgument when the selected rewrite is empty.
RefineOutcome refine(const GroundedItem& item, const std::vector<CritiqueRecord>& critiques,
                     const std::vector<SentenceSpan>& sentences, const AgentPool& pool,
                     Framing framing, const DebateConfig& config, std::uint64_t seed);

/// Refinement without critiques, using the direct-refinement prompt.
RefineOutcome refine_direct(const GroundedItem& item, const AgentPool& pool, Framing framing,
                            const DebateConfig& config, std::uint64_t seed);

/// Text after "The error span:" up to the end of that line (or a following
/// "Suggested fix"), trimmed; empty when the marker is missing.
std::optional<std::string> extract_error_span(std::string_view critique_text);

/// Text after "Suggested fix:" (case-insensitive), trimmed.
std::optional<std::string> extract_suggested_fix(std::string_view critique_text);

CritiqueRecord make_critique_record(int sentence_index, std::string text, CritiqueSource source);

/// The refine prompt's feedback block: one entry per critique, sentence-indexed.
std::string feedback_block(const std::vector<CritiqueRecord>& critiques,
                           const std::vector<SentenceSpan>& sentences);

}  // namespace faithrefine
