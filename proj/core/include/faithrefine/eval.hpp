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

// Evaluation: detection balanced accuracy, rerank Acc@1, critique matching,
// refined-output faithfulness and paired bootstrap significance.

#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "faithrefine/dataset.hpp"
#include "faithrefine/debate.hpp"
#include "faithrefine/domain.hpp"
#include "faithrefine/gateway.hpp"
#include "faithrefine/scorer.hpp"

namespace faithrefine {

// ---------------------------------------------------------------------------
// Detection

/// Mean of the per-class recalls. Throws InvalidArgument on a length mismatch
/// or when either class is absent from `golds`.
double balanced_accuracy(const std::vector<Label>& golds, const std::vector<Label>& preds);

struct DetectRecord {
  std::string item_id;
  std::size_t sentence_index = 0;
  Label gold = Label::faithful;
  /// Empty when every agent abstained.
  std::optional<Label> pred;
  int rounds_used = 0;
  bool converged = false;
};

struct DetectReport {
  /// Over examples with a verdict.
  double bacc = 0.0;
  std::vector<DetectRecord> records;
  std::size_t no_verdict = 0;
  /// Aligned with `records`; empty transcripts for no-verdict examples.
  std::vector<DebateTranscript> transcripts;
};

/// Runs the detect debate on each example in order.
DetectReport eval_detect(const std::vector<DetectExample>& examples, const AgentPool& pool,
                         const DebateConfig& config);

/// The detect verdict the debate would have produced had it stopped after
/// `round` (clamped to the rounds actually run). Empty if that round has no votes.
std::optional<Label> verdict_at_round(const DebateTranscript& transcript, int round);

// ---------------------------------------------------------------------------
// Rerank

struct RerankInstance {
  std::string pair_id;
  std::string context;
  std::optional<std::string> topic;
  /// Presented order.
  std::vector<std::string> candidates;
  std::size_t gold_position = 0;
  /// System id of each candidate, aligned with `candidates`.
  std::vector<std::string> provenance;
  std::uint64_t seed = 0;
};

struct RerankBuild {
  std::vector<RerankInstance> instances;
  /// Pairs without exactly one faithful summary.
  std::size_t skipped_not_unique = 0;
  /// Pairs with fewer unfaithful summaries than requested distractors.
  std::size_t skipped_too_few = 0;
};

/// One instance per document-topic pair with a uniquely faithful summary:
/// the gold plus `n_distractors` (2..4) unfaithful summaries drawn without
/// replacement, shuffled. Throws InvalidArgument on an out-of-range count.
RerankBuild build_rerank_instances(const std::vector<DocTopicPair>& pairs, int n_distractors,
                                   std::uint64_t seed);

/// Returns the chosen slot, or nothing for a no-verdict.
using Reranker = std::function<std::optional<std::size_t>(const RerankInstance&)>;

struct RerankRecord {
  std::string pair_id;
  std::optional<std::size_t> chosen;
  std::size_t gold_position = 0;
  bool correct = false;
};

struct RerankReport {
  double acc_at_1 = 0.0;
  std::vector<RerankRecord> records;
  std::size_t no_verdict = 0;
};

/// Throws InvalidArgument when `instances` is empty. No-verdicts count as incorrect.
RerankReport eval_rerank(const std::vector<RerankInstance>& instances, const Reranker& reranker);

/// A reranker backed by the rerank debate. Transcripts are appended to
/// `transcripts` when given.
Reranker debate_reranker(const AgentPool& pool, const DebateConfig& config,
                         std::vector<DebateTranscript>* transcripts = nullptr);

// ---------------------------------------------------------------------------
// Critique

enum class CritiqueCategory { error_match, error_no_match, no_error_no_match };

std::string_view to_string(CritiqueCategory v);

struct CritiqueJudgment {
  CritiqueCategory category = CritiqueCategory::error_match;
  std::string judge_reasoning;
  AgentTurn turn;
};

/// Asks the judge to compare the critiques over {1, 2, 3}.
/// Throws InvalidArgument on an empty critique, NoVerdictError if the judge abstains.
CritiqueJudgment eval_critique(Agent& judge, const std::string& generated_critique,
                               const std::string& human_critique, const std::string& context,
                               const std::string& sentence);

struct CritiqueSummary {
  std::size_t judged = 0;
  std::size_t no_verdict = 0;
  std::map<CritiqueCategory, std::size_t> counts;
  /// Percentages of judged critiques.
  double em = 0.0;
  double emm = 0.0;
  double ne = 0.0;
};

/// Empty entries are no-verdicts and are excluded from the percentages.
CritiqueSummary summarize_critiques(const std::vector<std::optional<CritiqueCategory>>& judgments);

// ---------------------------------------------------------------------------
// Refinement

struct FaithfulnessRecord {
  std::string item_id;
  double score = 0.0;
  std::vector<double> sentence_scores;
  std::optional<int> likert;
};

struct FaithfulnessReport {
  double score_avg = 0.0;
  /// Empty without a judge, or when every item was excluded.
  std::optional<double> likert_avg;
  std::size_t likert_excluded = 0;
  std::vector<FaithfulnessRecord> records;
};

/// Segments each output, scores every sentence against its context and
/// averages per output, then across outputs. With a judge, each output also
/// gets a 1-5 Likert rating; no-verdicts are excluded. Throws InvalidArgument
/// when `outputs` is empty; scorer errors propagate.
FaithfulnessReport eval_faithfulness(const std::vector<GroundedItem>& outputs, ScorerClient& scorer,
                                     Agent* likert_judge = nullptr);

/// The refined outputs as items, taking each context from `sources` by id.
/// Throws DataError on an unknown id.
std::vector<GroundedItem> refined_as_items(const std::vector<RefinementResult>& results,
                                           const std::vector<GroundedItem>& sources);

FaithfulnessReport eval_refine_faithfulness(const std::vector<RefinementResult>& results,
                                            const std::vector<GroundedItem>& sources,
                                            ScorerClient& scorer, Agent* likert_judge = nullptr);

// ---------------------------------------------------------------------------
// Significance

/// Fraction of `n_resamples` paired resamples (item indices drawn with
/// replacement) in which mean(a) <= mean(b). Small p means a improves on b.
/// Throws InvalidArgument on a length mismatch, empty input or n_resamples < 1.
double paired_bootstrap(const std::vector<double>& a, const std::vector<double>& b,
                        int n_resamples, std::uint64_t seed);

/// The same statistic over all n^n ordered resamples. Throws InvalidArgument
/// when n exceeds 8.
double paired_bootstrap_exhaustive(const std::vector<double>& a, const std::vector<double>& b);

}  // namespace faithrefine
