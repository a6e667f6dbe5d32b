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

#include "faithrefine/eval.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include <spdlog/spdlog.h>

#include "faithrefine/error.hpp"
#include "faithrefine/random.hpp"
#include "faithrefine/subtasks.hpp"

namespace faithrefine {

double balanced_accuracy(const std::vector<Label>& golds, const std::vector<Label>& preds) {
  if (golds.size() != preds.size())
    throw InvalidArgument("golds and preds differ in length (" + std::to_string(golds.size()) +
                          " vs " + std::to_string(preds.size()) + ")");
  std::size_t tp = 0, fn = 0, tn = 0, fp = 0;
  for (std::size_t i = 0; i < golds.size(); ++i) {
    // The positive class is "unfaithful"; BACC is symmetric in the choice.
    if (golds[i] == Label::unfaithful) (preds[i] == Label::unfaithful ? tp : fn)++;
    else (preds[i] == Label::faithful ? tn : fp)++;
  }
  if (tp + fn == 0 || tn + fp == 0)
    throw InvalidArgument("balanced accuracy needs both classes among the gold labels");
  const double tpr = static_cast<double>(tp) / static_cast<double>(tp + fn);
  const double tnr = static_cast<double>(tn) / static_cast<double>(tn + fp);
  return (tpr + tnr) / 2.0;
}

DetectReport eval_detect(const std::vector<DetectExample>& examples, const AgentPool& pool,
                         const DebateConfig& config) {
  DetectReport report;
  std::vector<Label> golds, preds;
  for (const auto& ex : examples) {
    GroundedItem item{ex.item_id, ex.context, ex.topic, ex.sentence, TaskKind::summarization, {}};
    const SentenceSpan span{ex.sentence_index, ex.sentence, 0, ex.sentence.size()};
    DetectRecord rec{ex.item_id, ex.sentence_index, ex.gold_label, std::nullopt, 0, false};
    try {
      auto out = detect(item, span, pool, config);
      rec.pred = out.verdict.label;
      rec.rounds_used = out.verdict.rounds_used;
      rec.converged = out.verdict.converged;
      golds.push_back(ex.gold_label);
      preds.push_back(out.verdict.label);
      report.transcripts.push_back(std::move(out.transcript));
    } catch (const NoVerdictError& e) {
      spdlog::warn("detect: no verdict for {} sentence {}: {}", ex.item_id, ex.sentence_index,
                   e.what());
      ++report.no_verdict;
      report.transcripts.emplace_back();
    }
    report.records.push_back(std::move(rec));
  }
  report.bacc = balanced_accuracy(golds, preds);
  return report;
}

std::optional<Label> verdict_at_round(const DebateTranscript& transcript, int round) {
  if (transcript.rounds.empty() || round < 1) return std::nullopt;
  const auto r = std::min<std::size_t>(static_cast<std::size_t>(round), transcript.rounds.size());
  std::vector<std::pair<std::string, std::string>> votes;
  for (const auto& t : transcript.rounds[r - 1].turns)
    if (!t.abstained) votes.emplace_back(t.agent_id, t.answer);
  if (votes.empty()) return std::nullopt;
  const auto v = aggregate_votes(votes, {"yes", "no"}, TiePolicy::prefer_faithful, "yes");
  return v.winner == "yes" ? Label::faithful : Label::unfaithful;
}

RerankBuild build_rerank_instances(const std::vector<DocTopicPair>& pairs, int n_distractors,
                                   std::uint64_t seed) {
  if (n_distractors < 2 || n_distractors > 4)
    throw InvalidArgument("n_distractors must be in 2..4, got " + std::to_string(n_distractors));
  RerankBuild build;
  for (const auto& pair : pairs) {
    std::vector<const SystemSummary*> faithful, unfaithful;
    for (const auto& sys : pair.systems)
      (sys.label() == Label::faithful ? faithful : unfaithful).push_back(&sys);
    if (faithful.size() != 1) {
      ++build.skipped_not_unique;
      continue;
    }
    if (unfaithful.size() < static_cast<std::size_t>(n_distractors)) {
      ++build.skipped_too_few;
      continue;
    }

    RerankInstance inst;
    inst.pair_id = pair.doc_id + "|" + pair.topic.value_or("");
    inst.context = pair.context;
    inst.topic = pair.topic;
    inst.seed = derive_seed(seed, inst.pair_id, n_distractors);
    SeededRng rng(inst.seed);

    rng.shuffle(unfaithful);
    std::vector<const SystemSummary*> chosen{faithful.front()};
    chosen.insert(chosen.end(), unfaithful.begin(), unfaithful.begin() + n_distractors);
    rng.shuffle(chosen);
    for (std::size_t slot = 0; slot < chosen.size(); ++slot) {
      if (chosen[slot] == faithful.front()) inst.gold_position = slot;
      inst.candidates.push_back(chosen[slot]->summary);
      inst.provenance.push_back(chosen[slot]->system_id);
    }
    build.instances.push_back(std::move(inst));
  }
  if (build.skipped_not_unique + build.skipped_too_few > 0)
    spdlog::info("rerank instances: built {}, skipped {} without a unique faithful summary, {} "
                 "with too few unfaithful summaries",
                 build.instances.size(), build.skipped_not_unique, build.skipped_too_few);
  return build;
}

RerankReport eval_rerank(const std::vector<RerankInstance>& instances, const Reranker& reranker) {
  if (instances.empty()) throw InvalidArgument("no rerank instances to evaluate");
  RerankReport report;
  std::size_t correct = 0;
  for (const auto& inst : instances) {
    RerankRecord rec{inst.pair_id, std::nullopt, inst.gold_position, false};
    try {
      rec.chosen = reranker(inst);
    } catch (const NoVerdictError& e) {
      spdlog::warn("rerank: no verdict for {}: {}", inst.pair_id, e.what());
    }
    if (!rec.chosen) ++report.no_verdict;
    rec.correct = rec.chosen && *rec.chosen == inst.gold_position;
    correct += rec.correct;
    report.records.push_back(std::move(rec));
  }
  report.acc_at_1 = static_cast<double>(correct) / static_cast<double>(instances.size());
  return report;
}

Reranker debate_reranker(const AgentPool& pool, const DebateConfig& config,
                         std::vector<DebateTranscript>* transcripts) {
  return [&pool, config, transcripts](const RerankInstance& inst) -> std::optional<std::size_t> {
    const GroundedItem item{inst.pair_id, inst.context, inst.topic, inst.candidates.front(),
                            TaskKind::summarization, {}};
    try {
      auto out = rerank(item, inst.candidates, pool, config, inst.seed);
      if (transcripts) transcripts->push_back(std::move(out.transcript));
      return out.original_candidate_id;
    } catch (const NoVerdictError&) {
      if (transcripts) transcripts->emplace_back();
      throw;
    }
  };
}

std::string_view to_string(CritiqueCategory v) {
  switch (v) {
    case CritiqueCategory::error_match: return "error_match";
    case CritiqueCategory::error_no_match: return "error_no_match";
    case CritiqueCategory::no_error_no_match: return "no_error_no_match";
  }
  return "?";
}

CritiqueJudgment eval_critique(Agent& judge, const std::string& generated_critique,
                               const std::string& human_critique, const std::string& context,
                               const std::string& sentence) {
  if (generated_critique.empty() || human_critique.empty())
    throw InvalidArgument("critique matching needs two non-empty critiques");
  const auto prompt = render_prompt(TemplateId::critique_judge,
                                    {{"Document", context},
                                     {"Sentence", sentence},
                                     {"HumanCritique", human_critique},
                                     {"GeneratedCritique", generated_critique}});
  auto turn = ask_structured(judge, prompt, {"1", "2", "3"});
  if (turn.abstained) throw NoVerdictError("critique judge gave no answer in {1, 2, 3}");
  static constexpr CritiqueCategory kByAnswer[] = {CritiqueCategory::error_match,
                                                   CritiqueCategory::error_no_match,
                                                   CritiqueCategory::no_error_no_match};
  CritiqueJudgment j;
  j.category = kByAnswer[std::stoi(turn.answer) - 1];
  j.judge_reasoning = turn.reasoning;
  j.turn = std::move(turn);
  return j;
}

CritiqueSummary summarize_critiques(const std::vector<std::optional<CritiqueCategory>>& judgments) {
  CritiqueSummary s;
  for (const auto c : {CritiqueCategory::error_match, CritiqueCategory::error_no_match,
                       CritiqueCategory::no_error_no_match})
    s.counts[c] = 0;
  for (const auto& j : judgments) {
    if (!j) {
      ++s.no_verdict;
      continue;
    }
    ++s.judged;
    ++s.counts[*j];
  }
  if (s.judged > 0) {
    const auto pct = [&](CritiqueCategory c) {
      return 100.0 * static_cast<double>(s.counts[c]) / static_cast<double>(s.judged);
    };
    s.em = pct(CritiqueCategory::error_match);
    s.emm = pct(CritiqueCategory::error_no_match);
    s.ne = pct(CritiqueCategory::no_error_no_match);
  }
  return s;
}

FaithfulnessReport eval_faithfulness(const std::vector<GroundedItem>& outputs, ScorerClient& scorer,
                                     Agent* likert_judge) {
  if (outputs.empty()) throw InvalidArgument("no outputs to score");
  FaithfulnessReport report;
  double score_sum = 0.0, likert_sum = 0.0;
  std::size_t likert_n = 0;
  for (const auto& item : outputs) {
    FaithfulnessRecord rec;
    rec.item_id = item.id;
    std::vector<std::string> claims;
    for (auto& s : segment_output(item.output)) claims.push_back(std::move(s.text));
    rec.sentence_scores = scorer.score(item.context, claims);
    double sum = 0.0;
    for (const double v : rec.sentence_scores) sum += v;
    rec.score = sum / static_cast<double>(rec.sentence_scores.size());
    score_sum += rec.score;

    if (likert_judge) {
      const auto prompt = render_prompt(TemplateId::likert_judge,
                                        {{"Document", item.context}, {"Summary", item.output}});
      const auto turn = ask_structured(*likert_judge, prompt, {"1", "2", "3", "4", "5"});
      if (turn.abstained) {
        spdlog::warn("likert: no verdict for {}; excluded", item.id);
        ++report.likert_excluded;
      } else {
        rec.likert = std::stoi(turn.answer);
        likert_sum += *rec.likert;
        ++likert_n;
      }
    }
    report.records.push_back(std::move(rec));
  }
  report.score_avg = score_sum / static_cast<double>(outputs.size());
  if (likert_n > 0) report.likert_avg = likert_sum / static_cast<double>(likert_n);
  return report;
}

std::vector<GroundedItem> refined_as_items(const std::vector<RefinementResult>& results,
                                           const std::vector<GroundedItem>& sources) {
  std::unordered_map<std::string, const GroundedItem*> by_id;
  for (const auto& s : sources) by_id.emplace(s.id, &s);
  std::vector<GroundedItem> items;
  for (const auto& r : results) {
    const auto it = by_id.find(r.item_id);
    if (it == by_id.end()) throw DataError("result for unknown item '" + r.item_id + "'");
    GroundedItem item = *it->second;
    item.output = r.refined;
    item.sentences.reset();
    items.push_back(std::move(item));
  }
  return items;
}

FaithfulnessReport eval_refine_faithfulness(const std::vector<RefinementResult>& results,
                                            const std::vector<GroundedItem>& sources,
                                            ScorerClient& scorer, Agent* likert_judge) {
  if (results.empty()) throw InvalidArgument("no refinement results to score");
  return eval_faithfulness(refined_as_items(results, sources), scorer, likert_judge);
}

namespace {

void check_paired(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size())
    throw InvalidArgument("paired score lists differ in length (" + std::to_string(a.size()) +
                          " vs " + std::to_string(b.size()) + ")");
  if (a.empty()) throw InvalidArgument("paired score lists are empty");
}

// mean(a) <= mean(b) over a resample, compared on summed differences with a
// tolerance so that exact ties survive floating-point rounding.
bool not_better(double delta_sum, std::size_t n) { return delta_sum <= 1e-12 * static_cast<double>(n); }

}  // namespace

double paired_bootstrap(const std::vector<double>& a, const std::vector<double>& b,
                        int n_resamples, std::uint64_t seed) {
  check_paired(a, b);
  if (n_resamples < 1) throw InvalidArgument("n_resamples must be at least 1");
  const std::size_t n = a.size();
  std::vector<double> delta(n);
  for (std::size_t i = 0; i < n; ++i) delta[i] = a[i] - b[i];
  SeededRng rng(seed);
  int hits = 0;
  for (int r = 0; r < n_resamples; ++r) {
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) sum += delta[rng.below(n)];
    hits += not_better(sum, n);
  }
  return static_cast<double>(hits) / static_cast<double>(n_resamples);
}

double paired_bootstrap_exhaustive(const std::vector<double>& a, const std::vector<double>& b) {
  check_paired(a, b);
  const std::size_t n = a.size();
  if (n > 8) throw InvalidArgument("exhaustive bootstrap supports at most 8 items");
  std::vector<double> delta(n);
  for (std::size_t i = 0; i < n; ++i) delta[i] = a[i] - b[i];
  std::size_t total = 1;
  for (std::size_t i = 0; i < n; ++i) total *= n;
  std::size_t hits = 0;
  std::vector<std::size_t> idx(n, 0);
  for (std::size_t k = 0; k < total; ++k) {
    double sum = 0.0;
    for (const auto i : idx) sum += delta[i];
    hits += not_better(sum, n);
    for (std::size_t d = 0; d < n && ++idx[d] == n; ++d) idx[d] = 0;
  }
  return static_cast<double>(hits) / static_cast<double>(total);
}

}  // namespace faithrefine
