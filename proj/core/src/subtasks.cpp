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

#include "faithrefine/subtasks.hpp"

#include <algorithm>

#include "faithrefine/error.hpp"
#include "faithrefine/random.hpp"

namespace faithrefine {

std::string_view to_string(Framing v) {
  switch (v) {
    case Framing::single: return "single";
    case Framing::rerank: return "rerank";
    case Framing::generate: return "generate";
  }
  return "?";
}

Framing parse_framing(std::string_view s) {
  if (s == "single") return Framing::single;
  if (s == "rerank") return Framing::rerank;
  if (s == "generate") return Framing::generate;
  throw ConfigError("unknown framing '" + std::string(s) + "'");
}

namespace {

constexpr std::string_view kErrorSpanMarker = "The error span:";

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r'; }

std::string_view trim(std::string_view s) {
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

std::size_t find_ci(std::string_view haystack, std::string_view needle, std::size_t from = 0) {
  auto lower = [](char c) { return (c >= 'A' && c <= 'Z') ? char(c - 'A' + 'a') : c; };
  if (needle.size() > haystack.size()) return std::string_view::npos;
  for (std::size_t i = from; i + needle.size() <= haystack.size(); ++i) {
    std::size_t k = 0;
    while (k < needle.size() && lower(haystack[i + k]) == lower(needle[k])) ++k;
    if (k == needle.size()) return i;
  }
  return std::string_view::npos;
}

std::string topic_of(const GroundedItem& item) { return item.topic.value_or(""); }

bool blank(std::string_view s) { return trim(s).empty(); }

DebateConfig single_round(const DebateConfig& config) {
  DebateConfig c = config;
  c.max_rounds = 1;
  return c;
}

void label(DebateTranscript& t, std::string subtask, int sentence_index) {
  t.subtask = std::move(subtask);
  t.sentence_index = sentence_index;
}

struct Generated {
  std::vector<std::string> texts;
  std::size_t primary = 0;
  std::vector<DebateTranscript> transcripts;
  std::optional<RerankOutcome> selection;
};

// Shared single / rerank / generate machinery for critique and refine.
Generated generate_with_framing(const GroundedItem& item, const std::string& prompt,
                                const AgentPool& pool, Framing framing,
                                const DebateConfig& config, std::uint64_t seed,
                                const std::string& stage, int sentence_index,
                                CandidateKind kind, const std::optional<std::string>& target) {
  if (pool.empty()) throw InvalidArgument(stage + ": empty agent pool");
  Generated out;
  switch (framing) {
    case Framing::single: {
      auto g = run_generative_debate(AgentPool{pool.front()}, prompt, single_round(config));
      label(g.transcript, stage, sentence_index);
      out.texts.push_back(g.finals.front().second);
      out.transcripts.push_back(std::move(g.transcript));
      break;
    }
    case Framing::rerank: {
      auto drafts = run_generative_debate(pool, prompt, single_round(config));
      label(drafts.transcript, stage + "_draft", sentence_index);
      for (const auto& [agent, text] : drafts.finals) out.texts.push_back(text);
      out.transcripts.push_back(std::move(drafts.transcript));
      if (out.texts.size() >= 2) {
        auto chosen = rerank(item, out.texts, pool, config, seed, kind, target);
        label(chosen.transcript, stage + "_rerank", sentence_index);
        out.primary = chosen.original_candidate_id;
        out.transcripts.push_back(chosen.transcript);
        out.selection = std::move(chosen);
      }
      break;
    }
    case Framing::generate: {
      auto g = run_generative_debate(pool, prompt, config);
      label(g.transcript, stage + "_generate", sentence_index);
      for (const auto& [agent, text] : g.finals) out.texts.push_back(text);
      out.transcripts.push_back(std::move(g.transcript));
      break;
    }
  }
  return out;
}

RefineOutcome finish_refine(Generated g, Framing framing) {
  RefineOutcome out;
  if (blank(g.texts.at(g.primary))) throw InvalidArgument("refined output is empty");
  out.refined = g.texts[g.primary];
  if (framing == Framing::generate) out.finals = g.transcripts.front().finals;
  out.transcripts = std::move(g.transcripts);
  out.selection = std::move(g.selection);
  return out;
}

}  // namespace

std::optional<std::string> extract_error_span(std::string_view text) {
  const auto marker = text.find(kErrorSpanMarker);
  if (marker == std::string_view::npos) return std::nullopt;
  std::string_view rest = text.substr(marker + kErrorSpanMarker.size());
  rest = std::string_view(rest.data(), static_cast<std::size_t>(
                                            std::find(rest.begin(), rest.end(), '\n') - rest.begin()));
  if (const auto fix = find_ci(rest, "suggested fix"); fix != std::string_view::npos)
    rest = rest.substr(0, fix);
  rest = trim(rest);
  if (rest.size() >= 2 && ((rest.front() == '"' && rest.back() == '"') ||
                           (rest.front() == '<' && rest.back() == '>'))) {
    rest = trim(rest.substr(1, rest.size() - 2));
  }
  if (rest.empty()) return std::nullopt;
  return std::string(rest);
}

std::optional<std::string> extract_suggested_fix(std::string_view text) {
  const auto pos = find_ci(text, "suggested fix");
  if (pos == std::string_view::npos) return std::nullopt;
  std::string_view rest = text.substr(pos + std::string_view("suggested fix").size());
  while (!rest.empty() && (rest.front() == ':' || is_space(rest.front()))) rest.remove_prefix(1);
  rest = trim(rest);
  if (rest.empty()) return std::nullopt;
  return std::string(rest);
}

CritiqueRecord make_critique_record(int sentence_index, std::string text, CritiqueSource source) {
  CritiqueRecord r;
  r.sentence_index = sentence_index;
  r.error_span = extract_error_span(text);
  r.suggested_fix = extract_suggested_fix(text);
  r.text = std::move(text);
  r.source = source;
  return r;
}

std::string feedback_block(const std::vector<CritiqueRecord>& critiques,
                           const std::vector<SentenceSpan>& sentences) {
  std::string out;
  for (const auto& c : critiques) {
    if (!out.empty()) out += "\n\n";
    if (c.sentence_index >= 0) {
      out += "Sentence " + std::to_string(c.sentence_index + 1);
      const auto idx = static_cast<std::size_t>(c.sentence_index);
      if (idx < sentences.size()) out += " (\"" + sentences[idx].text + "\")";
      out += ":\n";
    }
    out += c.text;
  }
  return out;
}

RerankOutcome rerank(const GroundedItem& item, const std::vector<std::string>& candidates,
                     const AgentPool& pool, const DebateConfig& config, std::uint64_t seed,
                     CandidateKind kind, std::optional<std::string> target) {
  if (candidates.size() < 2) throw InvalidArgument("rerank needs at least two candidates");

  RerankOutcome out;
  SeededRng rng(seed);
  out.permutation = rng.permutation(candidates.size());
  std::vector<std::string> presented;
  AnswerDomain domain;
  for (std::size_t slot = 0; slot < candidates.size(); ++slot) {
    presented.push_back(candidates[out.permutation[slot]]);
    domain.push_back(std::to_string(slot + 1));
  }

  std::string prompt;
  if (kind == CandidateKind::summaries) {
    prompt = render_prompt(TemplateId::rerank, {{"Document", item.context},
                                                {"Topic", topic_of(item)},
                                                {"SummaryList", numbered_list("Summary", presented)}});
  } else {
    prompt = render_prompt(TemplateId::critique_rerank,
                           {{"Document", item.context},
                            {"Sentence", target.value_or(item.output)},
                            {"CritiqueList", numbered_list("Critique", presented)}});
  }

  DebateConfig cfg = config;
  cfg.tie_policy = TiePolicy::lowest_index;
  auto debate = run_closed_set_debate(pool, prompt, domain, cfg);
  out.chosen_index = std::stoul(debate.answer) - 1;
  out.original_candidate_id = out.permutation.at(out.chosen_index);
  out.transcript = std::move(debate.transcript);
  out.transcript.subtask = "rerank";
  return out;
}

DetectOutcome detect(const GroundedItem& item, const SentenceSpan& sentence,
                     const AgentPool& pool, const DebateConfig& config) {
  if (sentence.char_end > item.output.size() || sentence.char_start > sentence.char_end ||
      item.output.compare(sentence.char_start, sentence.char_end - sentence.char_start,
                          sentence.text) != 0) {
    throw InvalidArgument("sentence " + std::to_string(sentence.index) +
                          " does not belong to item '" + item.id + "'");
  }
  const std::string prompt =
      render_prompt(TemplateId::detect, {{"Document", item.context}, {"Sentence", sentence.text}});

  DebateConfig cfg = config;
  cfg.tie_policy = TiePolicy::prefer_faithful;
  cfg.faithful_answer = "yes";
  auto debate = run_closed_set_debate(pool, prompt, {"yes", "no"}, cfg);

  DetectOutcome out;
  auto& v = out.verdict;
  v.sentence_index = sentence.index;
  v.label = debate.answer == "yes" ? Label::faithful : Label::unfaithful;
  v.converged = debate.transcript.converged;
  v.rounds_used = debate.transcript.rounds_used();
  const auto& last = debate.transcript.rounds.back().turns;
  for (const auto& turn : last) {
    if (turn.abstained) continue;
    v.per_agent_final.emplace_back(turn.agent_id,
                                   turn.answer == "yes" ? Label::faithful : Label::unfaithful);
  }
  const auto holder = std::find_if(last.begin(), last.end(), [&](const AgentTurn& t) {
    return !t.abstained && t.answer == debate.answer;
  });
  if (holder != last.end()) v.reasoning = holder->reasoning;

  out.transcript = std::move(debate.transcript);
  label(out.transcript, "detect", static_cast<int>(sentence.index));
  return out;
}

CritiqueOutcome critique(const GroundedItem& item, const std::optional<SentenceSpan>& sentence,
                         const AgentPool& pool, Framing framing, const DebateConfig& config,
                         std::uint64_t seed) {
  const std::string target = sentence ? sentence->text : item.output;
  if (blank(target)) throw InvalidArgument("critique target is empty");
  const int index = sentence ? static_cast<int>(sentence->index) : kWholeOutput;
  const std::string prompt = render_prompt(
      TemplateId::critique,
      {{"Topic", topic_of(item)}, {"Document", item.context}, {"Summary", target}});

  auto g = generate_with_framing(item, prompt, pool, framing, config, seed, "critique", index,
                                 CandidateKind::critiques, target);
  CritiqueOutcome out;
  if (framing == Framing::rerank) {
    out.critiques.push_back(
        make_critique_record(index, g.texts.at(g.primary), CritiqueSource::critique_subtask));
  } else {
    for (auto& text : g.texts)
      out.critiques.push_back(make_critique_record(index, text, CritiqueSource::critique_subtask));
  }
  out.transcripts = std::move(g.transcripts);
  out.selection = std::move(g.selection);
  return out;
}

RefineOutcome refine(const GroundedItem& item, const std::vector<CritiqueRecord>& critiques,
                     const std::vector<SentenceSpan>& sentences, const AgentPool& pool,
                     Framing framing, const DebateConfig& config, std::uint64_t seed) {
  const std::string prompt =
      render_prompt(TemplateId::refine, {{"Topic", topic_of(item)},
                                         {"Document", item.context},
                                         {"Summary", item.output},
                                         {"Feedback", feedback_block(critiques, sentences)}});
  return finish_refine(generate_with_framing(item, prompt, pool, framing, config, seed, "refine",
                                             kWholeOutput, CandidateKind::summaries, std::nullopt),
                       framing);
}

RefineOutcome refine_direct(const GroundedItem& item, const AgentPool& pool, Framing framing,
                            const DebateConfig& config, std::uint64_t seed) {
  const std::string prompt = render_prompt(
      TemplateId::direct_refine,
      {{"Topic", topic_of(item)}, {"Document", item.context}, {"Summary", item.output}});
  return finish_refine(generate_with_framing(item, prompt, pool, framing, config, seed,
                                             "direct_refine", kWholeOutput,
                                             CandidateKind::summaries, std::nullopt),
                       framing);
}

}  // namespace faithrefine
