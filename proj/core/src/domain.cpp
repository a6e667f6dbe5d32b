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

#include "faithrefine/domain.hpp"

#include <algorithm>
#include <array>
#include <sstream>
#include <unordered_set>

#include "faithrefine/error.hpp"

namespace faithrefine {

namespace detail {
extern const char* const kAbbreviationsText;
}  // namespace detail

void GroundedItem::validate() const {
  if (id.empty()) throw InvalidArgument("grounded item has an empty id");
  if (context.empty()) throw InvalidArgument("item '" + id + "' has an empty context");
  if (output.empty()) throw InvalidArgument("item '" + id + "' has an empty output");
}

int DebateTranscript::total_calls() const {
  int calls = 0;
  for (const auto& round : rounds)
    for (const auto& turn : round.turns) calls += turn.calls;
  return calls;
}

namespace {

template <typename E, std::size_t N>
using NameTable = std::array<std::pair<E, std::string_view>, N>;

constexpr NameTable<TaskKind, 2> kTaskKinds{{{TaskKind::summarization, "summarization"},
                                             {TaskKind::grounded_qa, "grounded_qa"}}};
constexpr NameTable<Label, 2> kLabels{{{Label::faithful, "faithful"},
                                       {Label::unfaithful, "unfaithful"}}};
constexpr NameTable<CritiqueSource, 2> kSources{
    {{CritiqueSource::detect_cot, "detect_cot"},
     {CritiqueSource::critique_subtask, "critique_subtask"}}};
constexpr NameTable<ParsePath, 3> kParsePaths{{{ParsePath::strict_json, "strict_json"},
                                               {ParsePath::fenced_json, "fenced_json"},
                                               {ParsePath::keyword_fallback, "keyword_fallback"}}};
constexpr NameTable<DebateKind, 2> kDebateKinds{{{DebateKind::closed_set, "closed_set"},
                                                 {DebateKind::generative, "generative"}}};
constexpr NameTable<PipelineMode, 4> kModes{{{PipelineMode::direct, "direct"},
                                             {PipelineMode::detect_refine, "detect_refine"},
                                             {PipelineMode::critique_refine, "critique_refine"},
                                             {PipelineMode::dcr, "dcr"}}};

template <typename E, std::size_t N>
std::string_view name_of(const NameTable<E, N>& table, E v) {
  for (const auto& [e, name] : table)
    if (e == v) return name;
  return "?";
}

template <typename E, std::size_t N>
E value_of(const NameTable<E, N>& table, std::string_view s, const char* what) {
  for (const auto& [e, name] : table)
    if (name == s) return e;
  throw ConfigError("unknown " + std::string(what) + " '" + std::string(s) + "'");
}

}  // namespace

std::string_view to_string(TaskKind v) { return name_of(kTaskKinds, v); }
std::string_view to_string(Label v) { return name_of(kLabels, v); }
std::string_view to_string(CritiqueSource v) { return name_of(kSources, v); }
std::string_view to_string(ParsePath v) { return name_of(kParsePaths, v); }
std::string_view to_string(DebateKind v) { return name_of(kDebateKinds, v); }
std::string_view to_string(PipelineMode v) { return name_of(kModes, v); }

TaskKind parse_task_kind(std::string_view s) { return value_of(kTaskKinds, s, "task_kind"); }
Label parse_label(std::string_view s) { return value_of(kLabels, s, "label"); }
CritiqueSource parse_critique_source(std::string_view s) {
  return value_of(kSources, s, "critique_source");
}
ParsePath parse_parse_path(std::string_view s) { return value_of(kParsePaths, s, "parse_path"); }
DebateKind parse_debate_kind(std::string_view s) {
  return value_of(kDebateKinds, s, "debate kind");
}
PipelineMode parse_pipeline_mode(std::string_view s) { return value_of(kModes, s, "mode"); }

// ---------------------------------------------------------------------------
// Sentence segmentation

const std::vector<std::string>& abbreviations() {
  static const std::vector<std::string> list = [] {
    std::vector<std::string> out;
    std::istringstream in(detail::kAbbreviationsText);
    std::string line;
    while (std::getline(in, line)) {
      while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
      if (line.empty() || line.front() == '#') continue;
      out.push_back(line);
    }
    return out;
  }();
  return list;
}

namespace {

bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f';
}

bool is_terminator(char c) { return c == '.' || c == '?' || c == '!'; }

bool is_upper(char c) { return c >= 'A' && c <= 'Z'; }
bool is_digit(char c) { return c >= '0' && c <= '9'; }

// Length of a closing quote/bracket at `pos`, 0 if none. Handles the UTF-8
// right single and double quotation marks.
std::size_t closer_length(std::string_view s, std::size_t pos) {
  const char c = s[pos];
  if (c == '"' || c == '\'' || c == ')' || c == ']') return 1;
  if (static_cast<unsigned char>(c) == 0xE2 && pos + 2 < s.size() &&
      static_cast<unsigned char>(s[pos + 1]) == 0x80) {
    const auto third = static_cast<unsigned char>(s[pos + 2]);
    if (third == 0x99 || third == 0x9D) return 3;
  }
  return 0;
}

bool starts_sentence(std::string_view s, std::size_t pos) {
  const char c = s[pos];
  if (is_upper(c) || is_digit(c) || c == '"' || c == '\'') return true;
  if (static_cast<unsigned char>(c) == 0xE2 && pos + 2 < s.size() &&
      static_cast<unsigned char>(s[pos + 1]) == 0x80) {
    const auto third = static_cast<unsigned char>(s[pos + 2]);
    return third == 0x98 || third == 0x9C;
  }
  return false;
}

bool is_abbreviation(std::string_view token) {
  static const std::unordered_set<std::string_view> set = [] {
    std::unordered_set<std::string_view> out;
    for (const auto& a : abbreviations()) out.insert(a);
    return out;
  }();
  while (!token.empty() && (token.front() == '(' || token.front() == '"' ||
                            token.front() == '\'' || token.front() == '[')) {
    token.remove_prefix(1);
  }
  return set.contains(token);
}

}  // namespace

std::vector<SentenceSpan> segment_output(std::string_view output) {
  if (output.empty()) throw InvalidArgument("segment_output: output is empty");

  const std::size_t n = output.size();
  std::size_t start = 0;
  while (start < n && is_space(output[start])) ++start;
  if (start == n) return {SentenceSpan{0, std::string(output), 0, n}};

  std::vector<SentenceSpan> spans;
  auto emit = [&](std::size_t from, std::size_t to) {
    spans.push_back(SentenceSpan{spans.size(), std::string(output.substr(from, to - from)),
                                 from, to});
  };

  std::size_t i = start;
  while (i < n) {
    if (!is_terminator(output[i])) {
      ++i;
      continue;
    }
    const std::size_t term_begin = i;
    std::size_t j = i + 1;
    while (j < n && is_terminator(output[j])) ++j;
    const bool single_period = output[term_begin] == '.' && j == term_begin + 1;
    while (j < n) {
      const std::size_t len = closer_length(output, j);
      if (len == 0) break;
      j += len;
    }
    if (j >= n || !is_space(output[j])) {
      i = j;
      continue;
    }
    std::size_t k = j;
    while (k < n && is_space(output[k])) ++k;
    if (k == n) break;  // only trailing whitespace remains
    if (!starts_sentence(output, k)) {
      i = k;
      continue;
    }
    if (single_period) {
      std::size_t token_start = term_begin;
      while (token_start > start && !is_space(output[token_start - 1])) --token_start;
      if (is_abbreviation(output.substr(token_start, term_begin + 1 - token_start))) {
        i = k;
        continue;
      }
    }
    emit(start, j);
    start = k;
    i = k;
  }

  std::size_t end = n;
  while (end > start && is_space(output[end - 1])) --end;
  emit(start, end);
  return spans;
}

std::vector<SentenceSpan> align_sentences(std::string_view output,
                                          const std::vector<std::string>& sentences) {
  std::vector<SentenceSpan> spans;
  std::size_t cursor = 0;
  for (const auto& sentence : sentences) {
    if (sentence.empty()) throw DataError("pre-segmented sentence is empty");
    const auto pos = output.find(sentence, cursor);
    if (pos == std::string_view::npos)
      throw DataError("pre-segmented sentence not found in output: \"" + sentence + "\"");
    spans.push_back(SentenceSpan{spans.size(), sentence, pos, pos + sentence.size()});
    cursor = pos + sentence.size();
  }
  return spans;
}

std::vector<SentenceSpan> item_sentences(const GroundedItem& item) {
  if (item.sentences && !item.sentences->empty())
    return align_sentences(item.output, *item.sentences);
  return segment_output(item.output);
}

}  // namespace faithrefine
