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

#include "faithrefine/dataset.hpp"

#include <fstream>
#include <set>

#include <nlohmann/json.hpp>

#include "faithrefine/error.hpp"
#include "faithrefine/json_io.hpp"

namespace faithrefine {

namespace {

template <typename F>
void for_each_line(const std::filesystem::path& path, F&& f) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded()) throw DataError("malformed JSON", lineno);
    try {
      f(j);
    } catch (const DataError& e) {
      if (e.line()) throw;
      throw DataError(e.what(), lineno);
    } catch (const Error& e) {
      throw DataError(e.what(), lineno);
    } catch (const json::exception& e) {
      throw DataError(e.what(), lineno);
    }
  }
}

const json& need(const json& j, const char* key, const char* what) {
  if (!j.is_object()) throw DataError(std::string(what) + " must be an object");
  const auto it = j.find(key);
  if (it == j.end()) throw DataError(std::string(what) + ": missing field '" + key + "'");
  return *it;
}

std::string need_string(const json& j, const char* key, const char* what) {
  const auto& v = need(j, key, what);
  if (!v.is_string()) throw DataError(std::string(what) + ": field '" + key + "' must be a string");
  return v.get<std::string>();
}

std::optional<std::string> maybe_string(const json& j, const char* key, const char* what) {
  const auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  if (!it->is_string())
    throw DataError(std::string(what) + ": field '" + key + "' must be a string or null");
  return it->get<std::string>();
}

Label need_label(const json& j) {
  const auto s = need_string(j, "gold_label", "sentence");
  if (s == "faithful") return Label::faithful;
  if (s == "unfaithful") return Label::unfaithful;
  throw DataError("sentence: gold_label must be \"faithful\" or \"unfaithful\", got '" + s + "'");
}

DocTopicPair parse_pair(const json& j) {
  DocTopicPair p;
  p.doc_id = need_string(j, "doc_id", "record");
  p.topic = maybe_string(j, "topic", "record");
  p.split = parse_split(need_string(j, "split", "record"));
  p.context = need_string(j, "context", "record");
  if (p.context.empty()) throw DataError("record: context must not be empty");
  const auto& systems = need(j, "systems", "record");
  if (!systems.is_array() || systems.empty())
    throw DataError("record: systems must be a non-empty array");
  std::set<std::string> seen;
  for (const auto& s : systems) {
    SystemSummary sys;
    sys.system_id = need_string(s, "system_id", "system");
    if (!seen.insert(sys.system_id).second)
      throw DataError("record: duplicate system_id '" + sys.system_id + "'");
    sys.summary = need_string(s, "summary", "system");
    const auto& sentences = need(s, "sentences", "system");
    if (!sentences.is_array() || sentences.empty())
      throw DataError("system '" + sys.system_id + "': sentences must be a non-empty array");
    for (const auto& sj : sentences) {
      AnnotatedSentence a;
      a.text = need_string(sj, "text", "sentence");
      a.gold_label = need_label(sj);
      a.human_critique = maybe_string(sj, "human_critique", "sentence");
      sys.sentences.push_back(std::move(a));
    }
    p.systems.push_back(std::move(sys));
  }
  return p;
}

}  // namespace

std::vector<GroundedItem> load_grounded_items(const std::filesystem::path& path) {
  std::vector<GroundedItem> items;
  std::set<std::string> ids;
  for_each_line(path, [&](const json& j) {
    auto item = j.get<GroundedItem>();
    item.validate();
    if (item.sentences) item_sentences(item);
    if (!ids.insert(item.id).second) throw DataError("duplicate item id '" + item.id + "'");
    items.push_back(std::move(item));
  });
  return items;
}

std::string_view to_string(Split v) { return v == Split::val ? "val" : "test"; }

Split parse_split(std::string_view s) {
  if (s == "val") return Split::val;
  if (s == "test") return Split::test;
  throw DataError("split must be \"val\" or \"test\", got '" + std::string(s) + "'");
}

Label SystemSummary::label() const {
  for (const auto& s : sentences)
    if (s.gold_label == Label::unfaithful) return Label::unfaithful;
  return Label::faithful;
}

std::string annotated_item_id(const DocTopicPair& pair, const SystemSummary& system) {
  return pair.doc_id + "|" + pair.topic.value_or("") + "|" + system.system_id;
}

AnnotatedDataset load_annotated(const std::filesystem::path& path, std::optional<Split> split) {
  AnnotatedDataset ds;
  std::set<std::string> ids;
  for_each_line(path, [&](const json& j) {
    auto pair = parse_pair(j);
    for (const auto& sys : pair.systems) {
      const auto id = annotated_item_id(pair, sys);
      if (!ids.insert(id).second) throw DataError("duplicate item '" + id + "'");
    }
    if (split && pair.split != *split) return;

    for (const auto& sys : pair.systems) {
      const auto id = annotated_item_id(pair, sys);
      GroundedItem item{id, pair.context, pair.topic, sys.summary, TaskKind::summarization, {}};
      std::vector<std::string> texts;
      for (std::size_t i = 0; i < sys.sentences.size(); ++i) {
        const auto& s = sys.sentences[i];
        texts.push_back(s.text);
        ds.detect_examples.push_back({id, i, s.text, pair.context, pair.topic, s.gold_label});
        if (s.human_critique && !s.human_critique->empty())
          ds.human_critiques.push_back({id, i, s.text, *s.human_critique});
      }
      item.sentences = std::move(texts);
      item.validate();
      item_sentences(item);
      ds.per_system_labels[id] = sys.label();
      ds.items.push_back(std::move(item));
    }
    ds.pairs.push_back(std::move(pair));
  });
  return ds;
}

}  // namespace faithrefine
