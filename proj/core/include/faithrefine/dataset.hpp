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

// Dataset loaders. Both formats are JSONL, UTF-8, one record per line.
//
// Grounded items:
//   {"id", "context", "topic": str|null, "output", "task_kind", "sentences"?: [str]}
//
// Annotated summaries, one document-topic pair per line:
//   {"doc_id", "topic", "split": "val"|"test", "context",
//    "systems": [{"system_id", "summary",
//                 "sentences": [{"text", "gold_label", "human_critique"?}]}]}

#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "faithrefine/domain.hpp"

namespace faithrefine {

/// Throws DataError naming the offending line.
std::vector<GroundedItem> load_grounded_items(const std::filesystem::path& path);

enum class Split { val, test };

std::string_view to_string(Split v);
Split parse_split(std::string_view s);

struct AnnotatedSentence {
  std::string text;
  Label gold_label = Label::faithful;
  std::optional<std::string> human_critique;
};

struct SystemSummary {
  std::string system_id;
  std::string summary;
  std::vector<AnnotatedSentence> sentences;

  /// Faithful when every sentence is.
  Label label() const;
};

struct DocTopicPair {
  std::string doc_id;
  std::optional<std::string> topic;
  Split split = Split::test;
  std::string context;
  std::vector<SystemSummary> systems;
};

struct DetectExample {
  std::string item_id;
  std::size_t sentence_index = 0;
  std::string sentence;
  std::string context;
  std::optional<std::string> topic;
  Label gold_label = Label::faithful;
};

struct HumanCritique {
  std::string item_id;
  std::size_t sentence_index = 0;
  std::string sentence;
  std::string critique;
};

struct AnnotatedDataset {
  std::vector<DocTopicPair> pairs;
  /// One item per system summary, pre-segmented by the annotation.
  std::vector<GroundedItem> items;
  std::vector<DetectExample> detect_examples;
  /// Summary-level label keyed by item id.
  std::map<std::string, Label> per_system_labels;
  std::vector<HumanCritique> human_critiques;
};

/// "<doc_id>|<topic>|<system_id>"; the topic part is empty when absent.
std::string annotated_item_id(const DocTopicPair& pair, const SystemSummary& system);

/// Loads the annotated format, keeping only `split` when given.
/// Throws DataError naming the offending line.
AnnotatedDataset load_annotated(const std::filesystem::path& path,
                                std::optional<Split> split = std::nullopt);

}  // namespace faithrefine
