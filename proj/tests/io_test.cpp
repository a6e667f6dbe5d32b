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

// Serialization, dataset loading and run-config parsing.

#include <gtest/gtest.h>

#include "faithrefine/config.hpp"
#include "faithrefine/dataset.hpp"
#include "faithrefine/error.hpp"
#include "faithrefine/json_io.hpp"
#include "faithrefine/pipeline.hpp"
#include "support/test_support.hpp"

namespace faithrefine {
namespace {

using testing::read_file;
using testing::TempDir;
using testing::write_file;

const std::filesystem::path kData = FAITHREFINE_TEST_DATA_DIR;

// Error message of `f`, which must throw E.
template <typename E, typename F>
std::string error_of(F&& f) {
  try {
    f();
  } catch (const E& e) {
    return e.what();
  }
  ADD_FAILURE() << "expected exception";
  return {};
}

// ---------------------------------------------------------------------------
// Grounded items

TEST(GroundedItems, LoadsFixture) {
  const auto items = load_grounded_items(kData / "grounded_min.jsonl");
  ASSERT_EQ(items.size(), 2u);
  EXPECT_EQ(items[0].id, "item-1");
  EXPECT_EQ(items[0].topic, "budget");
  EXPECT_FALSE(items[1].topic.has_value());
}

TEST(GroundedItems, ErrorsNameTheLine) {
  TempDir dir;
  const auto p = dir / "in.jsonl";
  write_file(p, R"({"id":"a","context":"c","output":"o"})"
                "\n\n"
                R"({"id":"b","context":"c"})"
                "\n");
  EXPECT_NE(error_of<DataError>([&] { load_grounded_items(p); }).find("line 3"), std::string::npos);
  write_file(p, "{\"id\":\"a\",\"context\":\"c\",\"output\":\"o\"}\n{oops\n");
  EXPECT_NE(error_of<DataError>([&] { load_grounded_items(p); }).find("line 2"), std::string::npos);
  write_file(p, R"({"id":"a","context":"c","output":"o","extra":1})");
  EXPECT_THROW(load_grounded_items(p), DataError);
  write_file(p, "{\"id\":\"a\",\"context\":\"c\",\"output\":\"o\"}\n{\"id\":\"a\",\"context\":\"c\",\"output\":\"o\"}\n");
  EXPECT_THROW(load_grounded_items(p), DataError);
  EXPECT_THROW(load_grounded_items(dir / "missing.jsonl"), DataError);
}

TEST(GroundedItems, RoundTrip) {
  GroundedItem item{"x", "ctx", "t", "A. B.", TaskKind::grounded_qa, std::vector<std::string>{"A.", "B."}};
  const json j = item;
  const auto back = j.get<GroundedItem>();
  EXPECT_EQ(back.id, item.id);
  EXPECT_EQ(back.task_kind, TaskKind::grounded_qa);
  EXPECT_EQ(back.sentences, item.sentences);
}

// ---------------------------------------------------------------------------
// Annotated dataset

TEST(Annotated, MinimalFixture) {
  const auto ds = load_annotated(kData / "annotated_min.jsonl");
  ASSERT_EQ(ds.pairs.size(), 1u);
  ASSERT_EQ(ds.items.size(), 2u);
  EXPECT_EQ(ds.items[1].id, "d1|budget|sysB");
  EXPECT_EQ(ds.detect_examples.size(), 3u);
  EXPECT_EQ(ds.detect_examples[1].gold_label, Label::unfaithful);
  EXPECT_EQ(ds.per_system_labels.at("d1|budget|sysA"), Label::faithful);
  EXPECT_EQ(ds.per_system_labels.at("d1|budget|sysB"), Label::unfaithful);
  ASSERT_EQ(ds.human_critiques.size(), 1u);
  EXPECT_EQ(ds.human_critiques[0].sentence_index, 0u);
  EXPECT_EQ(item_sentences(ds.items[1]).size(), 2u);
}

TEST(Annotated, SplitFilter) {
  EXPECT_EQ(load_annotated(kData / "annotated_min.jsonl", Split::val).items.size(), 2u);
  EXPECT_TRUE(load_annotated(kData / "annotated_min.jsonl", Split::test).items.empty());
}

TEST(Annotated, MissingGoldLabelNamesTheLine) {
  TempDir dir;
  auto line = read_file(kData / "annotated_min.jsonl");
  line.erase(line.find_last_not_of('\n') + 1);
  auto broken = line;
  const std::string key = R"(, "gold_label": "faithful"})";
  broken.replace(broken.rfind(key), key.size(), "}");
  broken.replace(broken.find("\"d1\""), 4, "\"d2\"");
  write_file(dir / "a.jsonl", line + "\n" + broken + "\n");
  const auto msg = error_of<DataError>([&] { load_annotated(dir / "a.jsonl"); });
  EXPECT_NE(msg.find("line 2"), std::string::npos) << msg;
  EXPECT_NE(msg.find("gold_label"), std::string::npos) << msg;
}

TEST(Annotated, SchemaViolations) {
  TempDir dir;
  const auto p = dir / "a.jsonl";
  write_file(p, R"({"doc_id":"d","split":"dev","context":"c","systems":[]})");
  EXPECT_THROW(load_annotated(p), DataError);
  write_file(p, R"({"doc_id":"d","split":"val","context":"c","systems":[{"system_id":"s","summary":"A.","sentences":[{"text":"B.","gold_label":"faithful"}]}]})");
  EXPECT_THROW(load_annotated(p), DataError);  // sentence not in summary
  write_file(p, R"({"doc_id":"d","split":"val","context":"c","systems":[{"system_id":"s","summary":"A.","sentences":[{"text":"A.","gold_label":"maybe"}]}]})");
  EXPECT_THROW(load_annotated(p), DataError);
}

// ---------------------------------------------------------------------------
// Results and transcripts

TEST(Results, RoundTripWithInlineTranscripts) {
  RefinementResult r;
  r.item_id = "i";
  r.original = "O.";
  r.refined = "R.";
  r.pipeline_mode = PipelineMode::detect_refine;
  r.calls = {2, 0, 1};
  r.verdicts.push_back({0, Label::unfaithful, "why", {{"a", Label::unfaithful}}, true, 1});
  r.critiques.push_back({0, "why", std::nullopt, std::nullopt, CritiqueSource::detect_cot});
  DebateTranscript t;
  t.subtask = "detect";
  t.sentence_index = 0;
  AgentTurn turn;
  turn.agent_id = "a";
  turn.answer = "no";
  turn.parse_path = ParsePath::fenced_json;
  turn.calls = 2;
  t.rounds.push_back({{turn}});
  t.converged = true;
  t.final_answer = "no";
  r.transcripts.push_back(t);

  const auto j = result_to_json(r);
  const auto back = result_from_json(j);
  EXPECT_EQ(result_to_json(back), j);
  EXPECT_EQ(back.calls, r.calls);
  EXPECT_EQ(back.transcripts[0].rounds[0].turns[0].parse_path, ParsePath::fenced_json);
  EXPECT_EQ(j["transcripts"][0]["rounds_used"], 1);

  const auto by_ref = result_to_json(r, {"t/i__detect__s0.json"});
  EXPECT_EQ(by_ref["transcripts"], json::array({"t/i__detect__s0.json"}));
}

TEST(Results, MalformedIsDataError) {
  EXPECT_THROW(result_from_json(json::parse(R"({"refined":"x"})")), DataError);
}

TEST(DumpJson, InvalidUtf8IsReplaced) {
  EXPECT_NO_THROW(dump_json(json("bad \xFF byte")));
}

TEST(ReadJsonl, SkipsBlankLines) {
  TempDir dir;
  write_file(dir / "x.jsonl", "{}\n\n  \n[1]\n");
  EXPECT_EQ(read_jsonl(dir / "x.jsonl").size(), 2u);
}

// ---------------------------------------------------------------------------
// Agent specs and pipeline configs

TEST(AgentSpecJson, RoundTripAndUnknownKeys) {
  AgentSpec s;
  s.agent_id = "r";
  s.backend = BackendKind::remote_chat;
  s.model_name = "m";
  s.endpoint = "https://api.example.com/v1/chat/completions";
  s.api_key_env = "KEY";
  s.decode_params = {{"temperature", 0.2}};
  s.retry = {5, std::chrono::milliseconds(250), 3.0};
  s.timeout = std::chrono::milliseconds(9000);
  const json j = s;
  const auto back = j.get<AgentSpec>();
  EXPECT_EQ(json(back), j);
  EXPECT_EQ(back.retry.initial_backoff.count(), 250);
  EXPECT_THROW(json::parse(R"({"agent_id":"a","temperature":1})").get<AgentSpec>(), ConfigError);
}

TEST(AgentSpecJson, ScriptObjectsAreSerialized) {
  const auto s = json::parse(R"({"agent_id":"a","script":[{"answer":"yes"},"plain"]})").get<AgentSpec>();
  ASSERT_EQ(s.script.size(), 2u);
  EXPECT_EQ(json::parse(s.script[0]), json::parse(R"({"answer":"yes"})"));
  EXPECT_EQ(s.script[1], "plain");
}

TEST(PipelineJson, ModelTemplatesMerge) {
  const auto models = json::parse(R"({"alpha":{"backend":"scripted","model_name":"alpha-1"}})");
  const auto c = pipeline_config_from_json(json::parse(R"({
    "mode": "direct",
    "pools": {"refine_pool": [{"model": "alpha", "agent_id": "r0", "script": ["T"]}]},
    "refine_framing": "single",
    "debate": {"max_rounds": 3, "tie_policy": "first_agent"}
  })"), models);
  ASSERT_EQ(c.pools.refine_pool.size(), 1u);
  EXPECT_EQ(c.pools.refine_pool[0].model_name, "alpha-1");
  EXPECT_EQ(c.pools.refine_pool[0].agent_id, "r0");
  EXPECT_EQ(c.debate.max_rounds, 3);
  EXPECT_EQ(c.debate.tie_policy, TiePolicy::first_agent);
  const auto again = pipeline_config_from_json(json(c), models);
  EXPECT_EQ(json(again), json(c));
}

TEST(PipelineJson, Rejections) {
  EXPECT_THROW(pipeline_config_from_json(json::parse(R"({"mode":"dcr","pools":{}})")), ConfigError);
  EXPECT_THROW(pipeline_config_from_json(json::parse(
                   R"({"mode":"direct","pools":{"refine_pool":[{"model":"nope"}]}})")),
               ConfigError);
  EXPECT_THROW(pipeline_config_from_json(json::parse(
                   R"({"mode":"direct","pools":{"refine_pool":[{"agent_id":"r"}]},"framing":"x"})")),
               ConfigError);
  EXPECT_THROW(pipeline_config_from_json(json::parse(
                   R"({"mode":"direct","pools":{"refine_pool":[{"agent_id":"r"}]},"debate":{"max_rounds":0}})")),
               ConfigError);
}

// ---------------------------------------------------------------------------
// Run config

TEST(RunConfig, PresetExpandsOverModels) {
  const auto c = parse_run_config(json::parse(R"({
    "seed": 9,
    "models": {"model_a": {"backend": "scripted", "model_name": "alpha"},
               "model_b": {"backend": "scripted", "model_name": "beta"}},
    "preset": "mamm_refine"
  })"));
  const auto p = c.resolved_pipeline();
  EXPECT_EQ(p.seed, 9u);
  ASSERT_EQ(p.pools.detect_pool.size(), 2u);
  EXPECT_EQ(p.pools.detect_pool[0].model_name, "alpha");
  EXPECT_EQ(p.pools.detect_pool[1].model_name, "beta");
  EXPECT_EQ(p.pools.critique_pool[0].model_name, "beta");
  EXPECT_EQ(p.pools.refine_pool[1].model_name, "alpha");
}

TEST(RunConfig, PresetObjectNamesModels) {
  const auto c = parse_run_config(json::parse(R"({
    "models": {"g": {"model_name": "g"}},
    "preset": {"name": "sasm", "model_a": "g"}
  })"));
  EXPECT_EQ(c.resolved_pipeline().pools.refine_pool[0].model_name, "g");
}

TEST(RunConfig, Rejections) {
  EXPECT_THROW(parse_run_config(json::parse(R"({"bogus": 1})")), ConfigError);
  EXPECT_THROW(parse_run_config(json::parse(R"({"preset": "sasm", "pipeline": {}})")), ConfigError);
  EXPECT_THROW(parse_run_config(json::parse(R"({"preset": "best"})")), ConfigError);
  EXPECT_THROW(parse_run_config(json::parse(R"({"seed": "x"})")), ConfigError);
  EXPECT_THROW(parse_run_config(json::parse(R"({})")).resolved_pipeline(), ConfigError);
  EXPECT_THROW(parse_run_config(json::parse(R"({"preset": "sasm"})")).resolved_pipeline(),
               ConfigError);  // model_a not defined
  EXPECT_THROW(parse_run_config(json::parse(R"({"eval": {"n_distractors": 2, "x": 1}})")),
               ConfigError);
}

TEST(RunConfig, JudgeAndEvalAndScorer) {
  const auto c = parse_run_config(json::parse(R"({
    "models": {"g": {"model_name": "g", "script": ["x"]}},
    "judge": {"model": "g"},
    "eval": {"n_distractors": 3, "split": "test", "bootstrap_resamples": 50},
    "scorer": {"url": "http://127.0.0.1:8000", "stub": true, "mode": "stub"}
  })"));
  ASSERT_TRUE(c.judge.has_value());
  EXPECT_EQ(c.judge->model_name, "g");
  EXPECT_EQ(c.eval.n_distractors, 3);
  EXPECT_EQ(c.eval.split, Split::test);
  EXPECT_EQ(c.eval.bootstrap_resamples, 50);
  EXPECT_EQ(c.scorer.url, "http://127.0.0.1:8000");
  EXPECT_TRUE(c.scorer.stub);
  EXPECT_EQ(c.scorer.mode, ScoreMode::stub);
}

TEST(RunConfig, LoadFromFile) {
  TempDir dir;
  write_file(dir / "c.json", R"({"models":{"g":{"model_name":"g"}},"preset":{"name":"masm","model_a":"g"}})");
  EXPECT_EQ(load_run_config(dir / "c.json").resolved_pipeline().pools.detect_pool.size(), 2u);
  write_file(dir / "bad.json", "{not json");
  EXPECT_THROW(load_run_config(dir / "bad.json"), ConfigError);
  EXPECT_THROW(load_run_config(dir / "none.json"), ConfigError);
}

}  // namespace
}  // namespace faithrefine
