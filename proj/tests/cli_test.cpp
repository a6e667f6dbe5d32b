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

#include <gtest/gtest.h>

#include "cli.hpp"
#include "faithrefine/json_io.hpp"
#include "support/cli_fixtures.hpp"
#include "support/mock_server.hpp"
#include "support/test_support.hpp"

namespace faithrefine {
namespace {

namespace fs = std::filesystem;
using cli::CommonOptions;
using cli::EvalOptions;
using testing::read_file;
using testing::TempDir;
using testing::write_file;

const fs::path kData = FAITHREFINE_TEST_DATA_DIR;

CommonOptions refine_options(const TempDir& dir, const std::string& out) {
  CommonOptions o;
  o.config = dir / "config.json";
  o.input = kData / "grounded_min.jsonl";
  o.out = dir / out;
  return o;
}

TEST(CliRefine, WritesResultsManifestAndTranscripts) {
  TempDir dir;
  write_file(dir / "config.json", testing::scripted_refine_config().dump());
  ASSERT_EQ(cli::cmd_refine(refine_options(dir, "out")), cli::kSuccess);
  const auto results = read_jsonl(dir / "out" / "results.jsonl");
  ASSERT_EQ(results.size(), 2u);
  EXPECT_EQ(results[0]["refined"], "The mayor voted on Monday. The council agreed.");
  EXPECT_EQ(results[1]["refined"], results[1]["original"]);
  EXPECT_EQ(results[0]["calls"], json::parse(R"({"detect":2,"critique":1,"refine":1})"));
  for (const auto& ref : results[0]["transcripts"])
    EXPECT_TRUE(fs::exists(dir / "out" / ref.get<std::string>())) << ref;
  const auto manifest = json::parse(read_file(dir / "out" / "manifest.json"));
  EXPECT_EQ(manifest["command"], "refine");
  EXPECT_EQ(manifest["seed"], 17);
  EXPECT_EQ(manifest["metrics"]["calls"]["total"], 5);
  EXPECT_EQ(manifest["metrics"]["outputs_changed"], 1);
  EXPECT_TRUE(manifest["failures"].empty());
}

TEST(CliRefine, RepeatedRunsAreByteIdentical) {
  TempDir dir;
  write_file(dir / "config.json", testing::scripted_refine_config().dump());
  ASSERT_EQ(cli::cmd_refine(refine_options(dir, "a")), cli::kSuccess);
  ASSERT_EQ(cli::cmd_refine(refine_options(dir, "b")), cli::kSuccess);
  EXPECT_TRUE(testing::same_tree_except_manifest(dir / "a", dir / "b"));
}

TEST(CliRefine, ManifestReplaysTheRun) {
  TempDir dir;
  write_file(dir / "config.json", testing::scripted_refine_config().dump());
  ASSERT_EQ(cli::cmd_refine(refine_options(dir, "a")), cli::kSuccess);
  auto replay = refine_options(dir, "b");
  replay.config = dir / "a" / "manifest.json";
  ASSERT_EQ(cli::cmd_refine(replay), cli::kSuccess);
  EXPECT_EQ(read_file(dir / "a" / "results.jsonl"), read_file(dir / "b" / "results.jsonl"));
}

TEST(CliRefine, MalformedConfigWritesNothing) {
  TempDir dir;
  write_file(dir / "config.json", R"({"seed": 1, "pipeline": {"mode": "dcr"}})");
  EXPECT_EQ(cli::cmd_refine(refine_options(dir, "out")), cli::kConfigError);
  EXPECT_FALSE(fs::exists(dir / "out"));
  write_file(dir / "config.json", "{");
  EXPECT_EQ(cli::cmd_refine(refine_options(dir, "out")), cli::kConfigError);
  EXPECT_FALSE(fs::exists(dir / "out"));
}

TEST(CliRefine, MissingCredentialsIsConfigError) {
  TempDir dir;
  write_file(dir / "config.json", R"({
    "models": {"m": {"backend": "remote_chat", "model_name": "m",
                     "endpoint": "https://api.example.com/v1/chat/completions",
                     "api_key_env": "FAITHREFINE_TEST_UNSET_KEY"}},
    "preset": {"name": "sasm", "model_a": "m"}
  })");
  EXPECT_EQ(cli::cmd_refine(refine_options(dir, "out")), cli::kConfigError);
  EXPECT_FALSE(fs::exists(dir / "out"));
}

TEST(CliRefine, BadInputIsDataError) {
  TempDir dir;
  write_file(dir / "config.json", testing::scripted_refine_config().dump());
  write_file(dir / "in.jsonl", R"({"id":"x"})");
  auto o = refine_options(dir, "out");
  o.input = dir / "in.jsonl";
  EXPECT_EQ(cli::cmd_refine(o), cli::kDataError);
}

TEST(CliRefine, ItemFailureIsPartial) {
  TempDir dir;
  auto config = testing::scripted_refine_config();
  config["pipeline"]["pools"]["refine_pool"][0]["script"] = json::array();
  write_file(dir / "config.json", config.dump());
  EXPECT_EQ(cli::cmd_refine(refine_options(dir, "out")), cli::kPartialFailure);
  const auto manifest = json::parse(read_file(dir / "out" / "manifest.json"));
  ASSERT_EQ(manifest["failures"].size(), 1u);
  EXPECT_EQ(manifest["failures"][0]["item_id"], "item-1");
  EXPECT_EQ(manifest["failures"][0]["stage"], "refine");
  EXPECT_EQ(read_jsonl(dir / "out" / "results.jsonl").size(), 1u);
}

// ---------------------------------------------------------------------------

EvalOptions eval_options(const TempDir& dir, const std::string& task, const fs::path& input,
                         const std::string& out) {
  EvalOptions o;
  o.task = task;
  o.config = dir / "config.json";
  o.input = input;
  o.out = dir / out;
  return o;
}

TEST(CliEval, DetectWithMatchingScriptIsPerfect) {
  TempDir dir;
  write_file(dir / "config.json", testing::scripted_detect_config({"yes", "no", "yes"}).dump());
  ASSERT_EQ(cli::cmd_eval(eval_options(dir, "detect", kData / "annotated_min.jsonl", "out")),
            cli::kSuccess);
  const auto m = json::parse(read_file(dir / "out" / "metrics.json"));
  EXPECT_EQ(m["bacc"], 1.0);
  EXPECT_EQ(m["examples"], 3);
  EXPECT_NE(read_file(dir / "out" / "detect.csv").find("d1|budget|sysB,0,unfaithful,unfaithful"),
            std::string::npos);
}

TEST(CliEval, RerankMetricsRepeat) {
  TempDir dir;
  write_file(dir / "pairs.jsonl", testing::rerank_pairs_jsonl(6));
  write_file(dir / "config.json", testing::scripted_rerank_config(6).dump());
  ASSERT_EQ(cli::cmd_eval(eval_options(dir, "rerank", dir / "pairs.jsonl", "a")), cli::kSuccess);
  ASSERT_EQ(cli::cmd_eval(eval_options(dir, "rerank", dir / "pairs.jsonl", "b")), cli::kSuccess);
  const auto m = json::parse(read_file(dir / "a" / "metrics.json"));
  EXPECT_EQ(m["instances"], 6);
  EXPECT_EQ(read_file(dir / "a" / "metrics.json"), read_file(dir / "b" / "metrics.json"));
  EXPECT_EQ(read_file(dir / "a" / "rerank.csv"), read_file(dir / "b" / "rerank.csv"));
}

TEST(CliEval, RerankRejectsDistractorCount) {
  TempDir dir;
  write_file(dir / "pairs.jsonl", testing::rerank_pairs_jsonl(2));
  write_file(dir / "config.json", testing::scripted_rerank_config(2).dump());
  auto o = eval_options(dir, "rerank", dir / "pairs.jsonl", "out");
  o.n_distractors = 5;
  EXPECT_EQ(cli::cmd_eval(o), cli::kConfigError);
}

TEST(CliEval, RefineWithStubScorerAndBaseline) {
  TempDir dir;
  write_file(dir / "config.json", testing::scripted_refine_config().dump());
  auto o = eval_options(dir, "refine", kData / "grounded_min.jsonl", "out");
  o.scorer_stub = true;
  o.baseline = kData / "grounded_min.jsonl";
  ASSERT_EQ(cli::cmd_eval(o), cli::kSuccess);
  const auto m = json::parse(read_file(dir / "out" / "metrics.json"));
  EXPECT_EQ(m["scored"], 2);
  EXPECT_GT(m["score_avg"].get<double>(), m["baseline_score_avg"].get<double>());
  const double p = m["p_value"];
  EXPECT_GE(p, 0.0);
  EXPECT_LE(p, 1.0);
  EXPECT_EQ(m["scorer_model"], "lexical-stub");
}

TEST(CliEval, UnreachableScorerIsConfigError) {
  TempDir dir;
  write_file(dir / "config.json", testing::scripted_refine_config().dump());
  auto o = eval_options(dir, "refine", kData / "grounded_min.jsonl", "out");
  o.scorer_url = "http://127.0.0.1:" + std::to_string(testing::unused_port());
  EXPECT_EQ(cli::cmd_eval(o), cli::kConfigError);
}

TEST(CliRun, ParsesArguments) {
  TempDir dir;
  write_file(dir / "config.json", testing::scripted_refine_config().dump());
  const std::string config = (dir / "config.json").string();
  const std::string input = (kData / "grounded_min.jsonl").string();
  const std::string out = (dir / "out").string();
  std::vector<std::string> args{"faithrefine", "refine", "--config", config, "--input", input,
                                "--out",        out,      "--seed",   "17"};
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  EXPECT_EQ(cli::run(static_cast<int>(argv.size()), argv.data()), cli::kSuccess);
  EXPECT_TRUE(fs::exists(dir / "out" / "results.jsonl"));

  std::vector<std::string> bad{"faithrefine", "eval", "summarize"};
  std::vector<char*> bad_argv;
  for (auto& a : bad) bad_argv.push_back(a.data());
  EXPECT_EQ(cli::run(static_cast<int>(bad_argv.size()), bad_argv.data()), cli::kConfigError);
}

}  // namespace
}  // namespace faithrefine
