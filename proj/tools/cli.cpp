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

#include "cli.hpp"

#include <atomic>
#include <chrono>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <set>
#include <sstream>
#include <thread>
#include <unordered_map>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "faithrefine/config.hpp"
#include "faithrefine/dataset.hpp"
#include "faithrefine/error.hpp"
#include "faithrefine/eval.hpp"
#include "faithrefine/json_io.hpp"
#include "faithrefine/pipeline.hpp"
#include "faithrefine/random.hpp"
#include "faithrefine/scorer.hpp"

namespace faithrefine::cli {

namespace fs = std::filesystem;

namespace {

std::string utc_now() {
  const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

// Accepts a run config, or a manifest whose "config" member is one.
json read_config_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  json j = json::parse(in, nullptr, false);
  if (j.is_discarded()) throw ConfigError("config " + path.string() + " is not valid JSON");
  if (j.is_object() && j.contains("command") && j.contains("config")) return j["config"];
  return j;
}

RunConfig load_config(const CommonOptions& o) {
  auto c = parse_run_config(read_config_json(o.config));
  if (o.seed) c.seed = *o.seed;
  if (o.parallelism) {
    if (*o.parallelism < 1) throw ConfigError("--parallelism must be at least 1");
    c.parallelism = *o.parallelism;
  }
  if (o.preset) {
    PresetSelection p = c.preset.value_or(PresetSelection{});
    p.name = parse_preset_name(*o.preset);
    c.preset = p;
    c.pipeline.reset();
  }
  return c;
}

PipelineConfig resolve_pipeline(const RunConfig& c, const CommonOptions& o) {
  auto p = c.resolved_pipeline();
  if (o.max_rounds) p.debate.max_rounds = *o.max_rounds;
  p.validate();
  return p;
}

std::vector<const AgentSpec*> all_specs(const PipelineConfig& p) {
  std::vector<const AgentSpec*> out;
  for (const auto* pool : {&p.pools.detect_pool, &p.pools.critique_pool, &p.pools.refine_pool,
                           &p.pools.rerank_pool})
    for (const auto& s : *pool) out.push_back(&s);
  return out;
}

void check_all_credentials(const PipelineConfig& p, const std::optional<AgentSpec>& judge) {
  for (const auto* s : all_specs(p)) check_credentials(*s);
  if (judge) check_credentials(*judge);
}

// Scripted agents replay in call order, so items must run one at a time.
int effective_parallelism(const RunConfig& c, const PipelineConfig& p) {
  for (const auto* s : all_specs(p)) {
    if (s->backend == BackendKind::scripted) {
      if (c.parallelism > 1) spdlog::info("scripted agents present; running items sequentially");
      return 1;
    }
  }
  return c.parallelism;
}

json replay_config(const RunConfig& c, const std::optional<PipelineConfig>& p) {
  json j{{"seed", c.seed}, {"parallelism", c.parallelism}};
  if (p) j["pipeline"] = *p;
  if (c.judge) j["judge"] = *c.judge;
  json eval{{"n_distractors", c.eval.n_distractors},
            {"bootstrap_resamples", c.eval.bootstrap_resamples}};
  if (c.eval.split) eval["split"] = to_string(*c.eval.split);
  j["eval"] = eval;
  json scorer{{"stub", c.scorer.stub}, {"mode", to_string(c.scorer.mode)}};
  if (c.scorer.url) scorer["url"] = *c.scorer.url;
  j["scorer"] = scorer;
  return j;
}

std::string sanitize(std::string_view s) {
  std::string out;
  for (const char c : s) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
                    c == '-' || c == '.' || c == '_';
    out.push_back(ok ? c : '_');
  }
  return out.empty() ? "_" : out;
}

// Names transcript files {item}__{subtask}__{s<i>|whole}.json, suffixing
// __2, __3 ... on collision. References are relative to the output directory
// when the transcript directory lies inside it.
class TranscriptWriter {
 public:
  TranscriptWriter(fs::path out, fs::path dir) : out_(std::move(out)), dir_(std::move(dir)) {}

  std::string write(const std::string& item_id, const DebateTranscript& t) {
    std::string stem = sanitize(item_id) + "__" + sanitize(t.subtask) + "__" +
                       (t.sentence_index == kWholeOutput ? std::string("whole")
                                                         : "s" + std::to_string(t.sentence_index));
    std::string name = stem + ".json";
    for (int k = 2; used_.contains(name); ++k) name = stem + "__" + std::to_string(k) + ".json";
    used_.insert(name);
    fs::create_directories(dir_);
    const auto path = dir_ / name;
    std::ofstream(path, std::ios::binary) << dump_json(json(t), 2) << '\n';
    const auto rel = path.lexically_relative(out_);
    if (!rel.empty() && *rel.begin() != "..") return rel.generic_string();
    return path.generic_string();
  }

 private:
  fs::path out_;
  fs::path dir_;
  std::set<std::string> used_;
};

fs::path transcripts_dir(const CommonOptions& o) {
  return o.transcripts_dir ? *o.transcripts_dir : o.out / "transcripts";
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (const char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string csv_row(const std::vector<std::string>& fields) {
  std::string line;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) line += ',';
    line += csv_field(fields[i]);
  }
  return line + "\n";
}

std::string fmt_double(double v) {
  std::ostringstream os;
  os << std::setprecision(6) << std::fixed << v;
  return os.str();
}

struct Failure {
  std::string item_id;
  std::string stage;
  std::string message;
};

json failures_json(const std::vector<Failure>& failures) {
  json arr = json::array();
  for (const auto& f : failures)
    arr.push_back({{"item_id", f.item_id}, {"stage", f.stage}, {"message", f.message}});
  return arr;
}

struct ItemRun {
  std::vector<std::optional<RefinementResult>> results;
  std::vector<Failure> failures;
};

ItemRun run_items(const Pipeline& pipeline, const std::vector<GroundedItem>& items, int parallelism) {
  ItemRun run;
  run.results.resize(items.size());
  std::vector<std::optional<Failure>> failed(items.size());
  auto one = [&](std::size_t i) {
    try {
      run.results[i] = pipeline.run(items[i]);
    } catch (const StageError& e) {
      failed[i] = Failure{e.item_id(), e.stage(), e.what()};
    } catch (const std::exception& e) {
      failed[i] = Failure{items[i].id, "unknown", e.what()};
    }
  };
  if (parallelism <= 1 || items.size() <= 1) {
    for (std::size_t i = 0; i < items.size(); ++i) one(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> workers;
    const auto n = std::min<std::size_t>(static_cast<std::size_t>(parallelism), items.size());
    for (std::size_t w = 0; w < n; ++w)
      workers.emplace_back([&] {
        for (std::size_t i = next++; i < items.size(); i = next++) one(i);
      });
  }
  for (auto& f : failed) {
    if (!f) continue;
    spdlog::error("item {} failed at {}: {}", f->item_id, f->stage, f->message);
    run.failures.push_back(std::move(*f));
  }
  return run;
}

struct Manifest {
  std::string command;
  const CommonOptions* options = nullptr;
  std::uint64_t seed = 0;
  std::string started_at;
  std::optional<std::string> preset;
  json config;
  json metrics = json::object();
  std::vector<Failure> failures;
  json outputs = json::object();
};

void write_manifest(const Manifest& m) {
  const auto& o = *m.options;
  json j{{"command", m.command},
         {"argv", o.argv},
         {"config_path", o.config.generic_string()},
         {"input_path", o.input.generic_string()},
         {"out_dir", o.out.generic_string()},
         {"seed", m.seed},
         {"started_at", m.started_at},
         {"finished_at", utc_now()},
         {"preset", m.preset ? json(*m.preset) : json(nullptr)},
         {"config", m.config},
         {"metrics", m.metrics},
         {"failures", failures_json(m.failures)},
         {"outputs", m.outputs}};
  write_text(o.out / "manifest.json", dump_json(j, 2) + "\n");
}

std::optional<std::string> preset_name(const RunConfig& c) {
  if (!c.preset) return std::nullopt;
  return std::string(to_string(c.preset->name));
}

// Writes results.jsonl and transcripts; returns call totals.
json write_results(const CommonOptions& o, const ItemRun& run) {
  TranscriptWriter writer(o.out, transcripts_dir(o));
  std::string lines;
  StageCalls calls;
  std::size_t changed = 0;
  for (const auto& r : run.results) {
    if (!r) continue;
    std::vector<std::string> refs;
    for (const auto& t : r->transcripts) refs.push_back(writer.write(r->item_id, t));
    lines += dump_json(result_to_json(*r, refs)) + "\n";
    calls.detect += r->calls.detect;
    calls.critique += r->calls.critique;
    calls.refine += r->calls.refine;
    changed += r->refined != r->original;
  }
  write_text(o.out / "results.jsonl", lines);
  return json{{"calls", {{"detect", calls.detect},
                         {"critique", calls.critique},
                         {"refine", calls.refine},
                         {"total", calls.total()}}},
              {"outputs_changed", changed}};
}

template <typename F>
int guarded(F&& body) {
  try {
    return body();
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const MissingCredentials& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const TemplateError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const TransportError& e) {
    std::cerr << "service error: " << e.what() << "\n";
    return kConfigError;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kDataError;
  } catch (const InvalidArgument& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kDataError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kPartialFailure;
  }
}

int finish(const std::vector<Failure>& failures, std::size_t total) {
  if (failures.empty()) return kSuccess;
  std::cerr << failures.size() << " of " << total << " items failed:\n";
  for (const auto& f : failures)
    std::cerr << "  " << f.item_id << " [" << f.stage << "] " << f.message << "\n";
  return kPartialFailure;
}

// ---------------------------------------------------------------------------
// eval helpers

std::unique_ptr<ScorerClient> make_scorer(const EvalOptions& o, const RunConfig& c) {
  const bool stub = o.scorer_stub || c.scorer.stub;
  const auto url = o.scorer_url ? o.scorer_url : c.scorer.url;
  if (!url) {
    if (!stub) throw ConfigError("eval refine needs --scorer-url or --scorer-stub");
    return std::make_unique<StubScorer>();
  }
  auto client = std::make_unique<HttpScorerClient>(*url, stub ? ScoreMode::stub : c.scorer.mode);
  const auto h = client->health();
  spdlog::info("scorer at {}: status={} mode={} model={}", *url, h.status, h.mode, h.model_id);
  return client;
}

// Baseline outputs keyed by item id: result lines ("refined") or grounded
// items ("output").
std::unordered_map<std::string, std::string> load_baseline(const fs::path& path) {
  std::unordered_map<std::string, std::string> out;
  std::size_t line = 0;
  for (const auto& j : read_jsonl(path)) {
    ++line;
    try {
      if (j.is_object() && j.contains("refined")) {
        const auto r = result_from_json(j);
        out[r.item_id] = r.refined;
      } else {
        const auto item = j.get<GroundedItem>();
        out[item.id] = item.output;
      }
    } catch (const DataError& e) {
      throw DataError(std::string("baseline: ") + e.what(), line);
    } catch (const json::exception& e) {
      throw DataError(std::string("baseline: ") + e.what(), line);
    }
  }
  if (out.empty()) throw DataError("baseline " + path.string() + " is empty");
  return out;
}

int eval_detect_cmd(const EvalOptions& o, const RunConfig& c, const PipelineConfig& p,
                    Manifest& m) {
  const auto ds = load_annotated(o.input, c.eval.split);
  if (ds.detect_examples.empty()) throw DataError("no detect examples in " + o.input.string());
  const auto pool = make_pool(p.pools.detect_pool);
  const auto report = eval_detect(ds.detect_examples, pool, p.debate);

  fs::create_directories(o.out);
  TranscriptWriter writer(o.out, transcripts_dir(o));
  std::string csv = csv_row({"item_id", "sentence_index", "gold_label", "pred_label", "rounds_used",
                             "converged"});
  for (std::size_t i = 0; i < report.records.size(); ++i) {
    const auto& r = report.records[i];
    csv += csv_row({r.item_id, std::to_string(r.sentence_index), std::string(to_string(r.gold)),
                    r.pred ? std::string(to_string(*r.pred)) : "", std::to_string(r.rounds_used),
                    r.converged ? "true" : "false"});
    if (!report.transcripts[i].rounds.empty()) writer.write(r.item_id, report.transcripts[i]);
  }
  m.metrics = {{"task", "detect"},
               {"bacc", report.bacc},
               {"examples", report.records.size()},
               {"no_verdict", report.no_verdict}};
  write_text(o.out / "metrics.json", dump_json(m.metrics, 2) + "\n");
  write_text(o.out / "detect.csv", csv);
  m.outputs = {{"metrics", "metrics.json"}, {"per_item", "detect.csv"}};
  return kSuccess;
}

int eval_rerank_cmd(const EvalOptions& o, const RunConfig& c, const PipelineConfig& p,
                    Manifest& m) {
  if (p.pools.rerank_pool.empty()) throw ConfigError("eval rerank needs a rerank_pool");
  const int n_distractors = o.n_distractors.value_or(c.eval.n_distractors);
  if (n_distractors < 2 || n_distractors > 4)
    throw ConfigError("--n-distractors must be in 2..4");
  const auto ds = load_annotated(o.input, c.eval.split);
  const auto build = build_rerank_instances(ds.pairs, n_distractors, c.seed);
  if (build.instances.empty()) throw DataError("no rerank instances can be built from the data");

  const auto pool = make_pool(p.pools.rerank_pool);
  std::vector<DebateTranscript> transcripts;
  const auto report = eval_rerank(build.instances, debate_reranker(pool, p.debate, &transcripts));

  fs::create_directories(o.out);
  TranscriptWriter writer(o.out, transcripts_dir(o));
  std::string csv = csv_row({"pair_id", "gold_position", "chosen", "correct", "provenance"});
  for (std::size_t i = 0; i < report.records.size(); ++i) {
    const auto& r = report.records[i];
    std::string prov;
    for (const auto& s : build.instances[i].provenance) prov += (prov.empty() ? "" : ";") + s;
    csv += csv_row({r.pair_id, std::to_string(r.gold_position + 1),
                    r.chosen ? std::to_string(*r.chosen + 1) : "", r.correct ? "true" : "false",
                    prov});
    if (i < transcripts.size() && !transcripts[i].rounds.empty())
      writer.write(r.pair_id, transcripts[i]);
  }
  m.metrics = {{"task", "rerank"},
               {"acc_at_1", report.acc_at_1},
               {"instances", report.records.size()},
               {"n_distractors", n_distractors},
               {"skipped_not_unique", build.skipped_not_unique},
               {"skipped_too_few", build.skipped_too_few},
               {"no_verdict", report.no_verdict}};
  write_text(o.out / "metrics.json", dump_json(m.metrics, 2) + "\n");
  write_text(o.out / "rerank.csv", csv);
  m.outputs = {{"metrics", "metrics.json"}, {"per_item", "rerank.csv"}};
  return kSuccess;
}

int eval_critique_cmd(const EvalOptions& o, const RunConfig& c, const PipelineConfig& p,
                      Manifest& m) {
  if (!c.judge) throw ConfigError("eval critique needs a judge");
  if (p.pools.critique_pool.empty()) throw ConfigError("eval critique needs a critique_pool");
  const auto ds = load_annotated(o.input, c.eval.split);
  if (ds.human_critiques.empty()) throw DataError("no human critiques in " + o.input.string());

  std::unordered_map<std::string, const GroundedItem*> items;
  for (const auto& it : ds.items) items.emplace(it.id, &it);
  const auto pool = make_pool(p.pools.critique_pool);
  Agent judge(*c.judge);

  struct Row {
    const HumanCritique* human;
    std::string generated;
    std::optional<CritiqueJudgment> judgment;
    std::vector<DebateTranscript> transcripts;
  };
  std::vector<Row> rows;
  std::vector<std::optional<CritiqueCategory>> categories;
  std::vector<Failure> failures;
  for (const auto& hc : ds.human_critiques) {
    const auto& item = *items.at(hc.item_id);
    Row row{&hc, {}, std::nullopt, {}};
    try {
      const auto spans = item_sentences(item);
      auto out = critique(item, spans.at(hc.sentence_index), pool, p.critique_framing, p.debate,
                          derive_seed(c.seed, item.id + "/critique",
                                      static_cast<std::int64_t>(hc.sentence_index)));
      row.generated = out.critiques.at(out.primary).text;
      row.transcripts = std::move(out.transcripts);
    } catch (const std::exception& e) {
      spdlog::error("critique failed for {} sentence {}: {}", hc.item_id, hc.sentence_index, e.what());
      failures.push_back({hc.item_id, "critique", e.what()});
      continue;
    }
    try {
      row.judgment = eval_critique(judge, row.generated, hc.critique, item.context, hc.sentence);
    } catch (const NoVerdictError& e) {
      spdlog::warn("judge gave no verdict for {} sentence {}", hc.item_id, hc.sentence_index);
    } catch (const std::exception& e) {
      spdlog::error("judge failed for {} sentence {}: {}", hc.item_id, hc.sentence_index, e.what());
      failures.push_back({hc.item_id, "judge", e.what()});
      continue;
    }
    categories.push_back(row.judgment ? std::optional(row.judgment->category) : std::nullopt);
    rows.push_back(std::move(row));
  }
  const auto summary = summarize_critiques(categories);

  fs::create_directories(o.out);
  TranscriptWriter writer(o.out, transcripts_dir(o));
  std::string csv = csv_row({"item_id", "sentence_index", "category", "generated_critique",
                             "judge_reasoning"});
  for (const auto& row : rows) {
    csv += csv_row({row.human->item_id, std::to_string(row.human->sentence_index),
                    row.judgment ? std::string(to_string(row.judgment->category)) : "",
                    row.generated, row.judgment ? row.judgment->judge_reasoning : ""});
    for (const auto& t : row.transcripts) writer.write(row.human->item_id, t);
  }
  m.metrics = {{"task", "critique"},
               {"em", summary.em},
               {"emm", summary.emm},
               {"ne", summary.ne},
               {"judged", summary.judged},
               {"no_verdict", summary.no_verdict},
               {"failed", failures.size()},
               {"counts",
                {{"error_match", summary.counts.at(CritiqueCategory::error_match)},
                 {"error_no_match", summary.counts.at(CritiqueCategory::error_no_match)},
                 {"no_error_no_match", summary.counts.at(CritiqueCategory::no_error_no_match)}}}};
  write_text(o.out / "metrics.json", dump_json(m.metrics, 2) + "\n");
  write_text(o.out / "critique.csv", csv);
  m.outputs = {{"metrics", "metrics.json"}, {"per_item", "critique.csv"}};
  m.failures = failures;
  return finish(failures, ds.human_critiques.size());
}

int eval_refine_cmd(const EvalOptions& o, const RunConfig& c, const PipelineConfig& p,
                    Manifest& m) {
  const auto items = load_grounded_items(o.input);
  if (items.empty()) throw DataError("no items in " + o.input.string());
  std::optional<std::unordered_map<std::string, std::string>> baseline;
  if (o.baseline) baseline = load_baseline(*o.baseline);
  auto scorer = make_scorer(o, c);
  std::unique_ptr<Agent> judge;
  if (c.judge) judge = std::make_unique<Agent>(*c.judge);

  const Pipeline pipeline(p);
  const auto run = run_items(pipeline, items, effective_parallelism(c, p));
  std::vector<RefinementResult> done;
  for (const auto& r : run.results)
    if (r) done.push_back(*r);
  if (done.empty()) throw Error("every item failed; nothing to score");
  const auto report = eval_refine_faithfulness(done, items, *scorer, judge.get());

  json metrics{{"task", "refine"},
               {"score_avg", report.score_avg},
               {"likert_avg", report.likert_avg ? json(*report.likert_avg) : json(nullptr)},
               {"likert_excluded", report.likert_excluded},
               {"items", items.size()},
               {"scored", report.records.size()},
               {"failed", run.failures.size()},
               {"scorer_model", scorer->model_id()}};

  std::vector<double> baseline_scores;
  if (baseline) {
    std::unordered_map<std::string, const GroundedItem*> by_id;
    for (const auto& it : items) by_id.emplace(it.id, &it);
    std::vector<GroundedItem> base_items;
    for (const auto& r : done) {
      const auto b = baseline->find(r.item_id);
      if (b == baseline->end()) throw DataError("baseline has no output for item '" + r.item_id + "'");
      GroundedItem item = *by_id.at(r.item_id);
      item.output = b->second;
      item.sentences.reset();
      base_items.push_back(std::move(item));
    }
    const auto base = eval_faithfulness(base_items, *scorer);
    std::vector<double> ours;
    for (const auto& rec : report.records) ours.push_back(rec.score);
    for (const auto& rec : base.records) baseline_scores.push_back(rec.score);
    metrics["baseline_score_avg"] = base.score_avg;
    metrics["bootstrap_resamples"] = c.eval.bootstrap_resamples;
    metrics["p_value"] = paired_bootstrap(ours, baseline_scores, c.eval.bootstrap_resamples,
                                          derive_seed(c.seed, "paired_bootstrap"));
  }

  fs::create_directories(o.out);
  const auto totals = write_results(o, run);
  metrics["calls"] = totals["calls"];
  std::string csv = csv_row({"item_id", "score", "likert", "baseline_score"});
  for (std::size_t i = 0; i < report.records.size(); ++i) {
    const auto& r = report.records[i];
    csv += csv_row({r.item_id, fmt_double(r.score), r.likert ? std::to_string(*r.likert) : "",
                    baseline ? fmt_double(baseline_scores[i]) : ""});
  }
  m.metrics = metrics;
  write_text(o.out / "metrics.json", dump_json(m.metrics, 2) + "\n");
  write_text(o.out / "refine.csv", csv);
  m.outputs = {{"metrics", "metrics.json"}, {"per_item", "refine.csv"}, {"results", "results.jsonl"}};
  m.failures = run.failures;
  return finish(run.failures, items.size());
}

}  // namespace

int cmd_refine(const CommonOptions& o) {
  return guarded([&] {
    const auto started = utc_now();
    const auto config = load_config(o);
    const auto pipeline_config = resolve_pipeline(config, o);
    check_all_credentials(pipeline_config, std::nullopt);
    const auto items = load_grounded_items(o.input);
    if (items.empty()) throw DataError("no items in " + o.input.string());
    const Pipeline pipeline(pipeline_config);

    const auto run = run_items(pipeline, items, effective_parallelism(config, pipeline_config));

    fs::create_directories(o.out);
    auto metrics = write_results(o, run);
    metrics["items"] = items.size();
    metrics["succeeded"] = items.size() - run.failures.size();
    metrics["failed"] = run.failures.size();

    Manifest m;
    m.command = "refine";
    m.options = &o;
    m.seed = config.seed;
    m.started_at = started;
    m.preset = preset_name(config);
    m.config = replay_config(config, pipeline_config);
    m.metrics = metrics;
    m.failures = run.failures;
    m.outputs = {{"results", "results.jsonl"},
                 {"transcripts", transcripts_dir(o).lexically_relative(o.out).generic_string()}};
    write_manifest(m);
    return finish(run.failures, items.size());
  });
}

int cmd_eval(const EvalOptions& o) {
  return guarded([&] {
    const auto started = utc_now();
    const auto config = load_config(o);
    const auto pipeline_config = resolve_pipeline(config, o);
    check_all_credentials(pipeline_config, config.judge);

    Manifest m;
    m.command = "eval " + o.task;
    m.options = &o;
    m.seed = config.seed;
    m.started_at = started;
    m.preset = preset_name(config);
    m.config = replay_config(config, pipeline_config);

    int rc;
    if (o.task == "detect") rc = eval_detect_cmd(o, config, pipeline_config, m);
    else if (o.task == "rerank") rc = eval_rerank_cmd(o, config, pipeline_config, m);
    else if (o.task == "critique") rc = eval_critique_cmd(o, config, pipeline_config, m);
    else if (o.task == "refine") rc = eval_refine_cmd(o, config, pipeline_config, m);
    else throw ConfigError("unknown eval task '" + o.task + "'");
    write_manifest(m);
    return rc;
  });
}

int run(int argc, char** argv) {
  auto logger = spdlog::get("faithrefine");
  if (!logger) logger = spdlog::stderr_color_mt("faithrefine");
  spdlog::set_default_logger(logger);
  spdlog::set_level(spdlog::level::info);

  CLI::App app{"Faithfulness refinement with multi-agent debate"};
  app.require_subcommand(1);

  std::vector<std::string> args(argv, argv + argc);
  CommonOptions refine_opts;
  EvalOptions eval_opts;
  refine_opts.argv = eval_opts.argv = args;
  bool verbose = false;
  app.add_flag("-v,--verbose", verbose, "Debug logging");

  auto add_common = [](CLI::App* sub, CommonOptions& o) {
    sub->add_option("--config", o.config, "Run configuration (JSON) or a manifest to replay")
        ->required();
    sub->add_option("--input", o.input, "Input JSONL")->required();
    sub->add_option("--out", o.out, "Output directory")->required();
    sub->add_option("--seed", o.seed, "Overrides the config seed");
    sub->add_option("--preset", o.preset, "sasm | samm | masm | mamm_refine");
    sub->add_option("--max-rounds", o.max_rounds, "Overrides the debate round cap")
        ->check(CLI::PositiveNumber);
    sub->add_option("--transcripts-dir", o.transcripts_dir,
                    "Where transcripts go (default <out>/transcripts)");
    sub->add_option("--parallelism", o.parallelism, "Items processed concurrently")
        ->check(CLI::PositiveNumber);
  };

  auto* refine = app.add_subcommand("refine", "Refine grounded outputs");
  add_common(refine, refine_opts);

  auto* eval = app.add_subcommand("eval", "Run an evaluation");
  eval->add_option("task", eval_opts.task, "detect | rerank | critique | refine")
      ->required()
      ->check(CLI::IsMember({"detect", "rerank", "critique", "refine"}));
  add_common(eval, eval_opts);
  eval->add_option("--baseline", eval_opts.baseline, "Baseline outputs for the significance test");
  eval->add_option("--scorer-url", eval_opts.scorer_url, "Scoring service base URL");
  eval->add_flag("--scorer-stub", eval_opts.scorer_stub, "Use lexical stub scoring");
  eval->add_option("--n-distractors", eval_opts.n_distractors, "Rerank distractors (2..4)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kSuccess : kConfigError;
  }
  if (verbose) spdlog::set_level(spdlog::level::debug);

  if (*refine) return cmd_refine(refine_opts);
  return cmd_eval(eval_opts);
}

}  // namespace faithrefine::cli
