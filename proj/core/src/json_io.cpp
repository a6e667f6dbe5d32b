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

#include "faithrefine/json_io.hpp"

#include <fstream>
#include <set>

#include "faithrefine/error.hpp"

namespace faithrefine {

namespace {

template <typename Err>
void require_object(const json& j, const char* what) {
  if (!j.is_object()) throw Err(std::string(what) + " must be a JSON object");
}

template <typename Err>
void reject_unknown(const json& j, std::initializer_list<const char*> allowed, const char* what) {
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [key, value] : j.items())
    if (!ok.contains(key)) throw Err(std::string(what) + ": unknown field '" + key + "'");
}

template <typename Err>
const json& field(const json& j, const char* key, const char* what) {
  const auto it = j.find(key);
  if (it == j.end()) throw Err(std::string(what) + ": missing field '" + key + "'");
  return *it;
}

template <typename Err>
std::string string_field(const json& j, const char* key, const char* what) {
  const auto& v = field<Err>(j, key, what);
  if (!v.is_string()) throw Err(std::string(what) + ": field '" + key + "' must be a string");
  return v.template get<std::string>();
}

template <typename Err, typename T>
T get_as(const json& j, const char* key, const char* what, T fallback) {
  const auto it = j.find(key);
  if (it == j.end() || it->is_null()) return fallback;
  try {
    return it->template get<T>();
  } catch (const json::exception&) {
    throw Err(std::string(what) + ": field '" + key + "' has the wrong type");
  }
}

json optional_string(const std::optional<std::string>& s) { return s ? json(*s) : json(nullptr); }

std::optional<std::string> read_optional_string(const json& j, const char* key) {
  const auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  if (!it->is_string()) throw DataError(std::string("field '") + key + "' must be a string or null");
  return it->get<std::string>();
}

}  // namespace

std::string dump_json(const json& j, int indent) {
  return j.dump(indent, ' ', false, json::error_handler_t::replace);
}

// ---------------------------------------------------------------------------
// Data types

void to_json(json& j, const GroundedItem& v) {
  j = json{{"id", v.id},
           {"context", v.context},
           {"topic", optional_string(v.topic)},
           {"output", v.output},
           {"task_kind", to_string(v.task_kind)}};
  if (v.sentences) j["sentences"] = *v.sentences;
}

void from_json(const json& j, GroundedItem& v) {
  require_object<DataError>(j, "grounded item");
  reject_unknown<DataError>(j, {"id", "context", "topic", "output", "task_kind", "sentences"},
                            "grounded item");
  v.id = string_field<DataError>(j, "id", "grounded item");
  v.context = string_field<DataError>(j, "context", "grounded item");
  v.output = string_field<DataError>(j, "output", "grounded item");
  v.topic = read_optional_string(j, "topic");
  const auto kind = get_as<DataError, std::string>(j, "task_kind", "grounded item", "summarization");
  try {
    v.task_kind = parse_task_kind(kind);
  } catch (const ConfigError& e) {
    throw DataError(e.what());
  }
  v.sentences.reset();
  if (const auto it = j.find("sentences"); it != j.end() && !it->is_null()) {
    if (!it->is_array()) throw DataError("grounded item: 'sentences' must be an array of strings");
    std::vector<std::string> sentences;
    for (const auto& s : *it) {
      if (!s.is_string()) throw DataError("grounded item: 'sentences' must be an array of strings");
      sentences.push_back(s.get<std::string>());
    }
    v.sentences = std::move(sentences);
  }
}

void to_json(json& j, const SentenceSpan& v) {
  j = json{{"index", v.index}, {"text", v.text}, {"char_start", v.char_start}, {"char_end", v.char_end}};
}

void to_json(json& j, const SentenceVerdict& v) {
  json finals = json::array();
  for (const auto& [agent, label] : v.per_agent_final)
    finals.push_back({{"agent_id", agent}, {"label", to_string(label)}});
  j = json{{"sentence_index", v.sentence_index},
           {"label", to_string(v.label)},
           {"reasoning", v.reasoning},
           {"per_agent_final", finals},
           {"converged", v.converged},
           {"rounds_used", v.rounds_used}};
}

void from_json(const json& j, SentenceVerdict& v) {
  v.sentence_index = j.at("sentence_index").get<std::size_t>();
  v.label = parse_label(j.at("label").get<std::string>());
  v.reasoning = j.value("reasoning", "");
  v.per_agent_final.clear();
  for (const auto& f : j.value("per_agent_final", json::array()))
    v.per_agent_final.emplace_back(f.at("agent_id").get<std::string>(),
                                   parse_label(f.at("label").get<std::string>()));
  v.converged = j.value("converged", false);
  v.rounds_used = j.value("rounds_used", 1);
}

void to_json(json& j, const CritiqueRecord& v) {
  j = json{{"sentence_index", v.sentence_index},
           {"text", v.text},
           {"error_span", optional_string(v.error_span)},
           {"suggested_fix", optional_string(v.suggested_fix)},
           {"source", to_string(v.source)}};
}

void from_json(const json& j, CritiqueRecord& v) {
  v.sentence_index = j.at("sentence_index").get<int>();
  v.text = j.at("text").get<std::string>();
  v.error_span = read_optional_string(j, "error_span");
  v.suggested_fix = read_optional_string(j, "suggested_fix");
  v.source = parse_critique_source(j.at("source").get<std::string>());
}

void to_json(json& j, const AgentTurn& v) {
  j = json{{"agent_id", v.agent_id},
           {"prompt", v.prompt},
           {"raw", v.raw},
           {"reasoning", v.reasoning},
           {"answer", v.answer},
           {"abstained", v.abstained},
           {"parse_path", v.parse_path ? json(to_string(*v.parse_path)) : json(nullptr)},
           {"calls", v.calls}};
}

void from_json(const json& j, AgentTurn& v) {
  v.agent_id = j.at("agent_id").get<std::string>();
  v.prompt = j.value("prompt", "");
  v.raw = j.value("raw", "");
  v.reasoning = j.value("reasoning", "");
  v.answer = j.value("answer", "");
  v.abstained = j.value("abstained", false);
  v.parse_path.reset();
  if (const auto it = j.find("parse_path"); it != j.end() && it->is_string())
    v.parse_path = parse_parse_path(it->get<std::string>());
  v.calls = j.value("calls", 1);
}

void to_json(json& j, const DebateTranscript& v) {
  json rounds = json::array();
  for (const auto& r : v.rounds) rounds.push_back(r.turns);
  json finals = json::array();
  for (const auto& [agent, text] : v.finals) finals.push_back({{"agent_id", agent}, {"text", text}});
  j = json{{"subtask", v.subtask},
           {"sentence_index", v.sentence_index},
           {"kind", to_string(v.kind)},
           {"rounds", rounds},
           {"rounds_used", v.rounds_used()},
           {"converged", v.converged},
           {"tied", v.tied},
           {"final_answer", v.final_answer},
           {"finals", finals}};
}

void from_json(const json& j, DebateTranscript& v) {
  v.subtask = j.value("subtask", "");
  v.sentence_index = j.value("sentence_index", kWholeOutput);
  v.kind = parse_debate_kind(j.value("kind", "closed_set"));
  v.rounds.clear();
  for (const auto& r : j.at("rounds")) v.rounds.push_back(DebateRound{r.get<std::vector<AgentTurn>>()});
  v.converged = j.value("converged", false);
  v.tied = j.value("tied", false);
  v.final_answer = j.value("final_answer", "");
  v.finals.clear();
  for (const auto& f : j.value("finals", json::array()))
    v.finals.emplace_back(f.at("agent_id").get<std::string>(), f.at("text").get<std::string>());
}

void to_json(json& j, const StageCalls& v) {
  j = json{{"detect", v.detect}, {"critique", v.critique}, {"refine", v.refine}};
}

json result_to_json(const RefinementResult& r, const std::vector<std::string>& transcript_refs) {
  json j{{"item_id", r.item_id},
         {"original", r.original},
         {"refined", r.refined},
         {"verdicts", r.verdicts},
         {"critiques", r.critiques},
         {"pipeline_mode", to_string(r.pipeline_mode)},
         {"calls", r.calls}};
  if (!transcript_refs.empty()) j["transcripts"] = transcript_refs;
  else j["transcripts"] = r.transcripts;
  return j;
}

RefinementResult result_from_json(const json& j) {
  try {
    RefinementResult r;
    r.item_id = j.at("item_id").get<std::string>();
    r.original = j.value("original", "");
    r.refined = j.at("refined").get<std::string>();
    r.verdicts = j.value("verdicts", json::array()).get<std::vector<SentenceVerdict>>();
    r.critiques = j.value("critiques", json::array()).get<std::vector<CritiqueRecord>>();
    r.pipeline_mode = parse_pipeline_mode(j.value("pipeline_mode", "dcr"));
    if (const auto c = j.find("calls"); c != j.end()) {
      r.calls.detect = c->value("detect", 0);
      r.calls.critique = c->value("critique", 0);
      r.calls.refine = c->value("refine", 0);
    }
    for (const auto& t : j.value("transcripts", json::array()))
      if (t.is_object()) r.transcripts.push_back(t.get<DebateTranscript>());
    return r;
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed refinement result: ") + e.what());
  } catch (const ConfigError& e) {
    throw DataError(std::string("malformed refinement result: ") + e.what());
  }
}

// ---------------------------------------------------------------------------
// Configuration types

void to_json(json& j, const AgentSpec& v) {
  j = json{{"agent_id", v.agent_id},
           {"backend", to_string(v.backend)},
           {"model_name", v.model_name},
           {"decode_params", v.decode_params},
           {"max_retries", v.retry.max_retries},
           {"initial_backoff_ms", v.retry.initial_backoff.count()},
           {"backoff_multiplier", v.retry.multiplier},
           {"max_in_flight", v.max_in_flight},
           {"timeout_ms", v.timeout.count()}};
  if (v.backend == BackendKind::remote_chat) {
    j["endpoint"] = v.endpoint;
    j["api_key_env"] = v.api_key_env;
  } else {
    j["script"] = v.script;
  }
}

void from_json(const json& j, AgentSpec& v) {
  constexpr const char* what = "agent spec";
  require_object<ConfigError>(j, what);
  reject_unknown<ConfigError>(j,
                              {"agent_id", "backend", "model_name", "endpoint", "api_key_env",
                               "decode_params", "script", "max_retries", "initial_backoff_ms",
                               "backoff_multiplier", "max_in_flight", "timeout_ms", "model"},
                              what);
  v.agent_id = get_as<ConfigError, std::string>(j, "agent_id", what, v.agent_id);
  if (j.contains("backend"))
    v.backend = parse_backend_kind(string_field<ConfigError>(j, "backend", what));
  v.model_name = get_as<ConfigError, std::string>(j, "model_name", what, v.model_name);
  v.endpoint = get_as<ConfigError, std::string>(j, "endpoint", what, v.endpoint);
  v.api_key_env = get_as<ConfigError, std::string>(j, "api_key_env", what, v.api_key_env);
  if (const auto it = j.find("decode_params"); it != j.end()) {
    if (!it->is_object()) throw ConfigError("agent spec: decode_params must be an object");
    v.decode_params = *it;
  }
  if (const auto it = j.find("script"); it != j.end()) {
    if (!it->is_array()) throw ConfigError("agent spec: script must be an array");
    v.script.clear();
    // Object entries are stored as their compact JSON text.
    for (const auto& s : *it) v.script.push_back(s.is_string() ? s.get<std::string>() : dump_json(s));
  }
  v.retry.max_retries = get_as<ConfigError, int>(j, "max_retries", what, v.retry.max_retries);
  v.retry.initial_backoff = std::chrono::milliseconds(
      get_as<ConfigError, long long>(j, "initial_backoff_ms", what, v.retry.initial_backoff.count()));
  v.retry.multiplier = get_as<ConfigError, double>(j, "backoff_multiplier", what, v.retry.multiplier);
  v.max_in_flight = get_as<ConfigError, int>(j, "max_in_flight", what, v.max_in_flight);
  v.timeout = std::chrono::milliseconds(
      get_as<ConfigError, long long>(j, "timeout_ms", what, v.timeout.count()));
}

void to_json(json& j, const DebateConfig& v) {
  j = json{{"max_rounds", v.max_rounds},
           {"tie_policy", to_string(v.tie_policy)},
           {"record_transcript", v.record_transcript},
           {"faithful_answer", v.faithful_answer},
           {"parallel_agents", v.parallel_agents}};
}

void from_json(const json& j, DebateConfig& v) {
  constexpr const char* what = "debate";
  require_object<ConfigError>(j, what);
  reject_unknown<ConfigError>(
      j, {"max_rounds", "tie_policy", "record_transcript", "faithful_answer", "parallel_agents"},
      what);
  v.max_rounds = get_as<ConfigError, int>(j, "max_rounds", what, v.max_rounds);
  if (j.contains("tie_policy"))
    v.tie_policy = parse_tie_policy(string_field<ConfigError>(j, "tie_policy", what));
  v.record_transcript = get_as<ConfigError, bool>(j, "record_transcript", what, v.record_transcript);
  v.faithful_answer = get_as<ConfigError, std::string>(j, "faithful_answer", what, v.faithful_answer);
  v.parallel_agents = get_as<ConfigError, bool>(j, "parallel_agents", what, v.parallel_agents);
  v.validate();
}

void to_json(json& j, const PipelineConfig& v) {
  j = json{{"mode", to_string(v.mode)},
           {"pools",
            {{"detect_pool", v.pools.detect_pool},
             {"critique_pool", v.pools.critique_pool},
             {"refine_pool", v.pools.refine_pool},
             {"rerank_pool", v.pools.rerank_pool}}},
           {"critique_framing", to_string(v.critique_framing)},
           {"refine_framing", to_string(v.refine_framing)},
           {"critique_source", to_string(v.effective_critique_source())},
           {"debate", v.debate},
           {"seed", v.seed}};
}

namespace {

std::vector<AgentSpec> pool_from_json(const json& j, const json& models, const char* name) {
  if (j.is_null()) return {};
  if (!j.is_array()) throw ConfigError(std::string(name) + " must be an array of agent specs");
  std::vector<AgentSpec> pool;
  for (const auto& entry : j) {
    AgentSpec spec;
    if (!entry.is_object()) throw ConfigError(std::string(name) + " entries must be objects");
    if (const auto m = entry.find("model"); m != entry.end()) {
      if (!m->is_string()) throw ConfigError(std::string(name) + ": 'model' must be a string");
      const auto tmpl = models.find(m->get<std::string>());
      if (tmpl == models.end())
        throw ConfigError(std::string(name) + ": unknown model '" + m->get<std::string>() + "'");
      from_json(*tmpl, spec);
    }
    from_json(entry, spec);
    pool.push_back(std::move(spec));
  }
  return pool;
}

}  // namespace

PipelineConfig pipeline_config_from_json(const json& j, const json& models) {
  constexpr const char* what = "pipeline";
  require_object<ConfigError>(j, what);
  reject_unknown<ConfigError>(j,
                              {"mode", "pools", "critique_framing", "refine_framing",
                               "critique_source", "debate", "seed"},
                              what);
  PipelineConfig c;
  c.mode = parse_pipeline_mode(string_field<ConfigError>(j, "mode", what));
  const auto& pools = field<ConfigError>(j, "pools", what);
  require_object<ConfigError>(pools, "pipeline.pools");
  reject_unknown<ConfigError>(pools, {"detect_pool", "critique_pool", "refine_pool", "rerank_pool"},
                              "pipeline.pools");
  c.pools.detect_pool = pool_from_json(pools.value("detect_pool", json()), models, "detect_pool");
  c.pools.critique_pool = pool_from_json(pools.value("critique_pool", json()), models, "critique_pool");
  c.pools.refine_pool = pool_from_json(pools.value("refine_pool", json()), models, "refine_pool");
  c.pools.rerank_pool = pool_from_json(pools.value("rerank_pool", json()), models, "rerank_pool");
  if (j.contains("critique_framing"))
    c.critique_framing = parse_framing(string_field<ConfigError>(j, "critique_framing", what));
  if (j.contains("refine_framing"))
    c.refine_framing = parse_framing(string_field<ConfigError>(j, "refine_framing", what));
  if (j.contains("critique_source") && !j["critique_source"].is_null())
    c.critique_source = parse_critique_source(string_field<ConfigError>(j, "critique_source", what));
  if (j.contains("debate")) c.debate = j["debate"].get<DebateConfig>();
  c.seed = get_as<ConfigError, std::uint64_t>(j, "seed", what, 0);
  c.validate();
  return c;
}

std::vector<json> read_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  std::vector<json> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded()) throw DataError("malformed JSON", lineno);
    out.push_back(std::move(j));
  }
  return out;
}

}  // namespace faithrefine
