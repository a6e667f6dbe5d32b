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

#include "faithrefine/config.hpp"

#include <fstream>
#include <set>

#include "faithrefine/error.hpp"
#include "faithrefine/json_io.hpp"

namespace faithrefine {

namespace {

void only_keys(const json& j, std::initializer_list<const char*> keys, const std::string& what) {
  if (!j.is_object()) throw ConfigError(what + " must be a JSON object");
  const std::set<std::string> ok(keys.begin(), keys.end());
  for (const auto& [k, v] : j.items())
    if (!ok.contains(k)) throw ConfigError(what + ": unknown field '" + k + "'");
}

template <typename T>
T typed(const json& j, const char* key, const std::string& what, T fallback) {
  const auto it = j.find(key);
  if (it == j.end() || it->is_null()) return fallback;
  try {
    return it->template get<T>();
  } catch (const json::exception&) {
    throw ConfigError(what + ": field '" + key + "' has the wrong type");
  }
}

}  // namespace

AgentSpec model_template(const RunConfig& config, const std::string& name) {
  const auto it = config.models.find(name);
  if (it == config.models.end()) throw ConfigError("unknown model '" + name + "'");
  AgentSpec spec;
  from_json(*it, spec);
  if (spec.agent_id.empty()) spec.agent_id = name;
  return spec;
}

PipelineConfig RunConfig::resolved_pipeline() const {
  PipelineConfig c;
  if (preset) {
    const auto a = model_template(*this, preset->model_a);
    std::optional<AgentSpec> b;
    if (preset->model_b && models.contains(*preset->model_b)) b = model_template(*this, *preset->model_b);
    c = faithrefine::preset(preset->name, a, b);
  } else if (pipeline) {
    c = *pipeline;
  } else {
    throw ConfigError("config defines neither a preset nor a pipeline");
  }
  c.seed = seed;
  c.validate();
  return c;
}

RunConfig parse_run_config(const json& j) {
  only_keys(j, {"seed", "parallelism", "models", "preset", "pipeline", "judge", "eval", "scorer"},
            "config");
  RunConfig c;
  c.seed = typed<std::uint64_t>(j, "seed", "config", 0);
  c.parallelism = typed<int>(j, "parallelism", "config", 1);
  if (c.parallelism < 1) throw ConfigError("config: parallelism must be at least 1");

  if (const auto it = j.find("models"); it != j.end()) {
    if (!it->is_object()) throw ConfigError("config: models must be an object of agent specs");
    for (const auto& [name, spec] : it->items()) {
      AgentSpec probe;
      from_json(spec, probe);
    }
    c.models = *it;
  }

  if (j.contains("preset") && j.contains("pipeline"))
    throw ConfigError("config: give either preset or pipeline, not both");
  if (const auto it = j.find("preset"); it != j.end()) {
    PresetSelection p;
    if (it->is_string()) {
      p.name = parse_preset_name(it->get<std::string>());
    } else {
      only_keys(*it, {"name", "model_a", "model_b"}, "preset");
      p.name = parse_preset_name(typed<std::string>(*it, "name", "preset", ""));
      p.model_a = typed<std::string>(*it, "model_a", "preset", p.model_a);
      p.model_b = typed<std::string>(*it, "model_b", "preset", *p.model_b);
    }
    c.preset = p;
  }
  if (const auto it = j.find("pipeline"); it != j.end())
    c.pipeline = pipeline_config_from_json(*it, c.models);

  if (const auto it = j.find("judge"); it != j.end()) {
    AgentSpec judge;
    if (it->is_object() && it->contains("model")) {
      const auto name = typed<std::string>(*it, "model", "judge", "");
      judge = model_template(c, name);
    }
    from_json(*it, judge);
    if (judge.agent_id.empty()) judge.agent_id = "judge";
    judge.validate();
    c.judge = std::move(judge);
  }

  if (const auto it = j.find("eval"); it != j.end()) {
    only_keys(*it, {"n_distractors", "split", "bootstrap_resamples"}, "eval");
    c.eval.n_distractors = typed<int>(*it, "n_distractors", "eval", c.eval.n_distractors);
    if (c.eval.n_distractors < 2 || c.eval.n_distractors > 4)
      throw ConfigError("eval: n_distractors must be in 2..4");
    if (const auto s = it->find("split"); s != it->end() && !s->is_null()) {
      try {
        c.eval.split = parse_split(typed<std::string>(*it, "split", "eval", ""));
      } catch (const DataError& e) {
        throw ConfigError(std::string("eval: ") + e.what());
      }
    }
    c.eval.bootstrap_resamples =
        typed<int>(*it, "bootstrap_resamples", "eval", c.eval.bootstrap_resamples);
    if (c.eval.bootstrap_resamples < 1) throw ConfigError("eval: bootstrap_resamples must be >= 1");
  }

  if (const auto it = j.find("scorer"); it != j.end()) {
    only_keys(*it, {"url", "stub", "mode"}, "scorer");
    if (const auto u = it->find("url"); u != it->end() && !u->is_null())
      c.scorer.url = typed<std::string>(*it, "url", "scorer", "");
    c.scorer.stub = typed<bool>(*it, "stub", "scorer", false);
    c.scorer.mode = parse_score_mode(typed<std::string>(*it, "mode", "scorer", "model"));
  }
  return c;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  const json j = json::parse(in, nullptr, false);
  if (j.is_discarded()) throw ConfigError("config " + path.string() + " is not valid JSON");
  return parse_run_config(j);
}

}  // namespace faithrefine
