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

#include "faithrefine/pipeline.hpp"

#include "faithrefine/error.hpp"
#include "faithrefine/random.hpp"

namespace faithrefine {

CritiqueSource PipelineConfig::effective_critique_source() const {
  if (critique_source) return *critique_source;
  return mode == PipelineMode::dcr ? CritiqueSource::critique_subtask : CritiqueSource::detect_cot;
}

void PipelineConfig::validate() const {
  debate.validate();
  const bool needs_detect = mode == PipelineMode::detect_refine || mode == PipelineMode::dcr;
  const bool needs_critique = mode == PipelineMode::critique_refine || mode == PipelineMode::dcr;
  const auto mode_name = std::string(to_string(mode));
  if (needs_detect && pools.detect_pool.empty())
    throw ConfigError("mode " + mode_name + " requires a non-empty detect_pool");
  if (needs_critique && pools.critique_pool.empty())
    throw ConfigError("mode " + mode_name + " requires a non-empty critique_pool");
  if (pools.refine_pool.empty()) throw ConfigError("refine_pool must not be empty");
  if (mode == PipelineMode::detect_refine &&
      effective_critique_source() == CritiqueSource::critique_subtask) {
    throw ConfigError("detect_refine takes its feedback from detect; use mode dcr for critiques");
  }
  for (const auto* pool : {&pools.detect_pool, &pools.critique_pool, &pools.refine_pool,
                           &pools.rerank_pool}) {
    for (const auto& spec : *pool) spec.validate();
  }
}

std::string_view to_string(PresetName v) {
  switch (v) {
    case PresetName::sasm: return "sasm";
    case PresetName::samm: return "samm";
    case PresetName::masm: return "masm";
    case PresetName::mamm_refine: return "mamm_refine";
  }
  return "?";
}

PresetName parse_preset_name(std::string_view s) {
  if (s == "sasm") return PresetName::sasm;
  if (s == "samm") return PresetName::samm;
  if (s == "masm") return PresetName::masm;
  if (s == "mamm_refine") return PresetName::mamm_refine;
  throw ConfigError("unknown preset '" + std::string(s) + "'");
}

namespace {

std::vector<AgentSpec> role_pool(const std::string& role,
                                 std::initializer_list<const AgentSpec*> models) {
  std::vector<AgentSpec> pool;
  int n = 0;
  for (const auto* m : models) {
    AgentSpec spec = *m;
    spec.agent_id = role + "-" + std::to_string(n++);
    pool.push_back(std::move(spec));
  }
  return pool;
}

}  // namespace

PipelineConfig preset(PresetName name, const AgentSpec& model_a,
                      const std::optional<AgentSpec>& model_b) {
  if ((name == PresetName::samm || name == PresetName::mamm_refine) && !model_b)
    throw ConfigError("preset " + std::string(to_string(name)) + " needs a second model");

  PipelineConfig c;
  c.mode = PipelineMode::dcr;
  c.critique_source = CritiqueSource::critique_subtask;
  c.debate.max_rounds = 10;
  const AgentSpec* a = &model_a;
  const AgentSpec* b = model_b ? &*model_b : nullptr;

  switch (name) {
    case PresetName::sasm:
      c.pools = {role_pool("detect", {a}), role_pool("critique", {a}), role_pool("refine", {a}),
                 role_pool("rerank", {a})};
      c.critique_framing = c.refine_framing = Framing::single;
      break;
    case PresetName::samm:
      c.pools = {role_pool("detect", {b}), role_pool("critique", {b}), role_pool("refine", {a}),
                 role_pool("rerank", {b})};
      c.critique_framing = c.refine_framing = Framing::single;
      break;
    case PresetName::masm:
      c.pools = {role_pool("detect", {a, a}), role_pool("critique", {a, a}),
                 role_pool("refine", {a, a}), role_pool("rerank", {a, a})};
      c.critique_framing = c.refine_framing = Framing::rerank;
      break;
    case PresetName::mamm_refine:
      c.pools = {role_pool("detect", {a, b}), role_pool("critique", {b, b}),
                 role_pool("refine", {a, a}), role_pool("rerank", {a, b})};
      c.critique_framing = c.refine_framing = Framing::rerank;
      break;
  }
  return c;
}

Pipeline::Pipeline(PipelineConfig config, const BackendFactory& factory)
    : config_(std::move(config)) {
  config_.validate();
  pools_.detect_pool = make_pool(config_.pools.detect_pool, factory);
  pools_.critique_pool = make_pool(config_.pools.critique_pool, factory);
  pools_.refine_pool = make_pool(config_.pools.refine_pool, factory);
  pools_.rerank_pool = make_pool(config_.pools.rerank_pool, factory);
}

namespace {

template <typename F>
auto stage(const std::string& item_id, const char* name, F&& f) {
  try {
    return f();
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError(item_id, name, e.what());
  }
}

int count_calls(const std::vector<DebateTranscript>& ts) {
  int n = 0;
  for (const auto& t : ts) n += t.total_calls();
  return n;
}

}  // namespace

RefinementResult Pipeline::run(const GroundedItem& item) const {
  stage(item.id, "input", [&] {
    item.validate();
    return 0;
  });

  RefinementResult result;
  result.item_id = item.id;
  result.original = item.output;
  result.pipeline_mode = config_.mode;
  const auto& cfg = config_;
  const auto source = cfg.effective_critique_source();

  auto seed_for = [&](std::string_view what, int index) {
    return derive_seed(cfg.seed, item.id + "/" + std::string(what), index);
  };

  auto do_refine = [&](const std::vector<SentenceSpan>& sentences) {
    const auto out = stage(item.id, "refine", [&] {
      return cfg.mode == PipelineMode::direct
                 ? refine_direct(item, pools_.refine_pool, cfg.refine_framing, cfg.debate,
                                 seed_for("refine", kWholeOutput))
                 : refine(item, result.critiques, sentences, pools_.refine_pool,
                          cfg.refine_framing, cfg.debate, seed_for("refine", kWholeOutput));
    });
    result.refined = out.refined;
    result.calls.refine += count_calls(out.transcripts);
    result.transcripts.insert(result.transcripts.end(), out.transcripts.begin(),
                              out.transcripts.end());
  };

  auto do_critique = [&](const std::optional<SentenceSpan>& sentence) {
    const int index = sentence ? static_cast<int>(sentence->index) : kWholeOutput;
    auto out = stage(item.id, "critique", [&] {
      return critique(item, sentence, pools_.critique_pool, cfg.critique_framing, cfg.debate,
                      seed_for("critique", index));
    });
    result.critiques.push_back(out.critiques.at(out.primary));
    result.calls.critique += count_calls(out.transcripts);
    result.transcripts.insert(result.transcripts.end(), out.transcripts.begin(),
                              out.transcripts.end());
  };

  switch (cfg.mode) {
    case PipelineMode::direct:
      do_refine({});
      break;

    case PipelineMode::critique_refine:
      do_critique(std::nullopt);
      do_refine({});
      break;

    case PipelineMode::detect_refine:
    case PipelineMode::dcr: {
      const auto sentences = stage(item.id, "segment", [&] { return item_sentences(item); });
      std::vector<SentenceSpan> flagged;
      for (const auto& sentence : sentences) {
        auto out = stage(item.id, "detect",
                         [&] { return detect(item, sentence, pools_.detect_pool, cfg.debate); });
        result.calls.detect += out.transcript.total_calls();
        if (out.verdict.label == Label::unfaithful) {
          flagged.push_back(sentence);
          if (source == CritiqueSource::detect_cot) {
            result.critiques.push_back(make_critique_record(static_cast<int>(sentence.index),
                                                            out.verdict.reasoning,
                                                            CritiqueSource::detect_cot));
          }
        }
        result.verdicts.push_back(std::move(out.verdict));
        result.transcripts.push_back(std::move(out.transcript));
      }
      if (flagged.empty()) {
        result.refined = item.output;
        break;
      }
      if (source == CritiqueSource::critique_subtask)
        for (const auto& sentence : flagged) do_critique(sentence);
      do_refine(sentences);
      break;
    }
  }
  return result;
}

RefinementResult run_pipeline(const PipelineConfig& config, const GroundedItem& item) {
  return Pipeline(config).run(item);
}

}  // namespace faithrefine
