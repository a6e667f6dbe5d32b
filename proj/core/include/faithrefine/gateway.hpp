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

// Uniform access to LLM backends and the structured {reasoning, answer}
// reply contract.

#pragma once

#include <atomic>
#include <chrono>
#include <cstddef>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "faithrefine/domain.hpp"

namespace faithrefine {

enum class BackendKind { remote_chat, scripted };

std::string_view to_string(BackendKind v);
BackendKind parse_backend_kind(std::string_view s);

struct RetryPolicy {
  int max_retries = 3;
  std::chrono::milliseconds initial_backoff{500};
  double multiplier = 2.0;
};

struct AgentSpec {
  std::string agent_id;
  BackendKind backend = BackendKind::scripted;
  std::string model_name;
  /// Chat-completion URL, remote only.
  std::string endpoint;
  /// Name of the environment variable holding the API key, remote only.
  std::string api_key_env;
  /// Extra request fields (temperature, max_tokens, ...). Empty means backend defaults.
  nlohmann::json decode_params = nlohmann::json::object();
  /// Responses replayed in order, scripted only.
  std::vector<std::string> script;
  RetryPolicy retry;
  /// Upper bound on concurrent requests to this agent's endpoint.
  int max_in_flight = 4;
  std::chrono::milliseconds timeout{120000};

  /// Throws ConfigError for a structurally invalid spec.
  void validate() const;
};

/// A text-in, text-out completion backend.
class ChatBackend {
 public:
  virtual ~ChatBackend() = default;
  virtual std::string complete(std::string_view prompt) = 0;
};

/// Replays a fixed response list. Calls are serialized; throws ScriptExhausted
/// once the list runs out.
class ScriptedBackend final : public ChatBackend {
 public:
  ScriptedBackend(std::string agent_id, std::vector<std::string> script);
  std::string complete(std::string_view prompt) override;
  std::size_t remaining() const;

 private:
  std::string agent_id_;
  std::vector<std::string> script_;
  std::size_t cursor_ = 0;
  mutable std::mutex mu_;
};

/// JSON chat-completion client: POST {model, messages, ...decode_params},
/// reply text taken from choices[0].message.content. Connection failures,
/// 429 and 5xx are retried with exponential backoff.
class RemoteChatBackend final : public ChatBackend {
 public:
  explicit RemoteChatBackend(AgentSpec spec);
  std::string complete(std::string_view prompt) override;

  /// The request body sent for `prompt`.
  static nlohmann::json request_body(const AgentSpec& spec, std::string_view prompt);
  /// Extracts the reply text from a chat-completion response body.
  static std::string extract_reply(const nlohmann::json& response);

 private:
  AgentSpec spec_;
};

/// Builds the backend named by spec.backend.
std::shared_ptr<ChatBackend> make_backend(const AgentSpec& spec);

using BackendFactory = std::function<std::shared_ptr<ChatBackend>(const AgentSpec&)>;

/// One debating agent: a spec bound to a live backend. Thread-safe.
class Agent {
 public:
  explicit Agent(AgentSpec spec);
  Agent(AgentSpec spec, std::shared_ptr<ChatBackend> backend);

  const AgentSpec& spec() const noexcept { return spec_; }
  const std::string& id() const noexcept { return spec_.agent_id; }
  std::string complete(std::string_view prompt);
  std::size_t calls() const noexcept { return calls_.load(); }

 private:
  AgentSpec spec_;
  std::shared_ptr<ChatBackend> backend_;
  std::atomic<std::size_t> calls_{0};
};

using AgentPtr = std::shared_ptr<Agent>;
using AgentPool = std::vector<AgentPtr>;

/// Instantiates a pool, rejecting duplicate agent ids.
AgentPool make_pool(const std::vector<AgentSpec>& specs, const BackendFactory& factory = {});

/// Throws MissingCredentials when a remote spec's key variable is unset.
void check_credentials(const AgentSpec& spec);

std::string complete(Agent& agent, std::string_view prompt);

// ---------------------------------------------------------------------------
// Prompt templates

enum class TemplateId {
  direct_refine,
  detect,
  rerank,
  critique,
  refine,
  debate_wrapper,
  likert_judge,
  critique_judge,
  critique_rerank,
};

std::string_view to_string(TemplateId v);

struct PromptTemplate {
  TemplateId template_id;
  std::string_view body;
};

const PromptTemplate& prompt_template(TemplateId id);

using Bindings = std::map<std::string, std::string>;

/// Substitutes {Name} placeholders. "{{" and "}}" render as literal braces and
/// bound values are inserted verbatim. Throws TemplateError on an unbound name.
std::string render_body(std::string_view body, const Bindings& bindings);
std::string render_prompt(TemplateId id, const Bindings& bindings);

struct PriorAnswer {
  std::string reasoning;
  std::string answer;
};

/// Wraps `initial_prompt` with the previous round's answers, in the given order.
std::string render_debate_prompt(std::string_view initial_prompt,
                                 const std::vector<PriorAnswer>& prior);

/// "### <noun> 1: ...\n### <noun> 2: ..." with 1-based labels.
std::string numbered_list(std::string_view noun, const std::vector<std::string>& items);

// ---------------------------------------------------------------------------
// Structured replies

struct StructuredReply {
  std::string reasoning;
  std::string answer;
  std::string raw;
  ParsePath parse_path = ParsePath::strict_json;
};

using AnswerDomain = std::vector<std::string>;

/// Lowercases and strips surrounding whitespace and punctuation.
std::string normalize_answer(std::string_view answer);

/// Strict JSON, then fenced or embedded JSON; no keyword scan.
std::optional<StructuredReply> try_parse_json(std::string_view raw,
                                              const std::optional<AnswerDomain>& domain);

/// Last whole-word, case-insensitive occurrence of a domain member in `raw`.
std::optional<StructuredReply> keyword_fallback(std::string_view raw, const AnswerDomain& domain);

/// Full chain: strict JSON, fenced JSON, keyword fallback (when a domain is
/// given). Answers outside the domain fall through to the next path.
/// Throws ParseError when nothing yields an answer.
StructuredReply parse_structured(std::string_view raw,
                                 const std::optional<AnswerDomain>& domain = std::nullopt);

inline constexpr std::string_view kReaskSuffix = "Please strictly output in JSON format.";

/// Asks for a structured reply. If neither JSON path parses, re-asks once with
/// kReaskSuffix appended, then tries the keyword fallback on both replies. A
/// total failure yields an abstaining turn rather than an exception.
AgentTurn ask_structured(Agent& agent, const std::string& prompt, const AnswerDomain& domain);

}  // namespace faithrefine
