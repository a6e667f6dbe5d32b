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

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include <cmath>
#include <cstdlib>
#include <map>
#include <regex>
#include <semaphore>
#include <set>
#include <thread>

#include <spdlog/spdlog.h>

#include "faithrefine/error.hpp"
#include "faithrefine/gateway.hpp"

namespace faithrefine {

std::string_view to_string(BackendKind v) {
  return v == BackendKind::remote_chat ? "remote_chat" : "scripted";
}

BackendKind parse_backend_kind(std::string_view s) {
  if (s == "remote_chat") return BackendKind::remote_chat;
  if (s == "scripted") return BackendKind::scripted;
  throw ConfigError("unknown backend '" + std::string(s) + "'");
}

void AgentSpec::validate() const {
  if (agent_id.empty()) throw ConfigError("agent spec has an empty agent_id");
  if (retry.max_retries < 0) throw ConfigError("agent '" + agent_id + "': max_retries < 0");
  if (max_in_flight < 1) throw ConfigError("agent '" + agent_id + "': max_in_flight < 1");
  if (retry.initial_backoff.count() < 0 || retry.multiplier < 1.0)
    throw ConfigError("agent '" + agent_id + "': backoff must be >= 0 with multiplier >= 1");
  if (timeout.count() <= 0) throw ConfigError("agent '" + agent_id + "': timeout must be positive");
  if (!decode_params.is_object())
    throw ConfigError("agent '" + agent_id + "': decode_params must be an object");
  if (backend == BackendKind::remote_chat) {
    if (endpoint.empty()) throw ConfigError("agent '" + agent_id + "': remote agent needs an endpoint");
    if (model_name.empty())
      throw ConfigError("agent '" + agent_id + "': remote agent needs a model_name");
    if (api_key_env.empty())
      throw ConfigError("agent '" + agent_id + "': remote agent needs api_key_env");
  }
}

// ---------------------------------------------------------------------------
// Scripted

ScriptedBackend::ScriptedBackend(std::string agent_id, std::vector<std::string> script)
    : agent_id_(std::move(agent_id)), script_(std::move(script)) {}

std::string ScriptedBackend::complete(std::string_view /*prompt*/) {
  std::lock_guard lock(mu_);
  if (cursor_ >= script_.size()) throw ScriptExhausted(agent_id_);
  return script_[cursor_++];
}

std::size_t ScriptedBackend::remaining() const {
  std::lock_guard lock(mu_);
  return script_.size() - cursor_;
}

// ---------------------------------------------------------------------------
// Remote

namespace {

struct Endpoint {
  std::string scheme_host_port;
  std::string path;
};

Endpoint split_endpoint(const std::string& url) {
  static const std::regex re(R"(^(https?://[^/]+)(/.*)?$)");
  std::smatch m;
  if (!std::regex_match(url, m, re)) throw ConfigError("malformed endpoint URL '" + url + "'");
  return {m[1].str(), m[2].matched ? m[2].str() : std::string("/")};
}

// At most `max_in_flight` concurrent requests per endpoint URL.
std::counting_semaphore<>& endpoint_gate(const std::string& endpoint, int max_in_flight) {
  static std::mutex mu;
  static std::map<std::string, std::unique_ptr<std::counting_semaphore<>>> gates;
  std::lock_guard lock(mu);
  auto& slot = gates[endpoint];
  if (!slot) slot = std::make_unique<std::counting_semaphore<>>(max_in_flight);
  return *slot;
}

class GateGuard {
 public:
  explicit GateGuard(std::counting_semaphore<>& sem) : sem_(sem) { sem_.acquire(); }
  ~GateGuard() { sem_.release(); }
  GateGuard(const GateGuard&) = delete;
  GateGuard& operator=(const GateGuard&) = delete;

 private:
  std::counting_semaphore<>& sem_;
};

bool retryable_status(int status) { return status == 408 || status == 429 || status >= 500; }

}  // namespace

RemoteChatBackend::RemoteChatBackend(AgentSpec spec) : spec_(std::move(spec)) {
  spec_.validate();
  split_endpoint(spec_.endpoint);
}

nlohmann::json RemoteChatBackend::request_body(const AgentSpec& spec, std::string_view prompt) {
  nlohmann::json body = spec.decode_params;
  body["model"] = spec.model_name;
  body["messages"] = nlohmann::json::array({{{"role", "user"}, {"content", std::string(prompt)}}});
  return body;
}

std::string RemoteChatBackend::extract_reply(const nlohmann::json& response) {
  const auto choices = response.find("choices");
  if (choices == response.end() || !choices->is_array() || choices->empty())
    throw TransportError("chat-completion response has no choices");
  const auto& first = (*choices)[0];
  if (first.contains("message") && first["message"].contains("content") &&
      first["message"]["content"].is_string()) {
    return first["message"]["content"].get<std::string>();
  }
  if (first.contains("text") && first["text"].is_string()) return first["text"].get<std::string>();
  throw TransportError("chat-completion response has no message content");
}

std::string RemoteChatBackend::complete(std::string_view prompt) {
  check_credentials(spec_);
  const std::string key = std::getenv(spec_.api_key_env.c_str());
  const auto endpoint = split_endpoint(spec_.endpoint);
  const std::string body = request_body(spec_, prompt).dump();
  const httplib::Headers headers{{"Authorization", "Bearer " + key}};

  auto backoff = spec_.retry.initial_backoff;
  std::string last_error;
  for (int attempt = 0; attempt <= spec_.retry.max_retries; ++attempt) {
    if (attempt > 0) {
      spdlog::debug("agent {}: retry {} after {}", spec_.agent_id, attempt, last_error);
      std::this_thread::sleep_for(backoff);
      backoff = std::chrono::milliseconds(
          static_cast<long long>(std::llround(backoff.count() * spec_.retry.multiplier)));
    }
    httplib::Result res;
    {
      GateGuard gate(endpoint_gate(spec_.endpoint, spec_.max_in_flight));
      httplib::Client client(endpoint.scheme_host_port);
      client.set_connection_timeout(
          std::max(std::chrono::milliseconds(100), spec_.timeout / 4));
      client.set_read_timeout(spec_.timeout);
      client.set_write_timeout(spec_.timeout);
      res = client.Post(endpoint.path, headers, body, "application/json");
    }
    if (!res) {
      last_error = "transport error: " + httplib::to_string(res.error());
      continue;
    }
    if (res->status == 200) {
      nlohmann::json parsed = nlohmann::json::parse(res->body, nullptr, false);
      if (parsed.is_discarded()) throw TransportError("chat-completion response is not JSON");
      return extract_reply(parsed);
    }
    last_error = "HTTP " + std::to_string(res->status);
    if (!retryable_status(res->status))
      throw TransportError("agent '" + spec_.agent_id + "': " + last_error + ": " + res->body);
  }
  throw TransportError("agent '" + spec_.agent_id + "': " + last_error + " after " +
                       std::to_string(spec_.retry.max_retries) + " retries");
}

// ---------------------------------------------------------------------------

void check_credentials(const AgentSpec& spec) {
  if (spec.backend != BackendKind::remote_chat) return;
  const char* value = std::getenv(spec.api_key_env.c_str());
  if (value == nullptr || *value == '\0')
    throw MissingCredentials("agent '" + spec.agent_id + "': environment variable " +
                             spec.api_key_env + " is not set");
}

std::shared_ptr<ChatBackend> make_backend(const AgentSpec& spec) {
  spec.validate();
  if (spec.backend == BackendKind::scripted)
    return std::make_shared<ScriptedBackend>(spec.agent_id, spec.script);
  return std::make_shared<RemoteChatBackend>(spec);
}

Agent::Agent(AgentSpec spec) : spec_(std::move(spec)), backend_(make_backend(spec_)) {}

Agent::Agent(AgentSpec spec, std::shared_ptr<ChatBackend> backend)
    : spec_(std::move(spec)), backend_(std::move(backend)) {
  if (!backend_) throw ConfigError("agent '" + spec_.agent_id + "' has no backend");
}

std::string Agent::complete(std::string_view prompt) {
  if (prompt.empty()) throw InvalidArgument("agent '" + spec_.agent_id + "': empty prompt");
  ++calls_;
  return backend_->complete(prompt);
}

std::string complete(Agent& agent, std::string_view prompt) { return agent.complete(prompt); }

AgentPool make_pool(const std::vector<AgentSpec>& specs, const BackendFactory& factory) {
  AgentPool pool;
  std::set<std::string> seen;
  for (const auto& spec : specs) {
    spec.validate();
    if (!seen.insert(spec.agent_id).second)
      throw ConfigError("duplicate agent_id '" + spec.agent_id + "' in pool");
    pool.push_back(factory ? std::make_shared<Agent>(spec, factory(spec))
                           : std::make_shared<Agent>(spec));
  }
  return pool;
}

}  // namespace faithrefine
