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

#include <algorithm>
#include <cmath>

#include <nlohmann/json.hpp>

#include "faithrefine/error.hpp"
#include "faithrefine/gateway.hpp"

namespace faithrefine {

namespace {

using nlohmann::json;

bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f';
}

bool is_ascii_punct(char c) {
  const auto u = static_cast<unsigned char>(c);
  return (u >= 33 && u <= 47) || (u >= 58 && u <= 64) || (u >= 91 && u <= 96) ||
         (u >= 123 && u <= 126);
}

bool is_alnum(char c) {
  return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z');
}

char lower(char c) { return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c; }

std::string_view trim(std::string_view s) {
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

std::string dump_utf8(const json& j) {
  return j.dump(-1, ' ', false, json::error_handler_t::replace);
}

std::optional<std::string> answer_to_string(const json& value) {
  if (value.is_string()) return value.get<std::string>();
  if (value.is_number_integer() || value.is_number_unsigned()) return value.dump();
  if (value.is_number_float()) {
    const double d = value.get<double>();
    if (std::isfinite(d) && d == std::floor(d) && std::fabs(d) < 1e15)
      return std::to_string(static_cast<long long>(d));
    return value.dump();
  }
  if (value.is_boolean()) return value.get<bool>() ? "true" : "false";
  return std::nullopt;
}

bool in_domain(const std::string& answer, const std::optional<AnswerDomain>& domain) {
  if (answer.empty()) return false;
  if (!domain) return true;
  return std::any_of(domain->begin(), domain->end(),
                     [&](const std::string& d) { return normalize_answer(d) == answer; });
}

// Reads {reasoning, answer} out of a parsed JSON object.
std::optional<StructuredReply> from_object(const json& obj, std::string_view raw, ParsePath path,
                                           const std::optional<AnswerDomain>& domain) {
  if (!obj.is_object()) return std::nullopt;
  const auto answer_it = obj.find("answer");
  if (answer_it == obj.end()) return std::nullopt;
  const auto answer = answer_to_string(*answer_it);
  if (!answer) return std::nullopt;
  StructuredReply reply;
  reply.answer = normalize_answer(*answer);
  if (!in_domain(reply.answer, domain)) return std::nullopt;
  if (const auto r = obj.find("reasoning"); r != obj.end())
    reply.reasoning = r->is_string() ? r->get<std::string>() : dump_utf8(*r);
  reply.raw = std::string(raw);
  reply.parse_path = path;
  return reply;
}

std::optional<StructuredReply> parse_object_text(std::string_view text, std::string_view raw,
                                                 ParsePath path,
                                                 const std::optional<AnswerDomain>& domain) {
  const json parsed = json::parse(text.begin(), text.end(), nullptr, false);
  if (parsed.is_discarded()) return std::nullopt;
  return from_object(parsed, raw, path, domain);
}

// End (exclusive) of the balanced JSON object starting at `open`, honoring strings.
std::optional<std::size_t> matching_brace(std::string_view s, std::size_t open) {
  int depth = 0;
  bool in_string = false;
  for (std::size_t i = open; i < s.size(); ++i) {
    const char c = s[i];
    if (in_string) {
      if (c == '\\') ++i;
      else if (c == '"') in_string = false;
      continue;
    }
    if (c == '"') in_string = true;
    else if (c == '{') ++depth;
    else if (c == '}' && --depth == 0) return i + 1;
  }
  return std::nullopt;
}

std::optional<StructuredReply> parse_fenced(std::string_view raw,
                                            const std::optional<AnswerDomain>& domain) {
  // ``` blocks, with or without a language tag.
  std::size_t pos = 0;
  while ((pos = raw.find("```", pos)) != std::string_view::npos) {
    std::size_t body = pos + 3;
    const std::size_t eol = raw.find('\n', body);
    if (eol != std::string_view::npos) {
      const auto tag = trim(raw.substr(body, eol - body));
      if (std::all_of(tag.begin(), tag.end(), is_alnum)) body = eol + 1;
    }
    const std::size_t close = raw.find("```", body);
    if (close == std::string_view::npos) break;
    if (auto reply = parse_object_text(trim(raw.substr(body, close - body)), raw,
                                       ParsePath::fenced_json, domain)) {
      return reply;
    }
    pos = close + 3;
  }
  // A bare object embedded in prose.
  for (std::size_t open = raw.find('{'); open != std::string_view::npos;
       open = raw.find('{', open + 1)) {
    const auto end = matching_brace(raw, open);
    if (!end) continue;
    if (auto reply = parse_object_text(raw.substr(open, *end - open), raw,
                                       ParsePath::fenced_json, domain)) {
      return reply;
    }
  }
  return std::nullopt;
}

}  // namespace

std::string normalize_answer(std::string_view answer) {
  while (!answer.empty() && (is_space(answer.front()) || is_ascii_punct(answer.front())))
    answer.remove_prefix(1);
  while (!answer.empty() && (is_space(answer.back()) || is_ascii_punct(answer.back())))
    answer.remove_suffix(1);
  std::string out(answer);
  std::transform(out.begin(), out.end(), out.begin(), lower);
  return out;
}

std::optional<StructuredReply> try_parse_json(std::string_view raw,
                                              const std::optional<AnswerDomain>& domain) {
  if (auto reply = parse_object_text(trim(raw), raw, ParsePath::strict_json, domain)) return reply;
  return parse_fenced(raw, domain);
}

std::optional<StructuredReply> keyword_fallback(std::string_view raw, const AnswerDomain& domain) {
  std::string haystack(raw);
  std::transform(haystack.begin(), haystack.end(), haystack.begin(), lower);

  std::optional<std::size_t> best_pos;
  std::string best;
  for (const auto& member : domain) {
    const std::string needle = normalize_answer(member);
    if (needle.empty()) continue;
    for (std::size_t pos = haystack.rfind(needle); pos != std::string::npos;
         pos = pos == 0 ? std::string::npos : haystack.rfind(needle, pos - 1)) {
      const bool left_ok = pos == 0 || !is_alnum(haystack[pos - 1]);
      const std::size_t after = pos + needle.size();
      const bool right_ok = after >= haystack.size() || !is_alnum(haystack[after]);
      if (left_ok && right_ok) {
        if (!best_pos || pos > *best_pos || (pos == *best_pos && needle.size() > best.size())) {
          best_pos = pos;
          best = needle;
        }
        break;
      }
    }
  }
  if (!best_pos) return std::nullopt;
  return StructuredReply{std::string(trim(raw)), best, std::string(raw),
                         ParsePath::keyword_fallback};
}

StructuredReply parse_structured(std::string_view raw, const std::optional<AnswerDomain>& domain) {
  if (auto reply = try_parse_json(raw, domain)) return *reply;
  if (domain) {
    if (auto reply = keyword_fallback(raw, *domain)) return *reply;
  }
  throw ParseError("unparseable response: " + std::string(raw.substr(0, 200)));
}

AgentTurn ask_structured(Agent& agent, const std::string& prompt, const AnswerDomain& domain) {
  AgentTurn turn;
  turn.agent_id = agent.id();
  turn.prompt = prompt;

  auto accept = [&](const StructuredReply& reply) {
    turn.raw = reply.raw;
    turn.reasoning = reply.reasoning;
    turn.answer = reply.answer;
    turn.parse_path = reply.parse_path;
    return turn;
  };

  const std::string first = agent.complete(prompt);
  if (auto reply = try_parse_json(first, domain)) return accept(*reply);

  turn.calls = 2;
  const std::string second = agent.complete(prompt + "\n" + std::string(kReaskSuffix));
  if (auto reply = try_parse_json(second, domain)) return accept(*reply);
  if (auto reply = keyword_fallback(second, domain)) return accept(*reply);
  if (auto reply = keyword_fallback(first, domain)) return accept(*reply);

  turn.raw = second;
  turn.abstained = true;
  return turn;
}

}  // namespace faithrefine
