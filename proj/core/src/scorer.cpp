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
#include "faithrefine/scorer.hpp"

#include <algorithm>
#include <cctype>
#include <regex>
#include <sstream>
#include <unordered_set>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "faithrefine/error.hpp"

namespace faithrefine {

using nlohmann::json;

std::string_view to_string(ScoreMode v) { return v == ScoreMode::model ? "model" : "stub"; }

ScoreMode parse_score_mode(std::string_view s) {
  if (s == "model") return ScoreMode::model;
  if (s == "stub") return ScoreMode::stub;
  throw ConfigError("unknown scorer mode '" + std::string(s) + "'");
}

// Function words only. Articles are content tokens under this list.
const std::vector<std::string>& stub_stopwords() {
  static const std::vector<std::string> words{
      "and",   "are",  "as",    "at",   "be",    "been",  "but",  "by",
      "for",   "from", "had",   "has",  "have",  "he",   "her",   "his",   "i",    "in",
      "is",    "it",   "its",   "of",   "on",    "or",   "she",   "that",  "their", "them",
      "they",  "this", "to",    "was",  "we",    "were", "which", "while", "who",  "will",
      "with",  "you"};
  return words;
}

std::vector<std::string> content_tokens(std::string_view text) {
  static const std::unordered_set<std::string> stop(stub_stopwords().begin(),
                                                    stub_stopwords().end());
  std::vector<std::string> out;
  std::istringstream in{std::string(text)};
  std::string tok;
  while (in >> tok) {
    std::string t;
    for (const unsigned char c : tok)
      if (!std::ispunct(c)) t.push_back(static_cast<char>(std::tolower(c)));
    if (!t.empty() && !stop.contains(t)) out.push_back(std::move(t));
  }
  return out;
}

namespace {

void check_claims(const std::vector<std::string>& claims) {
  if (claims.empty()) throw InvalidArgument("claims must not be empty");
  for (const auto& c : claims)
    if (c.empty()) throw InvalidArgument("claims must not contain an empty claim");
}

}  // namespace

std::vector<double> StubScorer::score(const std::string& context,
                                      const std::vector<std::string>& claims) {
  check_claims(claims);
  const auto ctx = content_tokens(context);
  const std::unordered_set<std::string> ctx_set(ctx.begin(), ctx.end());
  std::vector<double> scores;
  scores.reserve(claims.size());
  for (const auto& claim : claims) {
    auto toks = content_tokens(claim);
    std::sort(toks.begin(), toks.end());
    toks.erase(std::unique(toks.begin(), toks.end()), toks.end());
    if (toks.empty()) {
      scores.push_back(0.0);
      continue;
    }
    const auto hits = std::count_if(toks.begin(), toks.end(),
                                    [&](const std::string& t) { return ctx_set.contains(t); });
    scores.push_back(static_cast<double>(hits) / static_cast<double>(toks.size()));
  }
  return scores;
}

HttpScorerClient::HttpScorerClient(std::string base_url, ScoreMode mode,
                                   std::chrono::milliseconds timeout)
    : base_url_(std::move(base_url)), mode_(mode), timeout_(timeout) {
  static const std::regex url_re(R"(^https?://[^/]+/?$)");
  if (!std::regex_match(base_url_, url_re))
    throw ConfigError("scorer url must be scheme://host[:port], got '" + base_url_ + "'");
  if (base_url_.back() == '/') base_url_.pop_back();
}

namespace {

httplib::Client make_client(const std::string& base, std::chrono::milliseconds timeout) {
  httplib::Client cli(base);
  const auto secs = timeout.count() / 1000;
  const auto usecs = (timeout.count() % 1000) * 1000;
  cli.set_connection_timeout(secs, usecs);
  cli.set_read_timeout(secs, usecs);
  cli.set_write_timeout(secs, usecs);
  return cli;
}

}  // namespace

std::vector<double> HttpScorerClient::score(const std::string& context,
                                            const std::vector<std::string>& claims) {
  check_claims(claims);
  auto cli = make_client(base_url_, timeout_);
  const json body{{"context", context}, {"claims", claims}, {"mode", to_string(mode_)}};
  const auto res = cli.Post("/score", body.dump(-1, ' ', false, json::error_handler_t::replace),
                            "application/json");
  if (!res)
    throw TransportError("scorer unreachable at " + base_url_ + ": " + httplib::to_string(res.error()));
  if (res->status != 200)
    throw TransportError("scorer returned HTTP " + std::to_string(res->status) + ": " + res->body);

  const auto reply = json::parse(res->body, nullptr, false);
  if (reply.is_discarded() || !reply.is_object() || !reply.contains("scores") ||
      !reply["scores"].is_array())
    throw TransportError("scorer reply is not a ScoreResponse");
  std::vector<double> scores;
  for (const auto& s : reply["scores"]) {
    if (!s.is_number()) throw TransportError("scorer reply has a non-numeric score");
    const double v = s.get<double>();
    if (!(v >= 0.0 && v <= 1.0)) throw TransportError("scorer reply has a score outside [0, 1]");
    scores.push_back(v);
  }
  if (scores.size() != claims.size())
    throw TransportError("scorer returned " + std::to_string(scores.size()) + " scores for " +
                         std::to_string(claims.size()) + " claims");
  if (const auto it = reply.find("model_id"); it != reply.end() && it->is_string())
    model_id_ = it->get<std::string>();
  return scores;
}

ScorerHealth HttpScorerClient::health() {
  auto cli = make_client(base_url_, timeout_);
  const auto res = cli.Get("/health");
  if (!res)
    throw TransportError("scorer unreachable at " + base_url_ + ": " + httplib::to_string(res.error()));
  if (res->status != 200)
    throw TransportError("scorer not ready: HTTP " + std::to_string(res->status));
  const auto reply = json::parse(res->body, nullptr, false);
  if (reply.is_discarded() || !reply.is_object()) throw TransportError("malformed /health reply");
  ScorerHealth h{reply.value("status", ""), reply.value("mode", ""), reply.value("model_id", "")};
  if (!h.model_id.empty()) model_id_ = h.model_id;
  return h;
}

}  // namespace faithrefine
