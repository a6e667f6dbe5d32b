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

// Sentence-level factual-consistency scoring against a context.

#pragma once

#include <chrono>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

namespace faithrefine {

enum class ScoreMode { model, stub };

std::string_view to_string(ScoreMode v);
ScoreMode parse_score_mode(std::string_view s);

struct ScorerHealth {
  std::string status;
  std::string mode;
  std::string model_id;
};

class ScorerClient {
 public:
  virtual ~ScorerClient() = default;

  /// One score in [0, 1] per claim, aligned with `claims`.
  /// Throws InvalidArgument on empty claims, TransportError on service failure.
  virtual std::vector<double> score(const std::string& context,
                                    const std::vector<std::string>& claims) = 0;

  virtual std::string model_id() const = 0;
};

/// Lowercases, splits on whitespace, strips ASCII punctuation from each token
/// and drops stopwords and empty tokens.
std::vector<std::string> content_tokens(std::string_view text);

const std::vector<std::string>& stub_stopwords();

/// In-process lexical scorer: the fraction of a claim's distinct content tokens
/// that also occur in the context. A claim without content tokens scores 0.
class StubScorer final : public ScorerClient {
 public:
  std::vector<double> score(const std::string& context,
                            const std::vector<std::string>& claims) override;
  std::string model_id() const override { return "lexical-stub"; }
};

/// Client for the scoring service: POST /score, GET /health.
class HttpScorerClient final : public ScorerClient {
 public:
  /// `base_url` is scheme://host[:port]; `mode` is sent with every request.
  explicit HttpScorerClient(std::string base_url, ScoreMode mode = ScoreMode::model,
                            std::chrono::milliseconds timeout = std::chrono::seconds(60));

  std::vector<double> score(const std::string& context,
                            const std::vector<std::string>& claims) override;
  std::string model_id() const override { return model_id_; }

  /// Throws TransportError when unreachable or not serving (e.g. 503 while loading).
  ScorerHealth health();

 private:
  std::string base_url_;
  ScoreMode mode_;
  std::chrono::milliseconds timeout_;
  std::string model_id_;
};

}  // namespace faithrefine
