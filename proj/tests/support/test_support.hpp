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

// Shared fixtures: scripted agents, temporary directories, file helpers.

#pragma once

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "faithrefine/gateway.hpp"

namespace faithrefine::testing {

inline std::string reply(const std::string& answer, const std::string& reasoning = "r") {
  return nlohmann::json{{"reasoning", reasoning}, {"answer", answer}}.dump();
}

inline AgentSpec scripted(const std::string& id, std::vector<std::string> script) {
  AgentSpec s;
  s.agent_id = id;
  s.backend = BackendKind::scripted;
  s.script = std::move(script);
  return s;
}

/// Scripted agents whose replies are the given answers wrapped as JSON.
inline AgentSpec answering(const std::string& id, const std::vector<std::string>& answers) {
  std::vector<std::string> script;
  for (const auto& a : answers) script.push_back(reply(a));
  return scripted(id, std::move(script));
}

inline AgentPool pool_of(const std::vector<AgentSpec>& specs) { return make_pool(specs); }

class TempDir {
 public:
  TempDir() {
    std::random_device rd;
    const auto base = std::filesystem::temp_directory_path();
    for (;;) {
      path_ = base / ("faithrefine-test-" + std::to_string(rd()));
      if (std::filesystem::create_directory(path_)) break;
    }
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

/// A random reasoning string exercising escapes, braces, newlines and UTF-8.
inline std::string random_reasoning(std::mt19937_64& rng) {
  static const std::vector<std::string> pieces{
      "a", "Z", "0", " ", "\"", "\\", "{", "}", "\n", "\t", "```", "yes", "no",
      "caf\xC3\xA9", "\xE2\x80\x9C", "\xF0\x9F\x98\x80", ":", ",", "[", "]"};
  std::string s;
  const auto n = rng() % 40;
  for (std::size_t i = 0; i < n; ++i) s += pieces[rng() % pieces.size()];
  return s;
}

/// A random answer that is already in normal form: lowercase alphanumerics
/// with inner spaces.
inline std::string random_answer(std::mt19937_64& rng) {
  static const std::string alnum = "abcdefghijklmnopqrstuvwxyz0123456789";
  std::string s;
  const auto n = 1 + rng() % 12;
  for (std::size_t i = 0; i < n; ++i) {
    if (i > 0 && i + 1 < n && rng() % 5 == 0)
      s.push_back(' ');
    else
      s.push_back(alnum[rng() % alnum.size()]);
  }
  return s;
}

inline void write_file(const std::filesystem::path& p, const std::string& text) {
  std::filesystem::create_directories(p.parent_path());
  std::ofstream(p, std::ios::binary) << text;
}

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace faithrefine::testing
