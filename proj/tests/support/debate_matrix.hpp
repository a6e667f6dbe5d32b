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

// Scripted closed-set debates with hand-traced outcomes. Each script entry is
// one backend reply; "?" replies cannot be parsed and force a re-ask.

#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "faithrefine/debate.hpp"
#include "faithrefine/error.hpp"
#include "support/test_support.hpp"

namespace faithrefine::testing {

struct DebateCase {
  const char* name;
  AnswerDomain domain;
  std::vector<std::vector<std::string>> scripts;  // per agent
  TiePolicy tie_policy = TiePolicy::lowest_index;
  int max_rounds = 10;
  std::string answer;
  int rounds;
  int calls;
  bool converged;
  bool tied = false;
};

inline void PrintTo(const DebateCase& c, std::ostream* os) { *os << c.name; }

inline std::vector<std::string> repeat(const std::vector<std::string>& answers, int times) {
  std::vector<std::string> out;
  for (int i = 0; i < times; ++i) out.insert(out.end(), answers.begin(), answers.end());
  return out;
}

/// Answers wrapped as JSON replies, except "?" which stays unparseable.
inline std::vector<std::string> replies(const std::vector<std::string>& answers) {
  std::vector<std::string> out;
  for (const auto& a : answers) out.push_back(a == "?" ? a : reply(a));
  return out;
}

inline std::vector<DebateCase> debate_matrix() {
  const AnswerDomain yn{"yes", "no"};
  const AnswerDomain r3{"1", "2", "3"};
  const auto T = TiePolicy::prefer_faithful;
  const auto L = TiePolicy::lowest_index;
  const auto F = TiePolicy::first_agent;
  return {
      // Unanimous in round 1.
      {"unanimous_two_yes", yn, {{"yes"}, {"yes"}}, L, 10, "yes", 1, 2, true},
      {"unanimous_three_no", yn, {{"no"}, {"no"}, {"no"}}, L, 10, "no", 1, 3, true},
      {"unanimous_rank", r3, {{"2"}, {"2"}}, L, 10, "2", 1, 2, true},
      {"unanimous_four", yn, {{"yes"}, {"yes"}, {"yes"}, {"yes"}}, L, 10, "yes", 1, 4, true},
      {"single_agent", r3, {{"3"}}, L, 10, "3", 1, 1, true},
      {"unanimous_after_reask", yn, {{"?", "yes"}, {"yes"}}, L, 10, "yes", 1, 3, true},
      // Flips.
      {"flip_round_2", yn, {{"yes", "yes"}, {"no", "yes"}}, L, 10, "yes", 2, 4, true},
      {"flip_round_3_three_agents", yn, {{"yes", "yes", "no"}, {"no", "no", "no"},
                                         {"no", "yes", "no"}}, L, 10, "no", 3, 9, true},
      {"flip_rank_round_2", r3, {{"1", "3"}, {"3", "3"}}, L, 10, "3", 2, 4, true},
      {"flip_round_5", yn, {repeat({"yes"}, 5), {"no", "no", "no", "no", "yes"}}, L, 10, "yes",
       5, 10, true},
      {"crossing_flip_round_3", yn, {{"yes", "no", "no"}, {"no", "yes", "no"}}, L, 10, "no", 3,
       6, true},
      {"flip_with_reask", yn, {{"yes", "no"}, {"?", "no", "no"}}, L, 10, "no", 2, 5, true},
      {"abstainer_ignored_for_consensus", yn, {{"yes"}, {"?", "?"}}, L, 10, "yes", 1, 3, true},
      // Perpetual disagreement, cut off at the round cap.
      {"stalemate_prefer_faithful", yn, {repeat({"yes"}, 10), repeat({"no"}, 10)}, T, 10, "yes",
       10, 20, false, true},
      {"stalemate_lowest_index", r3, {repeat({"3"}, 10), repeat({"2"}, 10)}, L, 10, "2", 10, 20,
       false, true},
      {"stalemate_first_agent", r3, {repeat({"3"}, 10), repeat({"2"}, 10)}, F, 10, "3", 10, 20,
       false, true},
      {"stalemate_majority", yn, {repeat({"yes"}, 10), repeat({"no"}, 10), repeat({"no"}, 10)}, T,
       10, "no", 10, 30, false, false},
      {"stalemate_first_agent_four", yn, {repeat({"no"}, 10), repeat({"yes"}, 10),
                                          repeat({"no"}, 10), repeat({"yes"}, 10)}, F, 10, "no",
       10, 40, false, true},
      {"stalemate_with_abstainer", yn, {repeat({"yes"}, 10), repeat({"no"}, 10),
                                        repeat({"?"}, 20)}, L, 10, "yes", 10, 40, false, true},
      {"stalemate_custom_cap", yn, {repeat({"no"}, 3), repeat({"yes"}, 3)}, T, 3, "yes", 3, 6,
       false, true},
  };
}

struct DebateCaseResult {
  bool ok = false;
  std::string detail;
};

/// Runs one case and compares answer, rounds, calls and flags.
inline DebateCaseResult run_debate_case(const DebateCase& c, bool parallel_agents = false) {
  std::vector<AgentSpec> specs;
  for (std::size_t i = 0; i < c.scripts.size(); ++i)
    specs.push_back(scripted("agent-" + std::to_string(i), replies(c.scripts[i])));
  const auto pool = make_pool(specs);
  DebateConfig config;
  config.max_rounds = c.max_rounds;
  config.tie_policy = c.tie_policy;
  config.parallel_agents = parallel_agents;
  const auto out = run_closed_set_debate(pool, "Is the sentence consistent?", c.domain, config);

  std::size_t backend_calls = 0;
  for (const auto& a : pool) backend_calls += a->calls();
  DebateCaseResult r;
  r.detail = "answer=" + out.answer + " rounds=" + std::to_string(out.transcript.rounds_used()) +
             " calls=" + std::to_string(out.transcript.total_calls()) + "/" +
             std::to_string(backend_calls) + " converged=" +
             std::to_string(out.transcript.converged) + " tied=" +
             std::to_string(out.transcript.tied);
  r.ok = out.answer == c.answer && out.transcript.rounds_used() == c.rounds &&
         out.transcript.total_calls() == c.calls &&
         backend_calls == static_cast<std::size_t>(c.calls) &&
         out.transcript.converged == c.converged && out.transcript.tied == c.tied &&
         out.transcript.final_answer == c.answer;
  return r;
}

}  // namespace faithrefine::testing
