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

// Round-based multi-agent discussion.
//
// Round 1 sends the initial prompt to every agent independently. Each later
// round sends every agent the initial prompt wrapped with all agents'
// previous-round answers (its own included), in agent order. Closed-set
// debates stop as soon as all non-abstaining agents give the same normalized
// answer; generative debates always run the full round budget.

#pragma once

#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "faithrefine/domain.hpp"
#include "faithrefine/gateway.hpp"

namespace faithrefine {

enum class TiePolicy { prefer_faithful, lowest_index, first_agent };

std::string_view to_string(TiePolicy v);
TiePolicy parse_tie_policy(std::string_view s);

struct DebateConfig {
  int max_rounds = 10;
  TiePolicy tie_policy = TiePolicy::lowest_index;
  bool record_transcript = true;
  /// The answer meaning "no refinement needed", used by prefer_faithful.
  std::string faithful_answer = "yes";
  /// Issue the calls of one round concurrently.
  bool parallel_agents = true;

  void validate() const;
};

struct VoteResult {
  std::string winner;
  bool tied = false;
};

/// Plurality over (agent_id, answer) pairs in agent order; abstentions must
/// already be removed. Ties: prefer_faithful picks `faithful_answer` when it
/// is among the leaders, lowest_index picks the leader listed first in
/// `domain`, first_agent picks the leader given by the earliest agent.
/// Throws NoVerdictError on an empty list.
VoteResult aggregate_votes(const std::vector<std::pair<std::string, std::string>>& answers,
                           const AnswerDomain& domain, TiePolicy policy,
                           std::string_view faithful_answer = "yes");

struct ClosedSetOutcome {
  std::string answer;
  DebateTranscript transcript;
};

/// Throws NoVerdictError when every agent abstains in the deciding round.
ClosedSetOutcome run_closed_set_debate(const AgentPool& agents, const std::string& initial_prompt,
                                       const AnswerDomain& domain, const DebateConfig& config);

struct GenerativeOutcome {
  std::vector<std::pair<std::string, std::string>> finals;
  DebateTranscript transcript;
};

GenerativeOutcome run_generative_debate(const AgentPool& agents, const std::string& initial_prompt,
                                        const DebateConfig& config);

}  // namespace faithrefine
