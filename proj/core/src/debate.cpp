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

#include "faithrefine/debate.hpp"

#include <algorithm>
#include <functional>
#include <future>
#include <map>

#include "faithrefine/error.hpp"

namespace faithrefine {

std::string_view to_string(TiePolicy v) {
  switch (v) {
    case TiePolicy::prefer_faithful: return "prefer_faithful";
    case TiePolicy::lowest_index: return "lowest_index";
    case TiePolicy::first_agent: return "first_agent";
  }
  return "?";
}

TiePolicy parse_tie_policy(std::string_view s) {
  if (s == "prefer_faithful") return TiePolicy::prefer_faithful;
  if (s == "lowest_index") return TiePolicy::lowest_index;
  if (s == "first_agent") return TiePolicy::first_agent;
  throw ConfigError("unknown tie_policy '" + std::string(s) + "'");
}

void DebateConfig::validate() const {
  if (max_rounds < 1)
    throw ConfigError("max_rounds must be >= 1, got " + std::to_string(max_rounds));
}

VoteResult aggregate_votes(const std::vector<std::pair<std::string, std::string>>& answers,
                           const AnswerDomain& domain, TiePolicy policy,
                           std::string_view faithful_answer) {
  if (answers.empty()) throw NoVerdictError("no non-abstaining answers to aggregate");

  std::map<std::string, int> counts;
  for (const auto& [agent, answer] : answers) ++counts[answer];
  int top = 0;
  for (const auto& [answer, n] : counts) top = std::max(top, n);
  std::vector<std::string> leaders;
  for (const auto& [answer, n] : counts)
    if (n == top) leaders.push_back(answer);
  if (leaders.size() == 1) return {leaders.front(), false};

  auto domain_rank = [&](const std::string& a) {
    const auto it = std::find_if(domain.begin(), domain.end(), [&](const std::string& d) {
      return normalize_answer(d) == a;
    });
    return static_cast<std::size_t>(it - domain.begin());
  };
  auto by_domain_order = [&] {
    return *std::min_element(leaders.begin(), leaders.end(),
                             [&](const std::string& a, const std::string& b) {
                               const auto ra = domain_rank(a), rb = domain_rank(b);
                               return ra != rb ? ra < rb : a < b;
                             });
  };

  switch (policy) {
    case TiePolicy::prefer_faithful: {
      const std::string faithful = normalize_answer(faithful_answer);
      if (std::find(leaders.begin(), leaders.end(), faithful) != leaders.end())
        return {faithful, true};
      return {by_domain_order(), true};
    }
    case TiePolicy::lowest_index:
      return {by_domain_order(), true};
    case TiePolicy::first_agent:
      for (const auto& [agent, answer] : answers)
        if (std::find(leaders.begin(), leaders.end(), answer) != leaders.end())
          return {answer, true};
      break;
  }
  return {by_domain_order(), true};
}

namespace {

// Runs one call per agent, concurrently when allowed; results stay in agent order.
template <typename Turn>
std::vector<Turn> run_round(const AgentPool& agents, const std::vector<std::string>& prompts,
                            bool parallel, const std::function<Turn(Agent&, const std::string&)>& call) {
  std::vector<Turn> turns;
  turns.reserve(agents.size());
  if (!parallel || agents.size() < 2) {
    for (std::size_t i = 0; i < agents.size(); ++i) turns.push_back(call(*agents[i], prompts[i]));
    return turns;
  }
  std::vector<std::future<Turn>> pending;
  pending.reserve(agents.size());
  for (std::size_t i = 0; i < agents.size(); ++i)
    pending.push_back(std::async(std::launch::async, call, std::ref(*agents[i]), std::cref(prompts[i])));
  for (auto& f : pending) f.wait();
  for (auto& f : pending) turns.push_back(f.get());
  return turns;
}

void check_pool(const AgentPool& agents) {
  if (agents.empty()) throw InvalidArgument("debate needs at least one agent");
  for (const auto& a : agents)
    if (!a) throw InvalidArgument("debate pool contains a null agent");
}

void strip_if_unrecorded(DebateTranscript& t, const DebateConfig& config) {
  if (config.record_transcript) return;
  for (auto& round : t.rounds)
    for (auto& turn : round.turns) {
      turn.prompt.clear();
      turn.raw.clear();
    }
}

}  // namespace

ClosedSetOutcome run_closed_set_debate(const AgentPool& agents, const std::string& initial_prompt,
                                       const AnswerDomain& domain, const DebateConfig& config) {
  check_pool(agents);
  config.validate();
  if (domain.empty()) throw InvalidArgument("closed-set debate needs a non-empty answer domain");

  ClosedSetOutcome out;
  out.transcript.kind = DebateKind::closed_set;
  std::function<AgentTurn(Agent&, const std::string&)> call =
      [&domain](Agent& agent, const std::string& prompt) {
        return ask_structured(agent, prompt, domain);
      };

  std::vector<std::string> prompts(agents.size(), initial_prompt);
  for (int round = 1;; ++round) {
    DebateRound r{run_round(agents, prompts, config.parallel_agents, call)};

    std::vector<std::pair<std::string, std::string>> votes;
    std::vector<PriorAnswer> prior;
    for (const auto& turn : r.turns) {
      if (turn.abstained) continue;
      votes.emplace_back(turn.agent_id, turn.answer);
      prior.push_back({turn.reasoning, turn.answer});
    }
    out.transcript.rounds.push_back(std::move(r));

    const bool unanimous =
        !votes.empty() && std::all_of(votes.begin(), votes.end(), [&](const auto& v) {
          return v.second == votes.front().second;
        });
    if (unanimous) {
      out.answer = votes.front().second;
      out.transcript.converged = true;
      break;
    }
    if (round == config.max_rounds) {
      if (votes.empty()) {
        strip_if_unrecorded(out.transcript, config);
        throw NoVerdictError("all agents abstained in round " + std::to_string(round));
      }
      const auto vote = aggregate_votes(votes, domain, config.tie_policy, config.faithful_answer);
      out.answer = vote.winner;
      out.transcript.tied = vote.tied;
      break;
    }
    const std::string next = prior.empty() ? initial_prompt
                                           : render_debate_prompt(initial_prompt, prior);
    std::fill(prompts.begin(), prompts.end(), next);
  }
  out.transcript.final_answer = out.answer;
  strip_if_unrecorded(out.transcript, config);
  return out;
}

GenerativeOutcome run_generative_debate(const AgentPool& agents, const std::string& initial_prompt,
                                        const DebateConfig& config) {
  check_pool(agents);
  config.validate();

  GenerativeOutcome out;
  out.transcript.kind = DebateKind::generative;
  std::function<AgentTurn(Agent&, const std::string&)> call = [](Agent& agent,
                                                                 const std::string& prompt) {
    AgentTurn turn;
    turn.agent_id = agent.id();
    turn.prompt = prompt;
    turn.raw = agent.complete(prompt);
    turn.answer = turn.raw;
    return turn;
  };

  std::vector<std::string> prompts(agents.size(), initial_prompt);
  for (int round = 1; round <= config.max_rounds; ++round) {
    DebateRound r{run_round(agents, prompts, config.parallel_agents, call)};
    std::vector<PriorAnswer> prior;
    for (const auto& turn : r.turns) prior.push_back({turn.reasoning, turn.answer});
    out.transcript.rounds.push_back(std::move(r));
    if (round < config.max_rounds)
      std::fill(prompts.begin(), prompts.end(), render_debate_prompt(initial_prompt, prior));
  }
  for (const auto& turn : out.transcript.rounds.back().turns)
    out.finals.emplace_back(turn.agent_id, turn.answer);
  out.transcript.finals = out.finals;
  strip_if_unrecorded(out.transcript, config);
  return out;
}

}  // namespace faithrefine
