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

#include <array>

#include <nlohmann/json.hpp>

#include "faithrefine/error.hpp"
#include "faithrefine/gateway.hpp"

namespace faithrefine {

namespace {

// Task prompts. Placeholders are {Name}; doubled braces are literal.

constexpr std::string_view kDirectRefine =
    "I summarized the following document on the topic '{Topic}':\n"
    "{Document}\n"
    "Summary of the above document on topic '{Topic}':\n"
    "{Summary}\n"
    "If there are any factual inconsistencies in the summary then edit the summary such that "
    "the refinement doesn't have any inconsistencies. Consistency in this context implies that "
    "all information presented in the summary is substantiated by the document. If the summary "
    "is consistent, then just the copy the same summary with no changes. When refining, make "
    "the minimum number of changes.";

constexpr std::string_view kDetect =
    "Document:\n"
    "{Document}\n"
    "Sentence:\n"
    "{Sentence}\n"
    "Determine if the sentence is factually consistent with the document provided above. A "
    "sentence is factually consistent if it can be entailed (either stated or implied) by the "
    "document. Please briefly explain the reason within 50 words. Output your answer in json "
    "format, with the format as follows: {{\"reasoning\": \"\", \"answer\": \"\"}}. Please "
    "strictly output in JSON format. Only answer yes or no in the \"answer\" field.";

constexpr std::string_view kRerank =
    "Document:\n"
    "{Document}\n"
    "Summarize the provided document focusing on \"{Topic}\". The summary should be less than "
    "50 words in length.\n"
    "{SummaryList}\n"
    "Select the best summary that contains the least amount of factual inconsistencies. "
    "Consistency in this context implies that all information presented in the summary is "
    "substantiated by the document. Please briefly explain the reason within 50 words. Output "
    "your answer in json format, with the format as follows: {{\"reasoning\": \"\", \"answer\": "
    "\"\"}}. Please strictly output in JSON format. Only answer numbers in the \"answer\" field.";

constexpr std::string_view kCritique =
    "I summarized the following document on the topic: '{Topic}':\n"
    "{Document}\n"
    "Summary of the above document on topic '{Topic}':\n"
    "{Summary}\n"
    "Reason about the factually inconsistent span in the sentence. A span is factually "
    "inconsistent if it cannot be substantiated by the document. Give reasons for the factual "
    "inconsistency, point to the error span by stating \"The error span: <span from sentence>\" "
    "and end your answer with a suggested fix to the summary.";

constexpr std::string_view kRefine =
    "I summarized the following document on the topic '{Topic}':\n"
    "{Document}\n"
    "Summary of the above document on topic '{Topic}':\n"
    "{Summary}\n"
    "Feedback for the above summary:\n"
    "{Feedback}\n"
    "Edit the user response such that the refinement doesn't have any errors mentioned in the "
    "feedback. Make the minimum number of changes when doing the refinement. Do not include a "
    "preamble.";

constexpr std::string_view kDebateWrapper =
    "{InitialPrompt}\n"
    "Carefully review the following solutions from other agents as additional information, "
    "and provide your own answer and step-by-step reasoning to the question.\n"
    "{AgentAnswers}";

// Adapted 1-5 faithfulness rubric.
constexpr std::string_view kLikertJudge =
    "You will be given a document and a summary of that document. Rate how faithful the "
    "summary is to the document on a scale from 1 to 5.\n"
    "A faithful summary only contains information that is stated in or can be inferred from "
    "the document.\n"
    "5: Every piece of information in the summary is supported by the document.\n"
    "4: The summary is supported by the document except for a minor detail that does not "
    "change its meaning.\n"
    "3: The summary contains one clear piece of information that is not supported by or "
    "contradicts the document.\n"
    "2: The summary contains several pieces of unsupported or contradicted information.\n"
    "1: Most of the summary is unsupported by or contradicts the document.\n"
    "Document:\n"
    "{Document}\n"
    "Summary:\n"
    "{Summary}\n"
    "Output your answer in json format, with the format as follows: {{\"reasoning\": \"\", "
    "\"answer\": \"\"}}. Please strictly output in JSON format. Only answer a number from 1 to 5 "
    "in the \"answer\" field.";

// Reconstructed three-way matching instruction.
constexpr std::string_view kCritiqueJudge =
    "Document:\n"
    "{Document}\n"
    "Sentence:\n"
    "{Sentence}\n"
    "Human-written critique:\n"
    "{HumanCritique}\n"
    "Generated critique:\n"
    "{GeneratedCritique}\n"
    "Assess whether the generated critique aligns with the human-written critique. Select one "
    "of the following options:\n"
    "(1) Error Match: The generated critique identifies the same error as described by the "
    "human.\n"
    "(2) Error, No Match: The generated critique discusses a different error than the one "
    "noted by the human.\n"
    "(3) No Error Detected, No Match: The generated critique states that there is no error, "
    "despite the human indicating otherwise.\n"
    "Please briefly explain the reason within 50 words. Output your answer in json format, "
    "with the format as follows: {{\"reasoning\": \"\", \"answer\": \"\"}}. Please strictly "
    "output in JSON format. Only answer 1, 2 or 3 in the \"answer\" field.";

// Selection over drafted critiques, shaped after the summary rerank prompt.
constexpr std::string_view kCritiqueRerank =
    "Document:\n"
    "{Document}\n"
    "Sentence:\n"
    "{Sentence}\n"
    "{CritiqueList}\n"
    "Select the best critique: the one that most accurately identifies the factually "
    "inconsistent span of the sentence with respect to the document and proposes a correct "
    "fix. Please briefly explain the reason within 50 words. Output your answer in json "
    "format, with the format as follows: {{\"reasoning\": \"\", \"answer\": \"\"}}. Please "
    "strictly output in JSON format. Only answer numbers in the \"answer\" field.";

constexpr std::array<PromptTemplate, 9> kTemplates{{
    {TemplateId::direct_refine, kDirectRefine},
    {TemplateId::detect, kDetect},
    {TemplateId::rerank, kRerank},
    {TemplateId::critique, kCritique},
    {TemplateId::refine, kRefine},
    {TemplateId::debate_wrapper, kDebateWrapper},
    {TemplateId::likert_judge, kLikertJudge},
    {TemplateId::critique_judge, kCritiqueJudge},
    {TemplateId::critique_rerank, kCritiqueRerank},
}};

bool is_ident_start(char c) { return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || c == '_'; }
bool is_ident(char c) { return is_ident_start(c) || (c >= '0' && c <= '9'); }

}  // namespace

std::string_view to_string(TemplateId v) {
  switch (v) {
    case TemplateId::direct_refine: return "direct_refine";
    case TemplateId::detect: return "detect";
    case TemplateId::rerank: return "rerank";
    case TemplateId::critique: return "critique";
    case TemplateId::refine: return "refine";
    case TemplateId::debate_wrapper: return "debate_wrapper";
    case TemplateId::likert_judge: return "likert_judge";
    case TemplateId::critique_judge: return "critique_judge";
    case TemplateId::critique_rerank: return "critique_rerank";
  }
  return "?";
}

const PromptTemplate& prompt_template(TemplateId id) {
  for (const auto& t : kTemplates)
    if (t.template_id == id) return t;
  throw TemplateError("unknown template id");
}

std::string render_body(std::string_view body, const Bindings& bindings) {
  std::string out;
  out.reserve(body.size() * 2);
  std::size_t i = 0;
  while (i < body.size()) {
    const char c = body[i];
    if (c == '{' && i + 1 < body.size() && body[i + 1] == '{') {
      out.push_back('{');
      i += 2;
      continue;
    }
    if (c == '}' && i + 1 < body.size() && body[i + 1] == '}') {
      out.push_back('}');
      i += 2;
      continue;
    }
    if (c == '{' && i + 1 < body.size() && is_ident_start(body[i + 1])) {
      std::size_t j = i + 1;
      while (j < body.size() && is_ident(body[j])) ++j;
      if (j < body.size() && body[j] == '}') {
        const std::string name(body.substr(i + 1, j - i - 1));
        const auto it = bindings.find(name);
        if (it == bindings.end()) throw TemplateError("unbound placeholder {" + name + "}");
        out += it->second;
        i = j + 1;
        continue;
      }
    }
    out.push_back(c);
    ++i;
  }
  return out;
}

std::string render_prompt(TemplateId id, const Bindings& bindings) {
  return render_body(prompt_template(id).body, bindings);
}

std::string render_debate_prompt(std::string_view initial_prompt,
                                 const std::vector<PriorAnswer>& prior) {
  constexpr auto kReplace = nlohmann::json::error_handler_t::replace;
  std::string answers;
  for (std::size_t i = 0; i < prior.size(); ++i) {
    if (i > 0) answers += '\n';
    answers += "One agent's answer: {\"reasoning\": ";
    answers += nlohmann::json(prior[i].reasoning).dump(-1, ' ', false, kReplace);
    answers += ", \"answer\": ";
    answers += nlohmann::json(prior[i].answer).dump(-1, ' ', false, kReplace);
    answers += '}';
  }
  return render_prompt(TemplateId::debate_wrapper,
                       {{"InitialPrompt", std::string(initial_prompt)}, {"AgentAnswers", answers}});
}

std::string numbered_list(std::string_view noun, const std::vector<std::string>& items) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i > 0) out += '\n';
    out += "### ";
    out += noun;
    out += ' ';
    out += std::to_string(i + 1);
    out += ": ";
    out += items[i];
  }
  return out;
}

}  // namespace faithrefine
