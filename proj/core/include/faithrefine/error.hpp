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

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace faithrefine {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid configuration: bad enum value, missing pool, max_rounds < 1, ...
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Input data that violates a schema. `line` is 1-based, 0 when unknown.
class DataError : public Error {
 public:
  DataError(const std::string& what, std::size_t line = 0)
      : Error(line == 0 ? what : "line " + std::to_string(line) + ": " + what),
        line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// A violated operation precondition (empty output, mismatched lengths, ...).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Backend transport failed after all retries, or returned a non-retryable status.
class TransportError : public Error {
 public:
  using Error::Error;
};

class MissingCredentials : public Error {
 public:
  using Error::Error;
};

class ScriptExhausted : public Error {
 public:
  explicit ScriptExhausted(const std::string& agent_id)
      : Error("script exhausted for agent '" + agent_id + "'") {}
};

class TemplateError : public Error {
 public:
  using Error::Error;
};

/// All three structured-reply parse paths failed.
class ParseError : public Error {
 public:
  using Error::Error;
};

/// Every agent abstained in the deciding round of a closed-set debate.
class NoVerdictError : public Error {
 public:
  using Error::Error;
};

/// A subtask failed inside run_pipeline; carries the item id and stage name.
class StageError : public Error {
 public:
  StageError(std::string item_id, std::string stage, const std::string& cause)
      : Error("item '" + item_id + "' failed at stage " + stage + ": " + cause),
        item_id_(std::move(item_id)),
        stage_(std::move(stage)) {}
  const std::string& item_id() const noexcept { return item_id_; }
  const std::string& stage() const noexcept { return stage_; }

 private:
  std::string item_id_;
  std::string stage_;
};

}  // namespace faithrefine
