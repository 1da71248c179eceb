// Copyright 2026 The tirforge Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
// https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace tirforge {

// Base for every data or environment failure surfaced by the library. The CLI
// maps these to exit status 1; usage errors never derive from this type.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A documented precondition of an operation was not met by the caller.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

class NonFiniteInput : public PreconditionError {
 public:
  using PreconditionError::PreconditionError;
};

class EmptyInput : public PreconditionError {
 public:
  using PreconditionError::PreconditionError;
};

class LengthMismatch : public PreconditionError {
 public:
  using PreconditionError::PreconditionError;
};

// --- serialization / files -------------------------------------------------

class FormatError : public Error {
 public:
  using Error::Error;
};

class MalformedRow : public FormatError {
 public:
  MalformedRow(std::size_t line, const std::string& why)
      : FormatError("malformed row at line " + std::to_string(line) + ": " +
                    why),
        line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class DuplicateId : public FormatError {
 public:
  explicit DuplicateId(std::string id)
      : FormatError("duplicate id: " + id), id_(std::move(id)) {}
  const std::string& id() const noexcept { return id_; }

 private:
  std::string id_;
};

class UnknownProblemId : public Error {
 public:
  explicit UnknownProblemId(std::string id)
      : Error("unknown problem id: " + id), id_(std::move(id)) {}
  const std::string& id() const noexcept { return id_; }

 private:
  std::string id_;
};

// --- response parsing ------------------------------------------------------

class ParseError : public Error {
 public:
  using Error::Error;
};

class NoJsonFound : public ParseError {
 public:
  NoJsonFound() : ParseError("no JSON object found in response") {}
};

class MissingKey : public ParseError {
 public:
  explicit MissingKey(std::string key)
      : ParseError("missing key: " + key), key_(std::move(key)) {}
  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

class BadPattern : public ParseError {
 public:
  explicit BadPattern(const std::string& value)
      : ParseError("chosen_pattern must be \"A\" or \"B\", got \"" + value +
                   "\"") {}
};

class SchemaViolation : public ParseError {
 public:
  explicit SchemaViolation(std::vector<std::string> violations);
  const std::vector<std::string>& violations() const noexcept {
    return violations_;
  }

 private:
  std::vector<std::string> violations_;
};

class UnparseableJudgment : public ParseError {
 public:
  explicit UnparseableJudgment(const std::string& reply)
      : ParseError("no pattern label in judge reply: " + reply.substr(0, 80)) {}
};

// --- endpoint --------------------------------------------------------------

class EndpointError : public Error {
 public:
  EndpointError(const std::string& what, int status = 0)
      : Error(what), status_(status) {}
  // Last HTTP status observed; 0 for transport-level failures.
  int status() const noexcept { return status_; }

 private:
  int status_;
};

class EndpointUnreachable : public EndpointError {
 public:
  using EndpointError::EndpointError;
};

class ExhaustedRetries : public EndpointError {
 public:
  ExhaustedRetries(const std::string& what, int status, int attempts)
      : EndpointError(what, status), attempts_(attempts) {}
  int attempts() const noexcept { return attempts_; }

 private:
  int attempts_;
};

class AuthFailure : public EndpointError {
 public:
  using EndpointError::EndpointError;
};

}  // namespace tirforge
