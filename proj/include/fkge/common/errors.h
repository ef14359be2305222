/*
 * Copyright 2026 The FKGE Privacy Lab Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef FKGE_COMMON_ERRORS_H_
#define FKGE_COMMON_ERRORS_H_

#include <stdexcept>
#include <string>

namespace fkge {

// Base class for every error raised by the library. The CLI maps subclasses
// onto exit codes, so new failure kinds should derive from one of these.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid caller-supplied argument (bad counts, out-of-range fractions).
class ArgumentError : public Error {
 public:
  using Error::Error;
};

// Malformed input file. Carries the 1-based line number when known.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : Error(what + " (line " + std::to_string(line) + ")"), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

class VocabularyError : public Error {
 public:
  using Error::Error;
};

class PartitionError : public Error {
 public:
  using Error::Error;
};

class GenerationError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class ProtocolError : public Error {
 public:
  using Error::Error;
};

class UnsupportedModelError : public Error {
 public:
  using Error::Error;
};

class AccountingError : public Error {
 public:
  using Error::Error;
};

// Privacy budget was already spent before any training could happen.
class BudgetExhaustedError : public ConfigError {
 public:
  BudgetExhaustedError(const std::string& what, int round = 0, int iteration = 0)
      : ConfigError(what), round_(round), iteration_(iteration) {}
  int round() const { return round_; }
  // Local iteration (1-based) whose events would have met the budget.
  int iteration() const { return iteration_; }

 private:
  int round_;
  int iteration_;
};

}  // namespace fkge

#endif  // FKGE_COMMON_ERRORS_H_
