/*
 * Copyright 2026 The gamma-audit Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef GAMMA_AUDIT_ERRORS_HPP_
#define GAMMA_AUDIT_ERRORS_HPP_

#include <cstddef>
#include <stdexcept>
#include <string>

namespace gamma_audit {

// Base class for every error caused by caller input (bad data, violated
// preconditions, infeasible requests). The CLI maps these to exit code 2;
// anything else escaping a command is treated as an internal error.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A prediction vector or family member used with a dataset it was not built
// for.
class BindingError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

// A group lacks positive-label rows, so conditional quantities are undefined.
class MissingPositivesError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class InfeasibleError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

// Malformed input file. `line()` is 1-based; 0 when not tied to a line.
class DataError : public ValidationError {
 public:
  DataError(const std::string& message, std::size_t line = 0)
      : ValidationError(line == 0 ? message
                                  : "line " + std::to_string(line) + ": " +
                                        message),
        line_(line) {}

  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

}  // namespace gamma_audit

#endif  // GAMMA_AUDIT_ERRORS_HPP_
