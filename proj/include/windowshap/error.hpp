/*
 * Copyright 2026 The windowshap Authors.
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

#ifndef WINDOWSHAP_ERROR_HPP_
#define WINDOWSHAP_ERROR_HPP_

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace windowshap {

enum class ErrorCode {
  kShapeMismatch,
  kNonFiniteValue,
  kDuplicateVariableName,
  kOverlappingWindows,
  kIncompleteCoverage,
  kInvalidWindowLength,
  kInvalidStride,
  kUnsplittableWindow,
  kInvalidArgument,
  kTooManyPlayers,
  kDegenerateCoalition,
  kSingularSystem,
  kPredictorFailure,
  kConnectionFailure,
  kProtocolViolation,
  kTimeout,
  kIo,
  kParse,
};

const char* error_code_name(ErrorCode code);

// Coarse classification used by the CLI to pick an exit code.
enum class ErrorCategory { kConfig, kModel, kIo };
ErrorCategory error_category(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

class OverlappingWindowsError : public Error {
 public:
  OverlappingWindowsError(std::size_t variable, std::size_t step);

  std::size_t variable() const { return variable_; }
  std::size_t step() const { return step_; }

 private:
  std::size_t variable_;
  std::size_t step_;
};

class IncompleteCoverageError : public Error {
 public:
  IncompleteCoverageError(std::size_t variable,
                          std::vector<std::size_t> missing_steps);

  std::size_t variable() const { return variable_; }
  const std::vector<std::size_t>& missing_steps() const {
    return missing_steps_;
  }

 private:
  std::size_t variable_;
  std::vector<std::size_t> missing_steps_;
};

}  // namespace windowshap

#endif  // WINDOWSHAP_ERROR_HPP_
