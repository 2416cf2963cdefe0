//
// Copyright 2026 The decoyqkd Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

#ifndef DECOYQKD_ERRORS_HPP
#define DECOYQKD_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace decoyqkd {

enum class ErrorCode {
  kOutOfRange,
  kDegenerate,
  kNoSecureKey,
  kMissingField,
  kLengthMismatch,
  kParseError,
  kZeroRange,
  kDivisionGuard,
};

inline const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kOutOfRange: return "OUT_OF_RANGE";
    case ErrorCode::kDegenerate: return "DEGENERATE";
    case ErrorCode::kNoSecureKey: return "NO_SECURE_KEY";
    case ErrorCode::kMissingField: return "MISSING_FIELD";
    case ErrorCode::kLengthMismatch: return "LENGTH_MISMATCH";
    case ErrorCode::kParseError: return "PARSE_ERROR";
    case ErrorCode::kZeroRange: return "ZERO_RANGE";
    case ErrorCode::kDivisionGuard: return "DIVISION_GUARD";
  }
  return "UNKNOWN";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what),
        code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace decoyqkd

#endif  // DECOYQKD_ERRORS_HPP
