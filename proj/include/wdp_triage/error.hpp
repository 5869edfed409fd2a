// Copyright 2026 The wdp-triage Authors
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

#include <stdexcept>
#include <string>
#include <string_view>

namespace wdp {

enum class ErrorCode {
  invalid_instance,
  invalid_config,
  invalid_argument,
  too_large,
  not_optimal,
  not_trained,
  degenerate_data,
  io_error,
  parse_error,
  stage_failed,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::invalid_instance: return "E_INVALID_INSTANCE";
    case ErrorCode::invalid_config: return "E_INVALID_CONFIG";
    case ErrorCode::invalid_argument: return "E_INVALID_ARGUMENT";
    case ErrorCode::too_large: return "E_TOO_LARGE";
    case ErrorCode::not_optimal: return "E_NOT_OPTIMAL";
    case ErrorCode::not_trained: return "E_NOT_TRAINED";
    case ErrorCode::degenerate_data: return "E_DEGENERATE_DATA";
    case ErrorCode::io_error: return "E_IO";
    case ErrorCode::parse_error: return "E_PARSE";
    case ErrorCode::stage_failed: return "E_STAGE_FAILED";
  }
  return "E_UNKNOWN";
}

/// Every failure in the library surfaces as this exception. The code is
/// stable and machine-parseable; the message is for humans.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

  /// Single line of the form `E_CODE: message`.
  std::string line() const {
    std::string out(to_string(code_));
    out += ": ";
    for (char c : std::string_view(what())) out += (c == '\n' ? ' ' : c);
    return out;
  }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace wdp
