// Copyright 2026 The fdspeech Authors.
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

#include <stdexcept>
#include <string>
#include <string_view>

namespace fdspeech {

// Every failure raised by the library carries one of these codes. The name of
// the code doubles as the machine-readable reason written to skip logs.
enum class ErrorCode {
  kUnsupportedFormat,
  kChannelError,
  kRateError,
  kEmptySignal,
  kLengthError,
  kTooShort,
  kViewMismatch,
  kInsufficientData,
  kZeroValue,
  kInsufficientDigits,
  kDomainError,
  kEmptyDataset,
  kLayoutMismatch,
  kParseError,
  kDegenerateProtocol,
  kMissingAudio,
  kDesignFailure,
  kInvalidConfig,
  kIoError,
};

std::string_view ErrorCodeName(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(ErrorCodeName(code)) + ": " + message),
        code_(code),
        message_(message) {}

  ErrorCode code() const { return code_; }
  // The text without the leading code name.
  const std::string& message() const { return message_; }

 private:
  ErrorCode code_;
  std::string message_;
};

}  // namespace fdspeech
