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

#include "fdspeech/error.hpp"

namespace fdspeech {

std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kUnsupportedFormat: return "UnsupportedFormat";
    case ErrorCode::kChannelError: return "ChannelError";
    case ErrorCode::kRateError: return "RateError";
    case ErrorCode::kEmptySignal: return "EmptySignal";
    case ErrorCode::kLengthError: return "LengthError";
    case ErrorCode::kTooShort: return "TooShort";
    case ErrorCode::kViewMismatch: return "ViewMismatch";
    case ErrorCode::kInsufficientData: return "InsufficientData";
    case ErrorCode::kZeroValue: return "ZeroValue";
    case ErrorCode::kInsufficientDigits: return "InsufficientDigits";
    case ErrorCode::kDomainError: return "DomainError";
    case ErrorCode::kEmptyDataset: return "EmptyDataset";
    case ErrorCode::kLayoutMismatch: return "LayoutMismatch";
    case ErrorCode::kParseError: return "ParseError";
    case ErrorCode::kDegenerateProtocol: return "DegenerateProtocol";
    case ErrorCode::kMissingAudio: return "MissingAudio";
    case ErrorCode::kDesignFailure: return "DesignFailure";
    case ErrorCode::kInvalidConfig: return "InvalidConfig";
    case ErrorCode::kIoError: return "IoError";
  }
  return "Unknown";
}

}  // namespace fdspeech
