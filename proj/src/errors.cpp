// Copyright 2026 The qsl Authors
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

#include "qsl/errors.hpp"

namespace qsl {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kNonHermitian: return "NonHermitian";
    case ErrorCode::kNotUnitary: return "NotUnitary";
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kIndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::kScheduleViolation: return "ScheduleViolation";
    case ErrorCode::kUnsupportedGateForInteraction: return "UnsupportedGateForInteraction";
    case ErrorCode::kBracketNotFound: return "BracketNotFound";
    case ErrorCode::kNotTracePreserving: return "NotTracePreserving";
    case ErrorCode::kNonHermitianChi: return "NonHermitianChi";
    case ErrorCode::kSingularT: return "SingularT";
    case ErrorCode::kDidNotConverge: return "DidNotConverge";
    case ErrorCode::kRootNotBracketed: return "RootNotBracketed";
    case ErrorCode::kStepTooLarge: return "StepTooLarge";
    case ErrorCode::kParse: return "Parse";
  }
  return "Unknown";
}

}  // namespace qsl
