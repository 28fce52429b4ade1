// src/error.cc


// Copyright 2026  The SAEP Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#include "saep/error.hpp"

namespace saep {

const char* ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kOk: return "ok";
    case ErrorCode::kInvalidArgument: return "invalid argument";
    case ErrorCode::kDimension: return "dimension error";
    case ErrorCode::kIndex: return "index error";
    case ErrorCode::kContract: return "contract violation";
    case ErrorCode::kNonFinite: return "non-finite value";
    case ErrorCode::kFileNotFound: return "file not found";
    case ErrorCode::kIo: return "i/o error";
    case ErrorCode::kUnsupportedFormat: return "unsupported format";
    case ErrorCode::kChannelCount: return "unsupported channel count";
    case ErrorCode::kTooShort: return "input too short";
    case ErrorCode::kBadMagic: return "bad magic";
    case ErrorCode::kBadVersion: return "unsupported format version";
    case ErrorCode::kTruncated: return "truncated file";
    case ErrorCode::kShapeMismatch: return "shape mismatch";
    case ErrorCode::kUnresolvedId: return "unresolved id";
    case ErrorCode::kEmptyInput: return "empty input";
    case ErrorCode::kConfig: return "configuration error";
    case ErrorCode::kInternal: return "internal error";
  }
  return "unknown error";
}

}  // namespace saep
