// saep/error.hpp

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

#ifndef SAEP_ERROR_HPP_
#define SAEP_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace saep {

// Values mirror saep_status in saep.h; keep the two in sync.
enum class ErrorCode : int {
  kOk = 0,
  kInvalidArgument = 1,
  kDimension = 2,
  kIndex = 3,
  kContract = 4,
  kNonFinite = 5,
  kFileNotFound = 6,
  kIo = 7,
  kUnsupportedFormat = 8,
  kChannelCount = 9,
  kTooShort = 10,
  kBadMagic = 11,
  kBadVersion = 12,
  kTruncated = 13,
  kShapeMismatch = 14,
  kUnresolvedId = 15,
  kEmptyInput = 16,
  kConfig = 17,
  kInternal = 18,
};

const char* ErrorCodeName(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void Fail(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

}  // namespace saep

#endif  // SAEP_ERROR_HPP_
