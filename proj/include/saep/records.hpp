// saep/records.hpp


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

#ifndef SAEP_RECORDS_HPP_
#define SAEP_RECORDS_HPP_

#include <filesystem>
#include <string>
#include <vector>

#include "saep/tensor.hpp"

namespace saep {

// A named float tensor; the unit of the binary record file format shared by
// checkpoints, feature caches and embedding archives.
struct Record {
  std::string name;
  Tensor tensor;
};

// Little-endian layout:
//   "SAEP" | u32 version (1) | u32 record count
//   per record: u32 name length | name bytes | u32 rank | u64 extents...
//               | float32 data, row-major
class RecordFile {
 public:
  static constexpr char kMagic[4] = {'S', 'A', 'E', 'P'};
  static constexpr std::uint32_t kVersion = 1;

  std::vector<Record> records;

  void Add(std::string name, Tensor tensor);
  const Record* Find(const std::string& name) const;
  // Throws kUnresolvedId when absent.
  const Tensor& Get(const std::string& name) const;

  std::string Serialize() const;
  // Errors: kBadMagic, kBadVersion, kTruncated, kDimension.
  static RecordFile Parse(const std::string& bytes,
                          const std::string& origin = "<memory>");

  void Save(const std::filesystem::path& path) const;
  // Adds kFileNotFound to the Parse errors.
  static RecordFile Load(const std::filesystem::path& path);
};

}  // namespace saep

#endif  // SAEP_RECORDS_HPP_
