// saep/config.hpp


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

#ifndef SAEP_CONFIG_HPP_
#define SAEP_CONFIG_HPP_

#include <filesystem>
#include <string>
#include <vector>

#include "saep/model.hpp"
#include "saep/training.hpp"

namespace saep {

struct RunConfig {
  ModelConfig model;
  TrainConfig train;

  void Validate() const;
  bool operator==(const RunConfig&) const = default;
};

// Every key accepted by ParseRunConfig, in the order FormatRunConfig writes
// them.
const std::vector<std::string>& RunConfigKeys();

// Assigns one key from its text form. Throws kConfig for unknown keys and
// unparsable values.
void SetRunConfigValue(RunConfig& config, const std::string& key,
                       const std::string& value);
std::string GetRunConfigValue(const RunConfig& config, const std::string& key);

// Flat `key = value` lines; '#' starts a comment. Omitted keys keep their
// defaults, and unknown or repeated keys are errors. Every error message
// carries `origin:line`.
RunConfig ParseRunConfig(const std::string& text,
                         const std::string& origin = "<memory>");
RunConfig LoadRunConfig(const std::filesystem::path& path);
// Parses back to an equal config.
std::string FormatRunConfig(const RunConfig& config);

}  // namespace saep

#endif  // SAEP_CONFIG_HPP_
