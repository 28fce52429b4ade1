// saep/eval.hpp


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

#ifndef SAEP_EVAL_HPP_
#define SAEP_EVAL_HPP_

#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace saep {

// dot(a, b) / (|a| |b|), accumulated in double. Throws kDimension on a width
// mismatch and kInvalidArgument when either vector has zero norm.
double CosineScore(std::span<const float> a, std::span<const float> b);

struct Trial {
  int label = 0;  // 1 target, 0 nontarget
  std::string enroll_id;
  std::string test_id;

  bool operator==(const Trial&) const = default;
};

// `<label> <enroll_id> <test_id>` per line. Throws kEmptyInput when the list
// has no trials and kConfig (with the line number) on a malformed line.
std::vector<Trial> ParseTrialList(const std::string& text,
                                  const std::string& origin = "<memory>");
std::vector<Trial> LoadTrialList(const std::filesystem::path& path);
std::string FormatTrialList(const std::vector<Trial>& trials);

struct ScoredTrial {
  double score = 0.0;
  int label = 0;
  std::string enroll_id;
  std::string test_id;
};

using EmbeddingTable = std::map<std::string, std::vector<float>>;

// One cosine score per trial, in trial order. Throws kUnresolvedId naming
// the first id without an embedding.
std::vector<ScoredTrial> ScoreTrials(const std::vector<Trial>& trials,
                                     const EmbeddingTable& embeddings);

// `<score> <label> <enroll_id> <test_id>` with six decimals.
std::string FormatScores(const std::vector<ScoredTrial>& scores);
std::vector<ScoredTrial> ParseScores(const std::string& text,
                                     const std::string& origin = "<memory>");
void SaveScores(const std::vector<ScoredTrial>& scores,
                const std::filesystem::path& path);
std::vector<ScoredTrial> LoadScores(const std::filesystem::path& path);

struct DetPoint {
  double threshold;  // +inf for the final reject-everything point
  double far;        // nontargets with score >= threshold
  double frr;        // targets with score < threshold
};

// One operating point per distinct score (ascending) plus +inf, so the
// staircase runs from (1, 0) to (0, 1). Throws kEmptyInput when either
// class has no trials.
std::vector<DetPoint> DetPoints(std::span<const ScoredTrial> scores);

struct EerResult {
  double eer = 0.0;
  double threshold = 0.0;
};

// Walks the DET staircase to the first point where FAR - FRR <= 0. An exact
// zero is returned as is; otherwise EER and threshold are interpolated
// linearly between that point and the one before it.
EerResult ComputeEer(std::span<const ScoredTrial> scores);

}  // namespace saep

#endif  // SAEP_EVAL_HPP_
