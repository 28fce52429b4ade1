// src/eval.cc


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

#include "saep/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "saep/error.hpp"

namespace saep {
namespace {

std::string ReadText(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) Fail(ErrorCode::kFileNotFound, "cannot open " + path.string());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

int ParseLabel(const std::string& field, const std::string& where) {
  if (field == "1") return 1;
  if (field == "0") return 0;
  Fail(ErrorCode::kConfig, where + ": label must be 0 or 1, got '" + field + "'");
}

std::string Where(const std::string& origin, std::size_t line_no) {
  return origin + ":" + std::to_string(line_no);
}

}  // namespace

double CosineScore(std::span<const float> a, std::span<const float> b) {
  if (a.size() != b.size())
    Fail(ErrorCode::kDimension, "cosine_score: widths " + std::to_string(a.size()) +
                                    " and " + std::to_string(b.size()));
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += double(a[i]) * b[i];
    na += double(a[i]) * a[i];
    nb += double(b[i]) * b[i];
  }
  if (na == 0.0 || nb == 0.0)
    Fail(ErrorCode::kInvalidArgument, "cosine_score: zero-norm embedding");
  return std::clamp(dot / (std::sqrt(na) * std::sqrt(nb)), -1.0, 1.0);
}

std::vector<Trial> ParseTrialList(const std::string& text,
                                  const std::string& origin) {
  std::vector<Trial> trials;
  std::istringstream lines(text);
  std::string line;
  for (std::size_t line_no = 1; std::getline(lines, line); ++line_no) {
    std::istringstream fields(line);
    std::string label, enroll, test, extra;
    if (!(fields >> label) || label[0] == '#') continue;
    if (!(fields >> enroll >> test) || (fields >> extra))
      Fail(ErrorCode::kConfig, Where(origin, line_no) +
                                   ": expected `<label> <enroll_id> <test_id>`");
    trials.push_back({ParseLabel(label, Where(origin, line_no)), enroll, test});
  }
  if (trials.empty()) Fail(ErrorCode::kEmptyInput, origin + ": trial list is empty");
  return trials;
}

std::vector<Trial> LoadTrialList(const std::filesystem::path& path) {
  return ParseTrialList(ReadText(path), path.string());
}

std::string FormatTrialList(const std::vector<Trial>& trials) {
  std::string out;
  for (const Trial& t : trials)
    out += std::to_string(t.label) + " " + t.enroll_id + " " + t.test_id + "\n";
  return out;
}

std::vector<ScoredTrial> ScoreTrials(const std::vector<Trial>& trials,
                                     const EmbeddingTable& embeddings) {
  auto lookup = [&](const std::string& id) -> const std::vector<float>& {
    auto it = embeddings.find(id);
    if (it == embeddings.end())
      Fail(ErrorCode::kUnresolvedId, "no embedding for utterance '" + id + "'");
    return it->second;
  };
  std::vector<ScoredTrial> out;
  out.reserve(trials.size());
  for (const Trial& t : trials) {
    const auto& a = lookup(t.enroll_id);
    const auto& b = lookup(t.test_id);
    out.push_back({CosineScore(a, b), t.label, t.enroll_id, t.test_id});
  }
  return out;
}

std::string FormatScores(const std::vector<ScoredTrial>& scores) {
  std::string out;
  char buf[64];
  for (const ScoredTrial& s : scores) {
    std::snprintf(buf, sizeof(buf), "%.6f", s.score);
    out += buf;
    out += " " + std::to_string(s.label) + " " + s.enroll_id + " " + s.test_id + "\n";
  }
  return out;
}

std::vector<ScoredTrial> ParseScores(const std::string& text,
                                     const std::string& origin) {
  std::vector<ScoredTrial> scores;
  std::istringstream lines(text);
  std::string line;
  for (std::size_t line_no = 1; std::getline(lines, line); ++line_no) {
    std::istringstream fields(line);
    std::string score, label, enroll, test, extra;
    if (!(fields >> score) || score[0] == '#') continue;
    if (!(fields >> label >> enroll >> test) || (fields >> extra))
      Fail(ErrorCode::kConfig, Where(origin, line_no) +
                                   ": expected `<score> <label> <enroll_id> <test_id>`");
    char* end = nullptr;
    const double value = std::strtod(score.c_str(), &end);
    if (end != score.c_str() + score.size() || !std::isfinite(value))
      Fail(ErrorCode::kConfig, Where(origin, line_no) + ": bad score '" + score + "'");
    scores.push_back({value, ParseLabel(label, Where(origin, line_no)), enroll, test});
  }
  if (scores.empty()) Fail(ErrorCode::kEmptyInput, origin + ": score file is empty");
  return scores;
}

void SaveScores(const std::vector<ScoredTrial>& scores,
                const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) Fail(ErrorCode::kIo, "cannot write " + path.string());
  out << FormatScores(scores);
  if (!out) Fail(ErrorCode::kIo, "write failed: " + path.string());
}

std::vector<ScoredTrial> LoadScores(const std::filesystem::path& path) {
  return ParseScores(ReadText(path), path.string());
}

std::vector<DetPoint> DetPoints(std::span<const ScoredTrial> scores) {
  std::vector<double> targets, nontargets;
  for (const ScoredTrial& s : scores) {
    if (!std::isfinite(s.score))
      Fail(ErrorCode::kNonFinite, "non-finite score for " + s.enroll_id + " " + s.test_id);
    (s.label == 1 ? targets : nontargets).push_back(s.score);
  }
  if (targets.empty() || nontargets.empty())
    Fail(ErrorCode::kEmptyInput, "EER needs at least one target and one nontarget trial (have " +
                                     std::to_string(targets.size()) + " and " +
                                     std::to_string(nontargets.size()) + ")");
  std::sort(targets.begin(), targets.end());
  std::sort(nontargets.begin(), nontargets.end());
  std::vector<double> thresholds;
  thresholds.reserve(scores.size() + 1);
  for (const ScoredTrial& s : scores) thresholds.push_back(s.score);
  std::sort(thresholds.begin(), thresholds.end());
  thresholds.erase(std::unique(thresholds.begin(), thresholds.end()), thresholds.end());
  thresholds.push_back(std::numeric_limits<double>::infinity());

  const double nt = static_cast<double>(targets.size());
  const double nn = static_cast<double>(nontargets.size());
  std::vector<DetPoint> points;
  points.reserve(thresholds.size());
  for (double t : thresholds) {
    const auto rejected_targets =
        std::lower_bound(targets.begin(), targets.end(), t) - targets.begin();
    const auto rejected_nontargets =
        std::lower_bound(nontargets.begin(), nontargets.end(), t) - nontargets.begin();
    points.push_back({t, static_cast<double>(nontargets.size() - rejected_nontargets) / nn,
                      static_cast<double>(rejected_targets) / nt});
  }
  return points;
}

EerResult ComputeEer(std::span<const ScoredTrial> scores) {
  const std::vector<DetPoint> points = DetPoints(scores);
  // The first point has FAR = 1, FRR = 0 and the last FAR = 0, FRR = 1, so a
  // sign change always exists.
  for (std::size_t i = 1; i < points.size(); ++i) {
    const DetPoint& hi = points[i];
    const double d_hi = hi.far - hi.frr;
    if (d_hi > 0.0) continue;
    if (d_hi == 0.0) return {hi.far, hi.threshold};
    const DetPoint& lo = points[i - 1];
    const double d_lo = lo.far - lo.frr;
    const double alpha = d_lo / (d_lo - d_hi);
    const double eer = lo.far + alpha * (hi.far - lo.far);
    const double threshold = std::isinf(hi.threshold)
                                 ? lo.threshold
                                 : lo.threshold + alpha * (hi.threshold - lo.threshold);
    return {eer, threshold};
  }
  Fail(ErrorCode::kInternal, "DET staircase has no FAR = FRR crossing");
}

}  // namespace saep
