// src/config.cc


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

#include "saep/config.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <sstream>

#include "saep/error.hpp"

namespace saep {
namespace {

std::string Trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <typename Int>
Int ParseInt(const std::string& key, const std::string& text) {
  Int v{};
  const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || end != text.data() + text.size())
    Fail(ErrorCode::kConfig, key + ": expected an integer, got '" + text + "'");
  return v;
}

float ParseFloat(const std::string& key, const std::string& text) {
  char* end = nullptr;
  const double v = std::strtod(text.c_str(), &end);
  if (text.empty() || end != text.c_str() + text.size() || !std::isfinite(v))
    Fail(ErrorCode::kConfig, key + ": expected a number, got '" + text + "'");
  return static_cast<float>(v);
}

std::string FormatFloat(float v) {
  // Nine significant digits round-trip any float.
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

struct Field {
  std::function<void(RunConfig&, const std::string&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

template <typename T>
Field IntField(T RunConfig::*group, int T::*member) {
  return {[=](RunConfig& c, const std::string& key, const std::string& v) {
            (c.*group).*member = ParseInt<int>(key, v);
          },
          [=](const RunConfig& c) { return std::to_string((c.*group).*member); }};
}

Field SizeField(std::size_t TrainConfig::*member) {
  return {[=](RunConfig& c, const std::string& key, const std::string& v) {
            c.train.*member = ParseInt<std::size_t>(key, v);
          },
          [=](const RunConfig& c) { return std::to_string(c.train.*member); }};
}

Field ModelFloat(float ModelConfig::*member) {
  return {[=](RunConfig& c, const std::string& key, const std::string& v) {
            c.model.*member = ParseFloat(key, v);
          },
          [=](const RunConfig& c) { return FormatFloat(c.model.*member); }};
}

Field AdamFloat(float AdamOptions::*member) {
  return {[=](RunConfig& c, const std::string& key, const std::string& v) {
            c.train.adam.*member = ParseFloat(key, v);
          },
          [=](const RunConfig& c) { return FormatFloat(c.train.adam.*member); }};
}

const std::vector<std::pair<std::string, Field>>& Fields() {
  static const auto* fields = new std::vector<std::pair<std::string, Field>>{
      {"n_blocks", IntField(&RunConfig::model, &ModelConfig::n_blocks)},
      {"d_model", IntField(&RunConfig::model, &ModelConfig::d_model)},
      {"d_k", IntField(&RunConfig::model, &ModelConfig::d_k)},
      {"d_v", IntField(&RunConfig::model, &ModelConfig::d_v)},
      {"d_ff", IntField(&RunConfig::model, &ModelConfig::d_ff)},
      {"fc1_dim", IntField(&RunConfig::model, &ModelConfig::fc1_dim)},
      {"embed_dim", IntField(&RunConfig::model, &ModelConfig::embed_dim)},
      {"n_speakers", IntField(&RunConfig::model, &ModelConfig::n_speakers)},
      {"encoder_dropout", ModelFloat(&ModelConfig::encoder_dropout)},
      {"head_dropout", ModelFloat(&ModelConfig::head_dropout)},
      {"loss",
       {[](RunConfig& c, const std::string&, const std::string& v) {
          c.model.loss = ParseLossKind(v);
        },
        [](const RunConfig& c) { return std::string(LossKindName(c.model.loss)); }}},
      {"am_scale", ModelFloat(&ModelConfig::am_scale)},
      {"am_margin", ModelFloat(&ModelConfig::am_margin)},
      {"batch_size", SizeField(&TrainConfig::batch_size)},
      {"steps", SizeField(&TrainConfig::steps)},
      {"seed",
       {[](RunConfig& c, const std::string& key, const std::string& v) {
          c.train.seed = ParseInt<std::uint64_t>(key, v);
        },
        [](const RunConfig& c) { return std::to_string(c.train.seed); }}},
      {"checkpoint_every", SizeField(&TrainConfig::checkpoint_every)},
      {"lr", AdamFloat(&AdamOptions::lr)},
      {"beta1", AdamFloat(&AdamOptions::beta1)},
      {"beta2", AdamFloat(&AdamOptions::beta2)},
      {"eps", AdamFloat(&AdamOptions::eps)},
  };
  return *fields;
}

const Field& FindField(const std::string& key) {
  for (const auto& [name, field] : Fields())
    if (name == key) return field;
  Fail(ErrorCode::kConfig, "unknown config key '" + key + "'");
}

std::string ReadText(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) Fail(ErrorCode::kFileNotFound, "cannot open " + path.string());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

}  // namespace

void RunConfig::Validate() const {
  model.Validate();
  train.Validate();
}

const std::vector<std::string>& RunConfigKeys() {
  static const auto* keys = [] {
    auto* k = new std::vector<std::string>;
    for (const auto& [name, field] : Fields()) k->push_back(name);
    return k;
  }();
  return *keys;
}

void SetRunConfigValue(RunConfig& config, const std::string& key,
                       const std::string& value) {
  FindField(key).set(config, key, value);
}

std::string GetRunConfigValue(const RunConfig& config, const std::string& key) {
  return FindField(key).get(config);
}

RunConfig ParseRunConfig(const std::string& text, const std::string& origin) {
  RunConfig config;
  std::map<std::string, std::size_t> seen;
  std::istringstream lines(text);
  std::string line;
  for (std::size_t line_no = 1; std::getline(lines, line); ++line_no) {
    const std::string where = origin + ":" + std::to_string(line_no) + ": ";
    line = Trim(line.substr(0, line.find('#')));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      Fail(ErrorCode::kConfig, where + "expected `key = value`, got '" + line + "'");
    const std::string key = Trim(line.substr(0, eq));
    const std::string value = Trim(line.substr(eq + 1));
    if (auto [it, fresh] = seen.emplace(key, line_no); !fresh)
      Fail(ErrorCode::kConfig, where + "'" + key + "' already set on line " +
                                   std::to_string(it->second));
    try {
      SetRunConfigValue(config, key, value);
    } catch (const Error& e) {
      Fail(ErrorCode::kConfig, where + e.what());
    }
  }
  try {
    config.Validate();
  } catch (const Error& e) {
    // Point at the line that set the offending key when there is one.
    std::string message = e.what();
    std::size_t line_no = 0;
    for (const auto& [key, no] : seen)
      if (message.find(key) != std::string::npos && (line_no == 0 || no > line_no))
        line_no = no;
    Fail(ErrorCode::kConfig, origin + ":" +
                                 (line_no ? std::to_string(line_no) : std::string("-")) +
                                 ": " + message);
  }
  return config;
}

RunConfig LoadRunConfig(const std::filesystem::path& path) {
  return ParseRunConfig(ReadText(path), path.string());
}

std::string FormatRunConfig(const RunConfig& config) {
  std::string out;
  for (const auto& [name, field] : Fields()) out += name + " = " + field.get(config) + "\n";
  return out;
}

}  // namespace saep
