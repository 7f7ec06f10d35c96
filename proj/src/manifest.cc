// langid/manifest.cc

// Copyright 2026  The langid authors
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

#include "langid/manifest.h"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "langid/common.h"

namespace langid {

std::string UtteranceRecord::Id() const {
  std::string stem = std::filesystem::path(audio_filepath).stem().string();
  if (offset == 0.0) return stem;
  long ms = std::lround(offset * 1000.0);
  return stem + "-" + std::to_string(ms);
}

std::string FormatRecord(const UtteranceRecord &rec) {
  nlohmann::ordered_json j;
  j["audio_filepath"] = rec.audio_filepath;
  j["offset"] = rec.offset;
  j["duration"] = rec.duration;
  j["label"] = rec.label;
  if (!rec.recording_id.empty()) j["recording_id"] = rec.recording_id;
  return j.dump();
}

UtteranceRecord ParseRecord(const std::string &line) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception &e) {
    Fail("bad manifest line: ", e.what());
  }
  UtteranceRecord r;
  try {
    r.audio_filepath = j.at("audio_filepath").get<std::string>();
    r.offset = j.value("offset", 0.0);
    r.duration = j.at("duration").get<double>();
    r.label = j.at("label").get<std::string>();
    r.recording_id = j.value("recording_id", std::string());
  } catch (const nlohmann::json::exception &e) {
    Fail("bad manifest record '", line, "': ", e.what());
  }
  if (!(r.duration > 0.0)) Fail("manifest record has non-positive duration: ", line);
  if (r.offset < 0.0) Fail("manifest record has negative offset: ", line);
  return r;
}

Manifest ReadManifest(const std::string &path) {
  std::ifstream in(path);
  if (!in) Fail("cannot open manifest ", path);
  Manifest m;
  std::string line;
  while (std::getline(in, line)) {
    if (Trim(line).empty()) continue;
    m.push_back(ParseRecord(line));
  }
  return m;
}

std::string FormatManifest(const Manifest &m) {
  std::string out;
  for (const auto &r : m) {
    out += FormatRecord(r);
    out += '\n';
  }
  return out;
}

void WriteManifest(const std::string &path, const Manifest &m) {
  WriteTextFile(path, FormatManifest(m));
}

std::vector<std::string> ManifestLabels(const Manifest &m) {
  std::vector<std::string> labels;
  std::set<std::string> seen;
  for (const auto &r : m)
    if (seen.insert(r.label).second) labels.push_back(r.label);
  return labels;
}

}  // namespace langid
