// langid/manifest.h

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

#ifndef LANGID_MANIFEST_H_
#define LANGID_MANIFEST_H_

#include <string>
#include <vector>

namespace langid {

/// One labeled audio segment.
struct UtteranceRecord {
  std::string audio_filepath;
  double offset = 0.0;
  double duration = 0.0;
  std::string label;
  std::string recording_id;  // optional; empty when absent

  /// Utterance id used in score files: file stem, plus offset when non-zero.
  std::string Id() const;

  bool operator==(const UtteranceRecord &) const = default;
};

using Manifest = std::vector<UtteranceRecord>;

/// One JSON object per line with fields audio_filepath, offset, duration,
/// label (and recording_id when set).
std::string FormatRecord(const UtteranceRecord &rec);
UtteranceRecord ParseRecord(const std::string &line);

Manifest ReadManifest(const std::string &path);
void WriteManifest(const std::string &path, const Manifest &m);
std::string FormatManifest(const Manifest &m);

/// Labels in order of first appearance.
std::vector<std::string> ManifestLabels(const Manifest &m);

}  // namespace langid

#endif  // LANGID_MANIFEST_H_
