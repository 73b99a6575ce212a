// Copyright 2026  The sphmm-sid Authors
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

#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "sphmm/labels.hpp"

namespace sphmm::corpus {

// One row of a corpus manifest. audio_path is stored as written and resolved
// against the manifest's directory.
struct UtteranceRecord {
  std::string id;
  std::string audio_path;
  std::string speaker_id;
  Gender gender = Gender::kMale;
  std::string sentence_id;
  Condition condition = Condition::kNeutral;
  Session session = Session::kTrain;

  bool operator==(const UtteranceRecord&) const = default;
};

// Header row of the manifest CSV, in column order.
inline constexpr const char* kManifestHeader =
    "id,audio_path,speaker_id,gender,sentence_id,condition,session";

struct Manifest {
  std::filesystem::path base_dir;
  std::vector<UtteranceRecord> records;

  std::filesystem::path Resolve(const UtteranceRecord& r) const;
};

// Parses manifest text. Errors carry the 1-based line number and reason.
// `origin` names the source in messages.
std::vector<UtteranceRecord> ParseManifest(const std::string& text,
                                           const std::string& origin = "manifest");

// Loads and validates a manifest CSV. With check_audio, every audio file must
// exist relative to the manifest's directory.
Manifest LoadManifest(const std::filesystem::path& path, bool check_audio = true);

std::string FormatManifest(const std::vector<UtteranceRecord>& records);
void WriteManifest(const std::filesystem::path& path,
                   const std::vector<UtteranceRecord>& records);

}  // namespace sphmm::corpus
