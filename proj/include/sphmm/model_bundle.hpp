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

#include "sphmm/frontend.hpp"
#include "sphmm/recognizer.hpp"

namespace sphmm::recog {

// On-disk layout:
//   bundle.json                 front-end and model config, alpha defaults,
//                               speaker order per gender
//   genders.json                {format_version, male, female} model pairs
//   speakers/<gender>/<label>.json
struct ModelBundle {
  dsp::FrontendConfig frontend;
  ModelConfig model;
  double alpha = 0.5;
  double gender_alpha = 0.5;
  GenderModelSet genders;
  SpeakerRegistry speakers;
};

void SaveBundle(const ModelBundle& bundle, const std::filesystem::path& dir);
ModelBundle LoadBundle(const std::filesystem::path& dir);

nlohmann::json ToJson(const GenderModelSet& set);
GenderModelSet GenderModelSetFromJson(const nlohmann::json& j);

// 64-bit FNV-1a over the canonical JSON of every model, for provenance.
std::uint64_t ModelChecksum(const GenderModelSet& genders, const SpeakerRegistry& speakers);

// Reads and parses a JSON file, or writes one (2-space indent, trailing newline).
nlohmann::json ReadJsonFile(const std::filesystem::path& path);
void WriteJsonFile(const std::filesystem::path& path, const nlohmann::json& j);

}  // namespace sphmm::recog
