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

#include "sphmm/model_bundle.hpp"

#include <fstream>

#include "sphmm/error.hpp"

namespace sphmm::recog {
namespace {

constexpr int kFormatVersion = 1;

void CheckLabel(const std::string& label) {
  if (label.empty() || label == "." || label == "..") {
    ThrowData("model label '" + label + "' cannot be used as a file name");
  }
  for (char c : label) {
    const bool ok = std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' ||
                    c == '.';
    if (!ok) ThrowData("model label '" + label + "' cannot be used as a file name");
  }
}

}  // namespace

nlohmann::json ReadJsonFile(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) ThrowData("cannot open " + path.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    ThrowData("invalid JSON in " + path.string() + ": " + e.what());
  }
}

void WriteJsonFile(const std::filesystem::path& path, const nlohmann::json& j) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) ThrowData("cannot write " + path.string());
  out << j.dump(2) << '\n';
  if (!out) ThrowData("short write to " + path.string());
}

nlohmann::json ToJson(const GenderModelSet& set) {
  return {{"format_version", kFormatVersion},
          {"male", supra::ToJson(set.male)},
          {"female", supra::ToJson(set.female)}};
}

GenderModelSet GenderModelSetFromJson(const nlohmann::json& j) {
  try {
    if (j.at("format_version").get<int>() != kFormatVersion) {
      ThrowData("gender models: unsupported format_version");
    }
    GenderModelSet set{supra::ModelPairFromJson(j.at("male")),
                       supra::ModelPairFromJson(j.at("female"))};
    if (set.male.label == set.female.label) ThrowData("gender models: labels must differ");
    return set;
  } catch (const nlohmann::json::exception& e) {
    ThrowData(std::string("gender models: ") + e.what());
  }
}

void SaveBundle(const ModelBundle& bundle, const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir / "speakers", ec);
  if (ec) ThrowData("cannot create " + (dir / "speakers").string() + ": " + ec.message());

  nlohmann::json order = nlohmann::json::object();
  for (Gender g : kGenders) {
    const fs::path gdir = dir / "speakers" / ToString(g);
    fs::create_directories(gdir, ec);
    if (ec) ThrowData("cannot create " + gdir.string() + ": " + ec.message());
    nlohmann::json labels = nlohmann::json::array();
    for (const auto& pair : bundle.speakers.at(g)) {
      CheckLabel(pair.label);
      WriteJsonFile(gdir / (pair.label + ".json"), supra::ToJson(pair));
      labels.push_back(pair.label);
    }
    order[ToString(g)] = std::move(labels);
  }
  WriteJsonFile(dir / "genders.json", ToJson(bundle.genders));
  WriteJsonFile(dir / "bundle.json",
                {{"format_version", kFormatVersion},
                 {"frontend", dsp::ToJson(bundle.frontend)},
                 {"model", ToJson(bundle.model)},
                 {"alpha", bundle.alpha},
                 {"gender_alpha", bundle.gender_alpha},
                 {"speakers", std::move(order)}});
}

ModelBundle LoadBundle(const std::filesystem::path& dir) {
  const nlohmann::json meta = ReadJsonFile(dir / "bundle.json");
  ModelBundle b;
  try {
    if (meta.at("format_version").get<int>() != kFormatVersion) {
      ThrowData("bundle.json: unsupported format_version");
    }
    b.frontend = dsp::FrontendConfigFromJson(meta.at("frontend"));
    b.model = ModelConfigFromJson(meta.at("model"));
    b.alpha = meta.at("alpha").get<double>();
    b.gender_alpha = meta.value("gender_alpha", b.alpha);
    b.genders = GenderModelSetFromJson(ReadJsonFile(dir / "genders.json"));
    for (Gender g : kGenders) {
      for (const auto& label : meta.at("speakers").at(ToString(g))) {
        const std::string name = label.get<std::string>();
        CheckLabel(name);
        auto pair = supra::ModelPairFromJson(
            ReadJsonFile(dir / "speakers" / ToString(g) / (name + ".json")));
        if (pair.label != name) {
          ThrowData("speaker file " + name + ".json carries label '" + pair.label + "'");
        }
        b.speakers.by_gender[Index(g)].push_back(std::move(pair));
      }
    }
  } catch (const nlohmann::json::exception& e) {
    ThrowData(std::string("bundle.json: ") + e.what());
  }
  FusionWeight check_alpha(b.alpha);
  FusionWeight check_gender_alpha(b.gender_alpha);
  return b;
}

std::uint64_t ModelChecksum(const GenderModelSet& genders, const SpeakerRegistry& speakers) {
  std::uint64_t h = 14695981039346656037ull;
  auto feed = [&h](const std::string& s) {
    for (unsigned char c : s) {
      h ^= c;
      h *= 1099511628211ull;
    }
  };
  feed(ToJson(genders).dump());
  for (Gender g : kGenders) {
    for (const auto& p : speakers.at(g)) feed(supra::ToJson(p).dump());
  }
  return h;
}

}  // namespace sphmm::recog
