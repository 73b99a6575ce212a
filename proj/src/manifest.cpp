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

#include "sphmm/manifest.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "sphmm/error.hpp"

namespace sphmm::corpus {
namespace {

std::string Trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

// Splits one CSV line; double-quoted fields may contain commas and "" escapes.
std::vector<std::string> SplitCsv(const std::string& line, bool* ok) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  *ok = true;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(Trim(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (quoted) *ok = false;
  fields.push_back(Trim(cur));
  return fields;
}

std::string QuoteCsv(const std::string& s) {
  if (s.find_first_of(",\"") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

std::filesystem::path Manifest::Resolve(const UtteranceRecord& r) const {
  std::filesystem::path p(r.audio_path);
  return p.is_absolute() ? p : base_dir / p;
}

std::vector<UtteranceRecord> ParseManifest(const std::string& text,
                                           const std::string& origin) {
  std::vector<UtteranceRecord> records;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  bool have_header = false;
  std::set<std::string> ids;
  auto fail = [&](const std::string& why) -> void {
    ThrowData(origin + ":" + std::to_string(line_no) + ": " + why);
  };

  while (std::getline(in, line)) {
    ++line_no;
    if (Trim(line).empty()) continue;
    bool ok = true;
    const auto fields = SplitCsv(line, &ok);
    if (!ok) fail("unterminated quoted field");
    if (!have_header) {
      std::string joined;
      for (std::size_t i = 0; i < fields.size(); ++i) {
        joined += (i ? "," : "") + fields[i];
      }
      if (joined != kManifestHeader) {
        fail("header must be '" + std::string(kManifestHeader) + "', got '" + joined + "'");
      }
      have_header = true;
      continue;
    }
    if (fields.size() != 7) {
      fail("expected 7 fields, got " + std::to_string(fields.size()));
    }
    static const char* kNames[] = {"id",          "audio_path", "speaker_id", "gender",
                                   "sentence_id", "condition",  "session"};
    for (std::size_t i = 0; i < fields.size(); ++i) {
      if (fields[i].empty()) fail(std::string("empty ") + kNames[i]);
    }
    UtteranceRecord r;
    r.id = fields[0];
    r.audio_path = fields[1];
    r.speaker_id = fields[2];
    r.sentence_id = fields[4];
    try {
      r.gender = ParseGender(fields[3]);
      r.condition = ParseCondition(fields[5]);
      r.session = ParseSession(fields[6]);
    } catch (const Error& e) {
      fail(e.what());
    }
    if (!ids.insert(r.id).second) fail("duplicate id '" + r.id + "'");
    records.push_back(std::move(r));
  }
  return records;
}

Manifest LoadManifest(const std::filesystem::path& path, bool check_audio) {
  std::ifstream in(path);
  if (!in) ThrowData("cannot open manifest " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  Manifest m;
  m.base_dir = path.has_parent_path() ? path.parent_path() : std::filesystem::path(".");
  m.records = ParseManifest(buf.str(), path.string());
  if (check_audio) {
    for (const auto& r : m.records) {
      const auto audio = m.Resolve(r);
      if (!std::filesystem::exists(audio)) {
        ThrowData(path.string() + ": audio for '" + r.id + "' not found at " + audio.string());
      }
    }
  }
  return m;
}

std::string FormatManifest(const std::vector<UtteranceRecord>& records) {
  std::string out = std::string(kManifestHeader) + "\n";
  for (const auto& r : records) {
    out += QuoteCsv(r.id) + "," + QuoteCsv(r.audio_path) + "," + QuoteCsv(r.speaker_id) + "," +
           ToString(r.gender) + "," + QuoteCsv(r.sentence_id) + "," + ToString(r.condition) +
           "," + ToString(r.session) + "\n";
  }
  return out;
}

void WriteManifest(const std::filesystem::path& path,
                   const std::vector<UtteranceRecord>& records) {
  std::ofstream out(path, std::ios::trunc | std::ios::binary);
  if (!out) ThrowData("cannot write manifest " + path.string());
  out << FormatManifest(records);
  if (!out) ThrowData("short write to " + path.string());
}

}  // namespace sphmm::corpus
