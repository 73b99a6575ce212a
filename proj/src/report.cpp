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

#include "sphmm/report.hpp"

#include <charconv>
#include <fstream>

#include "json.hpp"
#include "sphmm/error.hpp"

namespace sphmm::harness {
namespace {

void WriteText(const std::filesystem::path& path, const std::string& text,
               std::vector<std::filesystem::path>& written) {
  std::ofstream out(path, std::ios::trunc | std::ios::binary);
  if (!out) ThrowData("cannot write " + path.string());
  out << text;
  if (!out) ThrowData("short write to " + path.string());
  written.push_back(path);
}

std::string Fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

}  // namespace

std::string FormatDouble(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string FormatAccuracyCsv(const std::vector<AccuracyReport>& reports) {
  std::string out = "alpha,stage,condition,correct,total,accuracy_pct\n";
  for (const auto& r : reports) {
    for (Stage s : kStages) {
      for (Condition c : kConditions) {
        const Tally& t = r.cell(s, c);
        out += FormatDouble(r.alpha) + "," + ToString(s) + "," + ToString(c) + "," +
               std::to_string(t.correct) + "," + std::to_string(t.total) + "," +
               FormatDouble(t.accuracy_pct()) + "\n";
      }
    }
  }
  return out;
}

std::string FormatSweepCsv(const std::vector<AccuracyReport>& reports) {
  std::string out = "alpha,gender_neutral,gender_shouted,speaker_neutral,speaker_shouted\n";
  for (const auto& r : reports) {
    out += FormatDouble(r.alpha);
    for (Stage s : kStages) {
      for (Condition c : kConditions) out += "," + FormatDouble(r.cell(s, c).accuracy_pct());
    }
    out += "\n";
  }
  return out;
}

std::string FormatGenderConfusionCsv(const AccuracyReport& r, Condition c) {
  std::string out = "true,M,F\n";
  for (Gender g : kGenders) {
    const auto& row = r.gender_confusion[Index(c)][Index(g)];
    out += ToString(g) + "," + std::to_string(row[0]) + "," + std::to_string(row[1]) + "\n";
  }
  return out;
}

std::string FormatSpeakerConfusionCsv(const AccuracyReport& r, Condition c) {
  std::string out = "true";
  for (const auto& l : r.speaker_labels) out += "," + l;
  out += "\n";
  const auto& m = r.speaker_confusion[Index(c)];
  for (std::size_t i = 0; i < m.size(); ++i) {
    out += r.speaker_labels[i];
    for (std::size_t v : m[i]) out += "," + std::to_string(v);
    out += "\n";
  }
  return out;
}

std::string RenderSweepSvg(const std::vector<AccuracyReport>& reports) {
  if (reports.empty()) ThrowUsage("sweep plot: no reports");
  constexpr double kW = 640, kH = 400, kLeft = 60, kRight = 160, kTop = 30, kBottom = 50;
  const double pw = kW - kLeft - kRight, ph = kH - kTop - kBottom;
  auto x_of = [&](double a) { return kLeft + a * pw; };
  auto y_of = [&](double pct) { return kTop + (100.0 - pct) / 100.0 * ph; };

  std::string s;
  s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"400\" "
       "viewBox=\"0 0 640 400\">\n";
  s += "<rect x=\"0\" y=\"0\" width=\"640\" height=\"400\" fill=\"white\"/>\n";
  s += "<g class=\"axes\" stroke=\"black\" fill=\"none\">\n";
  s += "<line x1=\"" + Fixed(kLeft, 1) + "\" y1=\"" + Fixed(kTop + ph, 1) + "\" x2=\"" +
       Fixed(kLeft + pw, 1) + "\" y2=\"" + Fixed(kTop + ph, 1) + "\"/>\n";
  s += "<line x1=\"" + Fixed(kLeft, 1) + "\" y1=\"" + Fixed(kTop, 1) + "\" x2=\"" +
       Fixed(kLeft, 1) + "\" y2=\"" + Fixed(kTop + ph, 1) + "\"/>\n";
  s += "</g>\n";
  for (const auto& r : reports) {
    const double x = x_of(r.alpha);
    s += "<g class=\"xtick\"><line x1=\"" + Fixed(x, 1) + "\" y1=\"" + Fixed(kTop + ph, 1) +
         "\" x2=\"" + Fixed(x, 1) + "\" y2=\"" + Fixed(kTop + ph + 5, 1) +
         "\" stroke=\"black\"/><text x=\"" + Fixed(x, 1) + "\" y=\"" + Fixed(kTop + ph + 20, 1) +
         "\" font-size=\"11\" text-anchor=\"middle\">" + Fixed(r.alpha, 2) + "</text></g>\n";
  }
  for (int pct = 0; pct <= 100; pct += 20) {
    s += "<text x=\"" + Fixed(kLeft - 8, 1) + "\" y=\"" + Fixed(y_of(pct) + 4, 1) +
         "\" font-size=\"11\" text-anchor=\"end\">" + std::to_string(pct) + "</text>\n";
  }
  s += "<text x=\"" + Fixed(kLeft + pw / 2, 1) + "\" y=\"" + Fixed(kH - 10, 1) +
       "\" font-size=\"12\" text-anchor=\"middle\">alpha</text>\n";
  s += "<text x=\"15\" y=\"" + Fixed(kTop + ph / 2, 1) +
       "\" font-size=\"12\" transform=\"rotate(-90 15 " + Fixed(kTop + ph / 2, 1) +
       ")\" text-anchor=\"middle\">accuracy (%)</text>\n";

  static const char* kColors[2][2] = {{"#1f77b4", "#aec7e8"}, {"#d62728", "#ff9896"}};
  int legend = 0;
  for (Stage st : kStages) {
    for (Condition c : kConditions) {
      std::string pts;
      for (const auto& r : reports) {
        if (!pts.empty()) pts += " ";
        pts += Fixed(x_of(r.alpha), 2) + "," + Fixed(y_of(r.cell(st, c).accuracy_pct()), 2);
      }
      const std::string name = ToString(st) + " " + ToString(c);
      const char* color = kColors[int(st)][Index(c)];
      s += "<polyline data-series=\"" + name + "\" fill=\"none\" stroke=\"" + color +
           "\" stroke-width=\"2\" points=\"" + pts + "\"/>\n";
      const double ly = kTop + 10 + 18 * legend++;
      s += "<text x=\"" + Fixed(kLeft + pw + 15, 1) + "\" y=\"" + Fixed(ly, 1) +
           "\" font-size=\"11\" fill=\"" + color + "\">" + name + "</text>\n";
    }
  }
  s += "</svg>\n";
  return s;
}

std::vector<std::filesystem::path> EmitReport(const std::vector<AccuracyReport>& reports,
                                              const std::filesystem::path& dir,
                                              bool write_svg) {
  if (reports.empty()) ThrowUsage("report: nothing to emit");
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) ThrowData("cannot create " + dir.string() + ": " + ec.message());

  std::vector<std::filesystem::path> written;
  WriteText(dir / "accuracy.csv", FormatAccuracyCsv(reports), written);
  WriteText(dir / "sweep.csv", FormatSweepCsv(reports), written);

  nlohmann::json meta = nlohmann::json::array();
  for (const auto& r : reports) {
    char checksum[32];
    std::snprintf(checksum, sizeof checksum, "%016llx",
                  static_cast<unsigned long long>(r.model_checksum));
    const std::string tag = "alpha_" + Fixed(r.alpha, 2);
    const auto cdir = dir / "confusion" / tag;
    std::filesystem::create_directories(cdir, ec);
    if (ec) ThrowData("cannot create " + cdir.string() + ": " + ec.message());
    for (Condition c : kConditions) {
      WriteText(cdir / ("gender_" + ToString(c) + ".csv"), FormatGenderConfusionCsv(r, c), written);
      WriteText(cdir / ("speaker_" + ToString(c) + ".csv"), FormatSpeakerConfusionCsv(r, c),
                written);
    }
    meta.push_back({{"alpha", r.alpha},
                    {"gender_alpha", r.gender_alpha},
                    {"model_checksum", checksum},
                    {"confusion_dir", "confusion/" + tag}});
  }
  WriteText(dir / "report.json", nlohmann::json({{"reports", meta}}).dump(2) + "\n", written);
  if (write_svg) WriteText(dir / "sweep.svg", RenderSweepSvg(reports), written);
  return written;
}

}  // namespace sphmm::harness
