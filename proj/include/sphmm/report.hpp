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

#include "sphmm/experiment.hpp"

namespace sphmm::harness {

// Shortest decimal text that parses back to the same double.
std::string FormatDouble(double v);

// accuracy.csv: alpha,stage,condition,correct,total,accuracy_pct
std::string FormatAccuracyCsv(const std::vector<AccuracyReport>& reports);
// sweep.csv: one row per alpha, one accuracy column per stage x condition.
std::string FormatSweepCsv(const std::vector<AccuracyReport>& reports);
std::string FormatGenderConfusionCsv(const AccuracyReport& report, Condition c);
std::string FormatSpeakerConfusionCsv(const AccuracyReport& report, Condition c);
// Accuracy versus alpha, one polyline per stage x condition.
std::string RenderSweepSvg(const std::vector<AccuracyReport>& reports);

// Writes accuracy.csv, sweep.csv, report.json, confusion/alpha_<a>/*.csv and,
// when write_svg is set, sweep.svg. Returns the paths written.
std::vector<std::filesystem::path> EmitReport(const std::vector<AccuracyReport>& reports,
                                              const std::filesystem::path& output_dir,
                                              bool write_svg);

}  // namespace sphmm::harness
