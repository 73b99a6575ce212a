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

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "sphmm/frontend.hpp"
#include "sphmm/manifest.hpp"
#include "sphmm/recognizer.hpp"

namespace sphmm::harness {

enum class Stage { kGender = 0, kSpeaker = 1 };
inline constexpr std::array<Stage, 2> kStages = {Stage::kGender, Stage::kSpeaker};
std::string ToString(Stage s);

struct ExperimentConfig {
  std::filesystem::path manifest_path;
  dsp::FrontendConfig frontend;
  recog::ModelConfig model;
  std::vector<double> alphas{0.5};
  // Gender-stage weight; follows the speaker-stage alpha when unset.
  std::optional<double> gender_alpha;
  std::filesystem::path output_dir{"out"};
  std::uint64_t seed = 1;
  bool write_svg = false;

  void Validate() const;
};

// Relative paths in the document resolve against base_dir. Accepts "alpha"
// (number) or "alphas" (list); "seed" also seeds model training.
ExperimentConfig ExperimentConfigFromJson(const nlohmann::json& j,
                                          const std::filesystem::path& base_dir);
ExperimentConfig LoadExperimentConfig(const std::filesystem::path& path);

// "lo:hi:step" inclusive grid, e.g. "0:1:0.1" -> 11 values.
std::vector<double> ParseAlphaGrid(const std::string& text);

struct Tally {
  std::size_t correct = 0;
  std::size_t total = 0;
  double accuracy_pct() const { return total ? double(correct) * 100.0 / double(total) : 0.0; }
};

struct AccuracyReport {
  double alpha = 0.5;
  double gender_alpha = 0.5;
  std::array<std::array<Tally, 2>, 2> cells;  // [stage][condition]
  // [condition][true gender][decided gender]
  std::array<std::array<std::array<std::size_t, 2>, 2>, 2> gender_confusion{};
  // Axis labels for the speaker confusion: every enrolled speaker, male first.
  std::vector<std::string> speaker_labels;
  // [condition][true speaker][decided speaker]
  std::array<std::vector<std::vector<std::size_t>>, 2> speaker_confusion;
  std::uint64_t model_checksum = 0;

  const Tally& cell(Stage s, Condition c) const { return cells[int(s)][Index(c)]; }
};

// Throws a data error on protocol violations: no train or no test rows, a
// gender without training rows, a test speaker without neutral training
// rows, a gender mismatch, or a test sentence the speaker never trained on.
void CheckProtocol(const std::vector<corpus::UtteranceRecord>& records);

// Reads audio and extracts features for every record (parallel, order kept).
std::vector<recog::LabeledUtterance> LoadUtterances(const corpus::Manifest& manifest,
                                                    const dsp::FrontendConfig& frontend);

struct Enrollment {
  recog::GenderModelSet genders;
  recog::SpeakerRegistry speakers;
  recog::EnrollmentCounts counts;
  std::uint64_t checksum = 0;
};

// Gender models from all training rows, speaker models from neutral ones.
Enrollment Enroll(const std::vector<recog::LabeledUtterance>& utterances,
                  const recog::ModelConfig& model);

// Component scores of every test-session utterance against every model.
struct ScoredTestSet {
  std::vector<const recog::LabeledUtterance*> tests;
  std::vector<recog::CandidateScores> scores;
};

ScoredTestSet ScoreTestSet(const Enrollment& enrollment,
                           const std::vector<recog::LabeledUtterance>& utterances);

AccuracyReport TallyAt(const Enrollment& enrollment, const ScoredTestSet& scored,
                       double alpha, double gender_alpha);

// Enrolls once, scores once and reports at every alpha of the config.
std::vector<AccuracyReport> SweepAlpha(const ExperimentConfig& config);
std::vector<AccuracyReport> SweepAlpha(const Enrollment& enrollment,
                                       const ScoredTestSet& scored,
                                       const std::vector<double>& alphas,
                                       std::optional<double> gender_alpha);

// Single-alpha run at config.alphas.front().
AccuracyReport RunExperiment(const ExperimentConfig& config);

// (new - old) / old * 100.
double RelativeImprovement(double new_pct, double old_pct);

}  // namespace sphmm::harness
