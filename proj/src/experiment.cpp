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

#include "sphmm/experiment.hpp"

#include <cmath>
#include <map>
#include <set>
#include <sstream>

#include "sphmm/error.hpp"
#include "sphmm/model_bundle.hpp"
#include "sphmm/parallel.hpp"
#include "sphmm/wav.hpp"

namespace sphmm::harness {

std::string ToString(Stage s) { return s == Stage::kGender ? "gender" : "speaker"; }

void ExperimentConfig::Validate() const {
  frontend.Validate();
  model.Validate();
  if (alphas.empty()) ThrowUsage("experiment config: no alpha values");
  for (double a : alphas) recog::FusionWeight check(a);
  if (gender_alpha) recog::FusionWeight check(*gender_alpha);
}

ExperimentConfig ExperimentConfigFromJson(const nlohmann::json& j,
                                          const std::filesystem::path& base_dir) {
  if (!j.is_object()) ThrowUsage("experiment config: expected a JSON object");
  ExperimentConfig c;
  auto resolve = [&](const std::string& p) {
    std::filesystem::path path(p);
    return path.is_absolute() ? path : base_dir / path;
  };
  try {
    c.manifest_path = resolve(j.at("manifest_path").get<std::string>());
    if (j.contains("frontend")) c.frontend = dsp::FrontendConfigFromJson(j.at("frontend"));
    c.seed = j.value("seed", c.seed);
    nlohmann::json model = j.value("model", nlohmann::json::object());
    if (!model.contains("seed")) model["seed"] = c.seed;
    c.model = recog::ModelConfigFromJson(model);
    if (j.contains("alphas")) {
      c.alphas = j.at("alphas").get<std::vector<double>>();
    } else if (j.contains("alpha")) {
      c.alphas = {j.at("alpha").get<double>()};
    }
    if (j.contains("gender_alpha") && !j.at("gender_alpha").is_null()) {
      c.gender_alpha = j.at("gender_alpha").get<double>();
    }
    if (j.contains("output_dir")) c.output_dir = resolve(j.at("output_dir").get<std::string>());
    c.write_svg = j.value("write_svg", c.write_svg);
  } catch (const nlohmann::json::exception& e) {
    ThrowUsage(std::string("experiment config: ") + e.what());
  }
  c.Validate();
  return c;
}

ExperimentConfig LoadExperimentConfig(const std::filesystem::path& path) {
  const auto j = recog::ReadJsonFile(path);
  return ExperimentConfigFromJson(j, path.has_parent_path() ? path.parent_path() : ".");
}

std::vector<double> ParseAlphaGrid(const std::string& text) {
  std::vector<double> parts;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ':')) {
    try {
      std::size_t used = 0;
      parts.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      ThrowUsage("alpha grid '" + text + "': '" + item + "' is not a number");
    }
  }
  if (parts.size() == 1) return parts;
  if (parts.size() != 3 || !(parts[2] > 0.0) || parts[1] < parts[0]) {
    ThrowUsage("alpha grid must look like lo:hi:step with step > 0, got '" + text + "'");
  }
  const auto steps = static_cast<long>(std::floor((parts[1] - parts[0]) / parts[2] + 1e-9));
  std::vector<double> grid;
  for (long i = 0; i <= steps; ++i) {
    // Round to 12 decimals so 0.1 steps land on 0.3 rather than 0.30000000000000004.
    const double a = std::round((parts[0] + double(i) * parts[2]) * 1e12) / 1e12;
    grid.push_back(a);
  }
  for (double a : grid) recog::FusionWeight check(a);
  return grid;
}

void CheckProtocol(const std::vector<corpus::UtteranceRecord>& records) {
  struct SpeakerInfo {
    Gender gender;
    std::set<std::string> neutral_sentences;
  };
  std::map<std::string, SpeakerInfo> speakers;
  std::array<bool, 2> gender_trained{false, false};
  bool have_train = false, have_test = false;
  for (const auto& r : records) {
    auto [it, inserted] = speakers.try_emplace(r.speaker_id, SpeakerInfo{r.gender, {}});
    if (!inserted && it->second.gender != r.gender) {
      ThrowData("protocol: speaker '" + r.speaker_id + "' has rows with both genders");
    }
    if (r.session == Session::kTrain) {
      have_train = true;
      gender_trained[Index(r.gender)] = true;
      if (r.condition == Condition::kNeutral) it->second.neutral_sentences.insert(r.sentence_id);
    } else {
      have_test = true;
    }
  }
  if (!have_train) ThrowData("protocol: manifest has no train rows");
  if (!have_test) ThrowData("protocol: manifest has no test rows");
  for (Gender g : kGenders) {
    if (!gender_trained[Index(g)]) {
      ThrowData("protocol: no training rows for gender " + ToString(g));
    }
  }
  for (const auto& r : records) {
    const auto& info = speakers.at(r.speaker_id);
    if (r.session == Session::kTest && info.neutral_sentences.empty()) {
      ThrowData("protocol: test row '" + r.id + "' belongs to speaker '" + r.speaker_id +
                "' who has no neutral training rows");
    }
    if (r.session == Session::kTest && !info.neutral_sentences.count(r.sentence_id)) {
      ThrowData("protocol: test row '" + r.id + "' uses sentence '" + r.sentence_id +
                "' that speaker '" + r.speaker_id + "' never trained on");
    }
  }
}

std::vector<recog::LabeledUtterance> LoadUtterances(const corpus::Manifest& manifest,
                                                    const dsp::FrontendConfig& frontend) {
  std::vector<recog::LabeledUtterance> out(manifest.records.size());
  ParallelFor(out.size(), [&](std::size_t i) {
    const auto& r = manifest.records[i];
    auto& u = out[i];
    u.id = r.id;
    u.speaker_id = r.speaker_id;
    u.gender = r.gender;
    u.sentence_id = r.sentence_id;
    u.condition = r.condition;
    u.session = r.session;
    try {
      u.features = dsp::ExtractFeatures(dsp::ReadWav(manifest.Resolve(r)), frontend);
    } catch (const Error& e) {
      throw Error(e.kind(), "utterance '" + r.id + "': " + e.what());
    }
  });
  return out;
}

Enrollment Enroll(const std::vector<recog::LabeledUtterance>& utterances,
                  const recog::ModelConfig& model) {
  Enrollment e;
  e.genders = recog::EnrollGender(utterances, model, &e.counts);
  e.speakers = recog::EnrollSpeakers(utterances, model, &e.counts);
  e.checksum = recog::ModelChecksum(e.genders, e.speakers);
  return e;
}

ScoredTestSet ScoreTestSet(const Enrollment& enrollment,
                           const std::vector<recog::LabeledUtterance>& utterances) {
  ScoredTestSet out;
  for (const auto& u : utterances) {
    if (u.session == Session::kTest) out.tests.push_back(&u);
  }
  out.scores.resize(out.tests.size());
  ParallelFor(out.tests.size(), [&](std::size_t i) {
    out.scores[i] = recog::ScoreAllCandidates(enrollment.genders, enrollment.speakers,
                                              out.tests[i]->features);
  });
  return out;
}

AccuracyReport TallyAt(const Enrollment& enrollment, const ScoredTestSet& scored,
                       double alpha, double gender_alpha) {
  const recog::FusionWeight speaker_w(alpha);
  const recog::FusionWeight gender_w(gender_alpha);
  AccuracyReport rep;
  rep.alpha = alpha;
  rep.gender_alpha = gender_alpha;
  rep.model_checksum = enrollment.checksum;

  std::map<std::string, std::size_t> axis;
  for (Gender g : kGenders) {
    for (const auto& p : enrollment.speakers.at(g)) {
      axis.emplace(p.label, rep.speaker_labels.size());
      rep.speaker_labels.push_back(p.label);
    }
  }
  const std::size_t n = rep.speaker_labels.size();
  for (auto& m : rep.speaker_confusion) m.assign(n, std::vector<std::size_t>(n, 0));

  for (std::size_t i = 0; i < scored.tests.size(); ++i) {
    const auto& u = *scored.tests[i];
    const auto result = recog::Decide(scored.scores[i], enrollment.speakers, gender_w, speaker_w);
    const int c = Index(u.condition);
    auto& gcell = rep.cells[int(Stage::kGender)][c];
    auto& scell = rep.cells[int(Stage::kSpeaker)][c];
    ++gcell.total;
    ++scell.total;
    if (result.gender == u.gender) ++gcell.correct;
    if (result.speaker == u.speaker_id) ++scell.correct;
    ++rep.gender_confusion[c][Index(u.gender)][Index(result.gender)];
    const auto truth = axis.find(u.speaker_id);
    if (truth == axis.end()) {
      ThrowData("test utterance '" + u.id + "' belongs to unenrolled speaker '" +
                u.speaker_id + "'");
    }
    ++rep.speaker_confusion[c][truth->second][axis.at(result.speaker)];
  }
  return rep;
}

std::vector<AccuracyReport> SweepAlpha(const Enrollment& enrollment,
                                       const ScoredTestSet& scored,
                                       const std::vector<double>& alphas,
                                       std::optional<double> gender_alpha) {
  if (alphas.empty()) ThrowUsage("alpha sweep: no alpha values");
  std::vector<AccuracyReport> out;
  for (double a : alphas) out.push_back(TallyAt(enrollment, scored, a, gender_alpha.value_or(a)));
  return out;
}

namespace {

std::vector<AccuracyReport> RunAll(const ExperimentConfig& config) {
  config.Validate();
  const auto manifest = corpus::LoadManifest(config.manifest_path);
  CheckProtocol(manifest.records);
  const auto utterances = LoadUtterances(manifest, config.frontend);
  const Enrollment enrollment = Enroll(utterances, config.model);
  const ScoredTestSet scored = ScoreTestSet(enrollment, utterances);
  return SweepAlpha(enrollment, scored, config.alphas, config.gender_alpha);
}

}  // namespace

std::vector<AccuracyReport> SweepAlpha(const ExperimentConfig& config) {
  if (config.alphas.size() < 2) ThrowUsage("alpha sweep: need at least two alpha values");
  return RunAll(config);
}

AccuracyReport RunExperiment(const ExperimentConfig& config) {
  ExperimentConfig single = config;
  single.alphas.resize(1);
  return RunAll(single).front();
}

double RelativeImprovement(double new_pct, double old_pct) {
  if (!(old_pct > 0.0)) ThrowUsage("relative improvement: baseline must be positive");
  return (new_pct - old_pct) / old_pct * 100.0;
}

}  // namespace sphmm::harness
