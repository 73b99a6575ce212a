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

#include "sphmm/recognizer.hpp"

#include <cmath>

#include "sphmm/error.hpp"

namespace sphmm::recog {
namespace {

std::uint64_t Fnv1a(const std::string& s) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace

void ModelConfig::Validate() const {
  if (num_states < 3 || num_states % supra::kNumSegments != 0) {
    ThrowUsage("model config: num_states must be a positive multiple of 3");
  }
  if (num_mixtures < 1) ThrowUsage("model config: num_mixtures must be >= 1");
  train.Validate();
  if (!(supra_variance_floor > 0.0)) {
    ThrowUsage("model config: supra_variance_floor must be positive");
  }
}

nlohmann::json ToJson(const ModelConfig& c) {
  return {{"num_states", c.num_states},
          {"num_mixtures", c.num_mixtures},
          {"max_iterations", c.train.max_iterations},
          {"rel_loglik_tolerance", c.train.rel_loglik_tolerance},
          {"variance_floor", c.train.variance_floor},
          {"supra_variance_floor", c.supra_variance_floor},
          {"seed", c.train.seed}};
}

ModelConfig ModelConfigFromJson(const nlohmann::json& j) {
  if (!j.is_object()) ThrowUsage("model config: expected a JSON object");
  ModelConfig c;
  try {
    c.num_states = j.value("num_states", c.num_states);
    c.num_mixtures = j.value("num_mixtures", c.num_mixtures);
    c.train.max_iterations = j.value("max_iterations", c.train.max_iterations);
    c.train.rel_loglik_tolerance = j.value("rel_loglik_tolerance", c.train.rel_loglik_tolerance);
    c.train.variance_floor = j.value("variance_floor", c.train.variance_floor);
    c.supra_variance_floor = j.value("supra_variance_floor", c.supra_variance_floor);
    c.train.seed = j.value("seed", c.train.seed);
  } catch (const nlohmann::json::exception& e) {
    ThrowUsage(std::string("model config: ") + e.what());
  }
  c.Validate();
  return c;
}

ModelPair TrainModelPair(const std::string& label,
                         const std::vector<const dsp::FeatureBundle*>& utterances,
                         const ModelConfig& config) {
  config.Validate();
  if (utterances.empty()) ThrowData("model '" + label + "': no training utterances");
  std::vector<Matrix> mfcc;
  std::vector<dsp::FeatureBundle> bundles;
  mfcc.reserve(utterances.size());
  bundles.reserve(utterances.size());
  for (const auto* f : utterances) {
    mfcc.push_back(f->mfcc);
    bundles.push_back(*f);
  }
  const std::uint64_t seed = config.train.seed ^ Fnv1a(label);
  hmm::AcousticHmm init;
  try {
    init = hmm::InitModel(mfcc, config.num_states, config.num_mixtures, seed,
                          config.train.variance_floor);
  } catch (const Error& e) {
    ThrowData("model '" + label + "': " + e.what());
  }
  auto trained = hmm::BaumWelch(init, mfcc, config.train);
  auto prosodic = supra::TrainSuprasegmental(trained.model, bundles, config.supra_variance_floor);
  return ModelPair{label, std::move(trained.model), std::move(prosodic)};
}

GenderModelSet EnrollGender(std::span<const LabeledUtterance> corpus,
                            const ModelConfig& config, EnrollmentCounts* counts) {
  std::array<std::vector<const dsp::FeatureBundle*>, 2> pools;
  for (const auto& u : corpus) {
    if (u.session != Session::kTrain) continue;
    pools[Index(u.gender)].push_back(&u.features);
  }
  for (Gender g : kGenders) {
    if (pools[Index(g)].empty()) {
      ThrowData("gender enrollment: no training utterances for gender " + ToString(g));
    }
  }
  GenderModelSet set;
  set.male = TrainModelPair(ToString(Gender::kMale), pools[0], config);
  set.female = TrainModelPair(ToString(Gender::kFemale), pools[1], config);
  if (counts) {
    (*counts)[set.male.label] = pools[0].size();
    (*counts)[set.female.label] = pools[1].size();
  }
  return set;
}

SpeakerRegistry EnrollSpeakers(std::span<const LabeledUtterance> corpus,
                               const ModelConfig& config, EnrollmentCounts* counts) {
  struct Entry {
    std::string speaker;
    Gender gender;
    std::vector<const dsp::FeatureBundle*> neutral;
  };
  std::vector<Entry> entries;
  std::map<std::string, std::size_t> index;
  for (const auto& u : corpus) {
    if (u.session != Session::kTrain) continue;
    auto [it, inserted] = index.try_emplace(u.speaker_id, entries.size());
    if (inserted) entries.push_back({u.speaker_id, u.gender, {}});
    Entry& e = entries[it->second];
    if (e.gender != u.gender) {
      ThrowData("speaker '" + u.speaker_id + "' appears with both genders");
    }
    if (u.condition == Condition::kNeutral) e.neutral.push_back(&u.features);
  }
  for (const auto& e : entries) {
    if (e.neutral.empty()) {
      ThrowData("speaker enrollment: speaker '" + e.speaker +
                "' has no neutral training utterances");
    }
  }

  std::vector<ModelPair> trained(entries.size());
  for (std::size_t i = 0; i < entries.size(); ++i) {
    trained[i] = TrainModelPair(entries[i].speaker, entries[i].neutral, config);
  }
  SpeakerRegistry reg;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    reg.by_gender[Index(entries[i].gender)].push_back(std::move(trained[i]));
    if (counts) (*counts)[entries[i].speaker] = entries[i].neutral.size();
  }
  return reg;
}

std::size_t ArgmaxFirst(std::span<const double> scores) {
  if (scores.empty()) ThrowUsage("ArgmaxFirst: no candidates");
  std::size_t best = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (std::isnan(scores[i])) ThrowNumeric("candidate score is NaN");
    if (scores[i] > scores[best]) best = i;
  }
  return best;
}

GenderDecision IdentifyGender(const GenderModelSet& models,
                              const dsp::FeatureBundle& features, FusionWeight alpha) {
  GenderDecision d;
  d.scores[0] = supra::FusedLogScore(models.male, features, alpha);
  d.scores[1] = supra::FusedLogScore(models.female, features, alpha);
  d.gender = kGenders[ArgmaxFirst(d.scores)];
  return d;
}

SpeakerDecision IdentifySpeaker(const SpeakerRegistry& registry, Gender gender,
                                const dsp::FeatureBundle& features, FusionWeight alpha) {
  const auto& candidates = registry.at(gender);
  if (candidates.empty()) {
    ThrowData("no speakers enrolled for gender " + ToString(gender));
  }
  SpeakerDecision d;
  d.scores.resize(candidates.size());
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    d.scores[i] = supra::FusedLogScore(candidates[i], features, alpha);
  }
  d.index = ArgmaxFirst(d.scores);
  d.speaker = candidates[d.index].label;
  return d;
}

IdentificationResult Identify(const GenderModelSet& models, const SpeakerRegistry& registry,
                              const dsp::FeatureBundle& features, FusionWeight alpha) {
  return Identify(models, registry, features, alpha, alpha);
}

IdentificationResult Identify(const GenderModelSet& models, const SpeakerRegistry& registry,
                              const dsp::FeatureBundle& features, FusionWeight gender_alpha,
                              FusionWeight speaker_alpha) {
  IdentificationResult r;
  const GenderDecision g = IdentifyGender(models, features, gender_alpha);
  SpeakerDecision s = IdentifySpeaker(registry, g.gender, features, speaker_alpha);
  r.gender = g.gender;
  r.gender_scores = g.scores;
  r.speaker = std::move(s.speaker);
  r.speaker_scores = std::move(s.scores);
  r.gender_alpha = gender_alpha.value();
  r.speaker_alpha = speaker_alpha.value();
  return r;
}

CandidateScores ScoreAllCandidates(const GenderModelSet& models,
                                   const SpeakerRegistry& registry,
                                   const dsp::FeatureBundle& features) {
  CandidateScores out;
  for (Gender g : kGenders) {
    out.gender[Index(g)] = supra::ScoreComponentsFor(models.at(g), features);
    for (const auto& pair : registry.at(g)) {
      out.speakers[Index(g)].push_back(supra::ScoreComponentsFor(pair, features));
    }
  }
  return out;
}

IdentificationResult Decide(const CandidateScores& scores, const SpeakerRegistry& registry,
                            FusionWeight gender_alpha, FusionWeight speaker_alpha) {
  IdentificationResult r;
  for (int g = 0; g < 2; ++g) r.gender_scores[g] = supra::Fuse(scores.gender[g], gender_alpha);
  r.gender = kGenders[ArgmaxFirst(r.gender_scores)];
  const auto& parts = scores.speakers[Index(r.gender)];
  const auto& candidates = registry.at(r.gender);
  if (candidates.empty() || parts.size() != candidates.size()) {
    ThrowData("no speakers enrolled for gender " + ToString(r.gender));
  }
  r.speaker_scores.resize(parts.size());
  for (std::size_t i = 0; i < parts.size(); ++i) {
    r.speaker_scores[i] = supra::Fuse(parts[i], speaker_alpha);
  }
  r.speaker = candidates[ArgmaxFirst(r.speaker_scores)].label;
  r.gender_alpha = gender_alpha.value();
  r.speaker_alpha = speaker_alpha.value();
  return r;
}

}  // namespace sphmm::recog
