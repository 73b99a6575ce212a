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
#include <map>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "sphmm/frontend.hpp"
#include "sphmm/hmm.hpp"
#include "sphmm/labels.hpp"
#include "sphmm/suprasegmental.hpp"

namespace sphmm::recog {

using supra::FusionWeight;
using supra::ModelPair;
using supra::ScoreComponents;

// One utterance with its manifest labels and extracted features.
struct LabeledUtterance {
  std::string id;
  std::string speaker_id;
  Gender gender = Gender::kMale;
  std::string sentence_id;
  Condition condition = Condition::kNeutral;
  Session session = Session::kTrain;
  dsp::FeatureBundle features;
};

struct ModelConfig {
  int num_states = 9;
  int num_mixtures = 10;
  hmm::TrainConfig train;
  double supra_variance_floor = supra::kDefaultVarianceFloor;

  void Validate() const;
};

nlohmann::json ToJson(const ModelConfig& config);
ModelConfig ModelConfigFromJson(const nlohmann::json& j);

// Trains the acoustic HMM on the MFCCs, then the prosodic layer on top of it.
// The k-means seed is derived from config.train.seed and the label.
ModelPair TrainModelPair(const std::string& label,
                         const std::vector<const dsp::FeatureBundle*>& utterances,
                         const ModelConfig& config);

struct GenderModelSet {
  ModelPair male;
  ModelPair female;

  const ModelPair& at(Gender g) const { return g == Gender::kMale ? male : female; }
};

// Speaker models per gender, in enrollment order.
struct SpeakerRegistry {
  std::array<std::vector<ModelPair>, 2> by_gender;

  const std::vector<ModelPair>& at(Gender g) const { return by_gender[Index(g)]; }
  std::size_t size(Gender g) const { return at(g).size(); }
};

// Number of utterances that entered each model's training, keyed by label.
using EnrollmentCounts = std::map<std::string, std::size_t>;

// Pools every training-session utterance of each gender across both talking
// conditions. Throws if a gender has no training utterance.
GenderModelSet EnrollGender(std::span<const LabeledUtterance> corpus,
                            const ModelConfig& config,
                            EnrollmentCounts* counts = nullptr);

// One model per speaker from that speaker's neutral training utterances only.
// Speakers are ordered by first appearance in the corpus.
SpeakerRegistry EnrollSpeakers(std::span<const LabeledUtterance> corpus,
                               const ModelConfig& config,
                               EnrollmentCounts* counts = nullptr);

// Index of the first maximum; throws on NaN.
std::size_t ArgmaxFirst(std::span<const double> scores);

struct GenderDecision {
  Gender gender = Gender::kMale;
  std::array<double, 2> scores{};  // male, female
};

struct SpeakerDecision {
  std::string speaker;
  std::size_t index = 0;
  std::vector<double> scores;  // one per speaker of the searched gender
};

GenderDecision IdentifyGender(const GenderModelSet& models,
                              const dsp::FeatureBundle& features, FusionWeight alpha);

// Searches only the speakers enrolled under `gender`.
SpeakerDecision IdentifySpeaker(const SpeakerRegistry& registry, Gender gender,
                                const dsp::FeatureBundle& features, FusionWeight alpha);

struct IdentificationResult {
  Gender gender = Gender::kMale;
  std::array<double, 2> gender_scores{};
  std::string speaker;
  std::vector<double> speaker_scores;
  double gender_alpha = 0.5;
  double speaker_alpha = 0.5;
};

IdentificationResult Identify(const GenderModelSet& models, const SpeakerRegistry& registry,
                              const dsp::FeatureBundle& features, FusionWeight alpha);

IdentificationResult Identify(const GenderModelSet& models, const SpeakerRegistry& registry,
                              const dsp::FeatureBundle& features, FusionWeight gender_alpha,
                              FusionWeight speaker_alpha);

// Acoustic and prosodic scores of one utterance against every model, so that
// decisions at many fusion weights need no rescoring.
struct CandidateScores {
  std::array<ScoreComponents, 2> gender;
  std::array<std::vector<ScoreComponents>, 2> speakers;
};

CandidateScores ScoreAllCandidates(const GenderModelSet& models,
                                   const SpeakerRegistry& registry,
                                   const dsp::FeatureBundle& features);

// The two-stage decision from precomputed components; agrees with Identify().
IdentificationResult Decide(const CandidateScores& scores, const SpeakerRegistry& registry,
                            FusionWeight gender_alpha, FusionWeight speaker_alpha);

}  // namespace sphmm::recog
