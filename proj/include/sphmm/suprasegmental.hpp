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
#include <cstddef>
#include <string>
#include <vector>

#include "json.hpp"
#include "sphmm/frontend.hpp"
#include "sphmm/hmm.hpp"

namespace sphmm::supra {

inline constexpr int kNumSegments = 3;
inline constexpr std::size_t kProsodicDim = 6;
// mean_log_f0 and std_log_f0 lead the vector.
inline constexpr std::size_t kPitchDims = 2;
inline constexpr double kDefaultVarianceFloor = 1e-4;

// Prosodic summary of a stretch of frames. Segments without voiced frames
// carry mean_log_f0 = std_log_f0 = 0 and voiced_fraction = 0.
struct ProsodicVector {
  double mean_log_f0 = 0.0;
  double std_log_f0 = 0.0;
  double voiced_fraction = 0.0;
  double mean_log_energy = 0.0;
  double std_log_energy = 0.0;
  double duration_fraction = 0.0;

  std::array<double, kProsodicDim> ToArray() const;
  static ProsodicVector FromArray(const std::array<double, kProsodicDim>& a);
};

// Half-open frame range [begin, end).
struct FrameRange {
  std::size_t begin = 0;
  std::size_t end = 0;

  std::size_t size() const noexcept { return end - begin; }
  bool empty() const noexcept { return end == begin; }
  bool operator==(const FrameRange&) const = default;
};

using Segmentation = std::array<FrameRange, kNumSegments>;

struct DiagGaussian {
  std::array<double, kProsodicDim> mean{};
  std::array<double, kProsodicDim> variance{};

  // An unvoiced vector (voiced_fraction 0) is scored on its non-pitch
  // dimensions only.
  double LogDensity(const ProsodicVector& v) const;
};

// Three positional segment states plus the utterance-level summary state.
// Suprasegmental transitions are the deterministic chain 1 -> 2 -> 3.
struct SuprasegmentalModel {
  std::array<DiagGaussian, kNumSegments> segment_states;
  DiagGaussian utterance_state;

  void Validate(double variance_floor = 0.0) const;
};

// Groups a state path over num_states states (a multiple of 3) into three
// contiguous frame ranges, states [0, N/3), [N/3, 2N/3), [2N/3, N).
Segmentation SegmentFromPath(const std::vector<int>& state_path, int num_states);

// Viterbi-aligns the MFCCs and groups states three-to-one.
Segmentation SegmentByAlignment(const hmm::AcousticHmm& acoustic,
                                const dsp::FeatureBundle& features);

// Statistics of the frames in `range`; an empty range gives the all-zero
// sentinel vector.
ProsodicVector ComputeProsodicVector(const dsp::FeatureBundle& features,
                                     const FrameRange& range);

struct UtteranceProsody {
  Segmentation segments;
  std::array<ProsodicVector, kNumSegments> segment_vectors;
  ProsodicVector utterance_vector;
};

UtteranceProsody AnalyzeProsody(const hmm::AcousticHmm& acoustic,
                                const dsp::FeatureBundle& features);

// Fits the four Gaussians by sample mean and (biased) variance, floored. A
// single utterance yields floor variances.
// Empty segments are skipped in their position's fit, and the pitch
// dimensions of unvoiced segments are skipped in theirs. A pitch dimension
// with no voiced samples keeps mean 0 and the floor variance.
SuprasegmentalModel TrainSuprasegmental(const hmm::AcousticHmm& acoustic,
                                        const std::vector<dsp::FeatureBundle>& utterances,
                                        double variance_floor = kDefaultVarianceFloor);

// Same fit from already-computed prosody.
SuprasegmentalModel FitSuprasegmental(const std::vector<UtteranceProsody>& prosody,
                                      double variance_floor = kDefaultVarianceFloor);

struct SupraScore {
  double log_likelihood = 0.0;
  // Segments that were empty under the alignment and contributed nothing.
  std::array<bool, kNumSegments> skipped{};
  int num_skipped() const;
};

SupraScore ScoreProsody(const SuprasegmentalModel& model, const UtteranceProsody& prosody);

// log P(O | Psi): sum of the three segment-state log-densities and the
// utterance-state log-density.
SupraScore LogLikelihoodSupra(const SuprasegmentalModel& model,
                              const hmm::AcousticHmm& acoustic,
                              const dsp::FeatureBundle& features);

// Weighting factor between the acoustic and prosodic log-scores.
class FusionWeight {
 public:
  explicit FusionWeight(double alpha);
  double value() const noexcept { return alpha_; }

 private:
  double alpha_;
};

// Acoustic and prosodic log-likelihoods of one utterance under one model pair.
struct ScoreComponents {
  double acoustic = 0.0;
  double supra = 0.0;
};

// (1 - alpha) * acoustic + alpha * supra; alpha = 0 and alpha = 1 return the
// corresponding component unchanged.
double Fuse(const ScoreComponents& parts, FusionWeight alpha);

// An acoustic model with the prosodic model trained on top of it; the unit
// scored for one gender or one speaker.
struct ModelPair {
  std::string label;
  hmm::AcousticHmm acoustic;
  SuprasegmentalModel supra;
};

ScoreComponents ScoreComponentsFor(const ModelPair& pair, const dsp::FeatureBundle& features);

// log P(lambda, Psi | O) up to a constant shared by all candidates (uniform
// priors, common P(O)).
double FusedLogScore(const ModelPair& pair, const dsp::FeatureBundle& features,
                     FusionWeight alpha);

nlohmann::json ToJson(const SuprasegmentalModel& model);
SuprasegmentalModel SuprasegmentalModelFromJson(const nlohmann::json& j);

nlohmann::json ToJson(const ModelPair& pair);
ModelPair ModelPairFromJson(const nlohmann::json& j);

}  // namespace sphmm::supra
