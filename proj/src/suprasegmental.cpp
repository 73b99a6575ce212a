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

#include "sphmm/suprasegmental.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

#include "sphmm/error.hpp"
#include "sphmm/gaussian.hpp"

namespace sphmm::supra {

std::array<double, kProsodicDim> ProsodicVector::ToArray() const {
  return {mean_log_f0,     std_log_f0,     voiced_fraction,
          mean_log_energy, std_log_energy, duration_fraction};
}

ProsodicVector ProsodicVector::FromArray(const std::array<double, kProsodicDim>& a) {
  return {a[0], a[1], a[2], a[3], a[4], a[5]};
}

double DiagGaussian::LogDensity(const ProsodicVector& v) const {
  const auto x = v.ToArray();
  if (v.voiced_fraction > 0.0) return DiagGaussianLogDensity(x, mean, variance);
  const std::span<const double> rest(x.data() + kPitchDims, kProsodicDim - kPitchDims);
  return DiagGaussianLogDensity(rest, std::span<const double>(mean).subspan(kPitchDims),
                                std::span<const double>(variance).subspan(kPitchDims));
}

void SuprasegmentalModel::Validate(double variance_floor) const {
  auto check = [&](const DiagGaussian& g, const std::string& which) {
    for (std::size_t d = 0; d < kProsodicDim; ++d) {
      if (!std::isfinite(g.mean[d])) ThrowData("suprasegmental " + which + ": non-finite mean");
      if (!(g.variance[d] > 0.0) || g.variance[d] < variance_floor ||
          !std::isfinite(g.variance[d])) {
        ThrowData("suprasegmental " + which + ": variance below floor");
      }
    }
  };
  for (int k = 0; k < kNumSegments; ++k) check(segment_states[k], "segment " + std::to_string(k));
  check(utterance_state, "utterance state");
}

Segmentation SegmentFromPath(const std::vector<int>& path, int num_states) {
  if (num_states < kNumSegments || num_states % kNumSegments != 0) {
    ThrowUsage("SegmentFromPath: number of states (" + std::to_string(num_states) +
               ") must be a positive multiple of 3");
  }
  const int per_segment = num_states / kNumSegments;
  Segmentation seg;
  std::size_t t = 0;
  for (int k = 0; k < kNumSegments; ++k) {
    seg[k].begin = t;
    while (t < path.size() && path[t] / per_segment == k) ++t;
    seg[k].end = t;
  }
  if (t != path.size()) ThrowUsage("SegmentFromPath: state path is not left-to-right");
  return seg;
}

Segmentation SegmentByAlignment(const hmm::AcousticHmm& acoustic,
                                const dsp::FeatureBundle& features) {
  if (acoustic.num_states() % kNumSegments != 0) {
    ThrowUsage("SegmentByAlignment: number of states (" +
               std::to_string(acoustic.num_states()) + ") is not divisible by 3");
  }
  if (features.num_frames() == 0) ThrowUsage("SegmentByAlignment: no frames");
  const auto vit = hmm::Viterbi(acoustic, features.mfcc);
  return SegmentFromPath(vit.state_path, acoustic.num_states());
}

ProsodicVector ComputeProsodicVector(const dsp::FeatureBundle& features,
                                     const FrameRange& range) {
  const std::size_t total = features.num_frames();
  if (range.begin > range.end || range.end > total) {
    ThrowUsage("ComputeProsodicVector: range [" + std::to_string(range.begin) + ", " +
               std::to_string(range.end) + ") outside [0, " + std::to_string(total) + ")");
  }
  ProsodicVector v;
  if (range.empty()) return v;

  // Moments are taken about the first sample so a constant track has exactly zero spread.
  const double n = double(range.size());
  const double e_shift = features.log_energy[range.begin];
  double e_sum = 0.0, e_sq = 0.0;
  std::optional<double> f_shift;
  double f_sum = 0.0, f_sq = 0.0;
  std::size_t voiced = 0;
  for (std::size_t t = range.begin; t < range.end; ++t) {
    const double de = features.log_energy[t] - e_shift;
    e_sum += de;
    e_sq += de * de;
    if (features.f0[t]) {
      const double lf = std::log(*features.f0[t]);
      if (!f_shift) f_shift = lf;
      const double df = lf - *f_shift;
      f_sum += df;
      f_sq += df * df;
      ++voiced;
    }
  }
  v.mean_log_energy = e_shift + e_sum / n;
  v.std_log_energy = std::sqrt(std::max(0.0, e_sq / n - (e_sum / n) * (e_sum / n)));

  v.voiced_fraction = double(voiced) / n;
  if (voiced > 0) {
    const double nv = double(voiced);
    v.mean_log_f0 = *f_shift + f_sum / nv;
    v.std_log_f0 = std::sqrt(std::max(0.0, f_sq / nv - (f_sum / nv) * (f_sum / nv)));
  }
  v.duration_fraction = n / double(total);
  return v;
}

UtteranceProsody AnalyzeProsody(const hmm::AcousticHmm& acoustic,
                                const dsp::FeatureBundle& features) {
  UtteranceProsody p;
  p.segments = SegmentByAlignment(acoustic, features);
  for (int k = 0; k < kNumSegments; ++k) {
    p.segment_vectors[k] = ComputeProsodicVector(features, p.segments[k]);
  }
  p.utterance_vector = ComputeProsodicVector(features, {0, features.num_frames()});
  return p;
}

namespace {

// The pitch dimensions of an unvoiced vector hold the sentinel, not a
// measurement, so they are left out of both the fit and the density.
bool HasPitch(const ProsodicVector& v) { return v.voiced_fraction > 0.0; }

DiagGaussian FitGaussian(const std::vector<ProsodicVector>& vs, double floor) {
  DiagGaussian g;
  std::array<double, kProsodicDim> count{};
  for (const auto& v : vs) {
    const auto x = v.ToArray();
    for (std::size_t d = 0; d < kProsodicDim; ++d) {
      if (d < kPitchDims && !HasPitch(v)) continue;
      g.mean[d] += x[d];
      count[d] += 1.0;
    }
  }
  for (std::size_t d = 0; d < kProsodicDim; ++d) {
    if (count[d] > 0.0) g.mean[d] /= count[d];
  }
  for (const auto& v : vs) {
    const auto x = v.ToArray();
    for (std::size_t d = 0; d < kProsodicDim; ++d) {
      if (d < kPitchDims && !HasPitch(v)) continue;
      const double diff = x[d] - g.mean[d];
      g.variance[d] += diff * diff;
    }
  }
  for (std::size_t d = 0; d < kProsodicDim; ++d) {
    g.variance[d] = count[d] > 0.0 ? std::max(g.variance[d] / count[d], floor) : floor;
  }
  return g;
}

}  // namespace

SuprasegmentalModel FitSuprasegmental(const std::vector<UtteranceProsody>& prosody,
                                      double variance_floor) {
  if (!(variance_floor > 0.0)) ThrowUsage("FitSuprasegmental: variance floor must be positive");
  if (prosody.empty()) ThrowUsage("FitSuprasegmental: no training utterances");
  SuprasegmentalModel model;
  for (int k = 0; k < kNumSegments; ++k) {
    std::vector<ProsodicVector> xs;
    for (const auto& p : prosody) {
      if (!p.segments[k].empty()) xs.push_back(p.segment_vectors[k]);
    }
    if (xs.empty()) {
      ThrowData("FitSuprasegmental: segment " + std::to_string(k + 1) +
                " is empty in every training utterance");
    }
    model.segment_states[k] = FitGaussian(xs, variance_floor);
  }
  std::vector<ProsodicVector> utt;
  for (const auto& p : prosody) utt.push_back(p.utterance_vector);
  model.utterance_state = FitGaussian(utt, variance_floor);
  return model;
}

SuprasegmentalModel TrainSuprasegmental(const hmm::AcousticHmm& acoustic,
                                        const std::vector<dsp::FeatureBundle>& utterances,
                                        double variance_floor) {
  if (utterances.empty()) ThrowUsage("TrainSuprasegmental: no training utterances");
  std::vector<UtteranceProsody> prosody;
  prosody.reserve(utterances.size());
  for (const auto& f : utterances) prosody.push_back(AnalyzeProsody(acoustic, f));
  return FitSuprasegmental(prosody, variance_floor);
}

int SupraScore::num_skipped() const {
  int n = 0;
  for (bool s : skipped) n += s ? 1 : 0;
  return n;
}

SupraScore ScoreProsody(const SuprasegmentalModel& model, const UtteranceProsody& prosody) {
  SupraScore score;
  for (int k = 0; k < kNumSegments; ++k) {
    if (prosody.segments[k].empty()) {
      score.skipped[k] = true;
      continue;
    }
    score.log_likelihood += model.segment_states[k].LogDensity(prosody.segment_vectors[k]);
  }
  score.log_likelihood += model.utterance_state.LogDensity(prosody.utterance_vector);
  return score;
}

SupraScore LogLikelihoodSupra(const SuprasegmentalModel& model,
                              const hmm::AcousticHmm& acoustic,
                              const dsp::FeatureBundle& features) {
  return ScoreProsody(model, AnalyzeProsody(acoustic, features));
}

FusionWeight::FusionWeight(double alpha) : alpha_(alpha) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    ThrowUsage("fusion weight alpha=" + std::to_string(alpha) + " outside [0, 1]");
  }
}

double Fuse(const ScoreComponents& parts, FusionWeight alpha) {
  const double a = alpha.value();
  if (a == 0.0) return parts.acoustic;
  if (a == 1.0) return parts.supra;
  return (1.0 - a) * parts.acoustic + a * parts.supra;
}

ScoreComponents ScoreComponentsFor(const ModelPair& pair, const dsp::FeatureBundle& features) {
  return {hmm::LogLikelihood(pair.acoustic, features.mfcc),
          LogLikelihoodSupra(pair.supra, pair.acoustic, features).log_likelihood};
}

double FusedLogScore(const ModelPair& pair, const dsp::FeatureBundle& features,
                     FusionWeight alpha) {
  return Fuse(ScoreComponentsFor(pair, features), alpha);
}

namespace {

constexpr int kFormatVersion = 1;

nlohmann::json GaussianJson(const DiagGaussian& g) {
  return {{"mean", g.mean}, {"variance", g.variance}};
}

DiagGaussian GaussianFromJson(const nlohmann::json& j) {
  DiagGaussian g;
  const auto mean = j.at("mean").get<std::vector<double>>();
  const auto var = j.at("variance").get<std::vector<double>>();
  if (mean.size() != kProsodicDim || var.size() != kProsodicDim) {
    ThrowData("suprasegmental state: expected 6-dimensional mean and variance");
  }
  std::copy(mean.begin(), mean.end(), g.mean.begin());
  std::copy(var.begin(), var.end(), g.variance.begin());
  return g;
}

}  // namespace

nlohmann::json ToJson(const SuprasegmentalModel& model) {
  nlohmann::json segs = nlohmann::json::array();
  for (const auto& g : model.segment_states) segs.push_back(GaussianJson(g));
  return {{"segment_states", std::move(segs)},
          {"utterance_state", GaussianJson(model.utterance_state)}};
}

SuprasegmentalModel SuprasegmentalModelFromJson(const nlohmann::json& j) {
  try {
    SuprasegmentalModel m;
    const auto& segs = j.at("segment_states");
    if (!segs.is_array() || segs.size() != kNumSegments) {
      ThrowData("suprasegmental model: expected exactly 3 segment states");
    }
    for (int k = 0; k < kNumSegments; ++k) m.segment_states[k] = GaussianFromJson(segs[k]);
    m.utterance_state = GaussianFromJson(j.at("utterance_state"));
    m.Validate();
    return m;
  } catch (const nlohmann::json::exception& e) {
    ThrowData(std::string("suprasegmental model: ") + e.what());
  }
}

nlohmann::json ToJson(const ModelPair& pair) {
  return {{"format_version", kFormatVersion},
          {"label", pair.label},
          {"acoustic", hmm::ToJson(pair.acoustic)},
          {"supra", ToJson(pair.supra)}};
}

ModelPair ModelPairFromJson(const nlohmann::json& j) {
  try {
    const int version = j.at("format_version").get<int>();
    if (version != kFormatVersion) {
      ThrowData("model pair: unsupported format_version " + std::to_string(version));
    }
    ModelPair pair{j.at("label").get<std::string>(),
                   hmm::AcousticHmmFromJson(j.at("acoustic")),
                   SuprasegmentalModelFromJson(j.at("supra"))};
    if (pair.acoustic.num_states() % kNumSegments != 0) {
      ThrowData("model pair '" + pair.label + "': acoustic state count not divisible by 3");
    }
    return pair;
  } catch (const nlohmann::json::exception& e) {
    ThrowData(std::string("model pair: ") + e.what());
  }
}

}  // namespace sphmm::supra
