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

#include <cstdint>
#include <vector>

#include "json.hpp"
#include "sphmm/gaussian.hpp"
#include "sphmm/matrix.hpp"

namespace sphmm::hmm {

// Left-to-right continuous-density HMM without skips. States are indexed
// from 0 here; state 0 is the only entry state and any state may end a
// sequence. The probability matrix is the stored form, log transitions are
// derived from it.
class AcousticHmm {
 public:
  AcousticHmm() = default;
  AcousticHmm(Matrix transitions, std::vector<GaussianMixture> emissions);

  int num_states() const noexcept { return static_cast<int>(emissions_.size()); }
  std::size_t dim() const noexcept {
    return emissions_.empty() ? 0 : emissions_.front().dim();
  }
  const Matrix& transitions() const noexcept { return transitions_; }
  double log_transition(int from, int to) const { return log_transitions_(from, to); }
  const GaussianMixture& emission(int state) const { return emissions_.at(state); }
  const std::vector<GaussianMixture>& emissions() const noexcept { return emissions_; }

 private:
  Matrix transitions_;
  Matrix log_transitions_;
  std::vector<GaussianMixture> emissions_;
};

struct TrainConfig {
  int max_iterations = 50;
  double rel_loglik_tolerance = 1e-4;
  double variance_floor = 1e-3;
  std::uint64_t seed = 0;

  void Validate() const;
};

// log P(O | model) by the forward recursion in log space. Returns -inf when
// the observation has zero probability.
double LogLikelihood(const AcousticHmm& model, const Matrix& obs);

struct ViterbiResult {
  std::vector<int> state_path;  // 0-based, non-decreasing, starts at 0
  double log_prob = kLogZero;
};

// Best state path. Ties prefer the lower-indexed predecessor, i.e. the path
// that stays in lower states longer.
ViterbiResult Viterbi(const AcousticHmm& model, const Matrix& obs);

struct KMeansResult {
  Matrix centroids;
  std::vector<int> assignment;
  std::vector<std::size_t> counts;
};

// Lloyd's algorithm with k-means++ seeding. Empty clusters are re-seeded at
// the point farthest from its centroid while any point is unclaimed.
KMeansResult KMeans(const Matrix& points, int k, std::uint64_t seed,
                    int iterations = 20);

// Equal-block segmentation of every sequence into num_states parts, per-state
// k-means for the mixtures, transitions self 0.8 / next 0.2 (last state 1.0).
AcousticHmm InitModel(const std::vector<Matrix>& sequences, int num_states,
                      int num_mixtures, std::uint64_t seed,
                      double variance_floor = 1e-3);

struct TrainResult {
  AcousticHmm model;
  // Total log-likelihood of the training data under each successive model,
  // starting with the initial one.
  std::vector<double> loglik_history;
};

// Baum-Welch re-estimation. Stops after max_iterations updates or when the
// relative log-likelihood improvement drops below the tolerance. Per-sequence
// statistics are reduced in sequence order, so results do not depend on the
// number of worker threads.
TrainResult BaumWelch(const AcousticHmm& init, const std::vector<Matrix>& sequences,
                      const TrainConfig& config);

// Versioned JSON document; doubles round-trip exactly.
nlohmann::json ToJson(const AcousticHmm& model);
AcousticHmm AcousticHmmFromJson(const nlohmann::json& j);

}  // namespace sphmm::hmm
