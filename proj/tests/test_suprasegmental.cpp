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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <numbers>
#include <random>

#include "sphmm/error.hpp"
#include "sphmm/suprasegmental.hpp"

using namespace sphmm;
using namespace sphmm::supra;

namespace {

// Three acoustic phases with distinct cepstra; f0 and energy per phase.
dsp::FeatureBundle ThreePhase(std::array<std::size_t, 3> lengths, std::array<double, 3> f0,
                              std::mt19937_64& rng, double f0_jitter = 0.0) {
  std::normal_distribution<double> g(0.0, 0.3);
  dsp::FeatureBundle f;
  const std::size_t total = lengths[0] + lengths[1] + lengths[2];
  f.mfcc = Matrix(total, 2);
  std::size_t t = 0;
  for (int p = 0; p < 3; ++p) {
    for (std::size_t i = 0; i < lengths[p]; ++i, ++t) {
      f.mfcc(t, 0) = 4.0 * p + g(rng);
      f.mfcc(t, 1) = (p == 1 ? 3.0 : -1.0) + g(rng);
      f.f0.push_back(f0[p] * std::exp(f0_jitter * g(rng)));
      f.log_energy.push_back(-3.0 + 0.5 * p + 0.1 * g(rng));
      f.frame_times.push_back(0.01 * double(t));
    }
  }
  return f;
}

hmm::AcousticHmm ThreePhaseModel() {
  Matrix a(9, 9, 0.0);
  for (int i = 0; i < 9; ++i) {
    a(i, i) = i == 8 ? 1.0 : 0.7;
    if (i < 8) a(i, i + 1) = 0.3;
  }
  std::vector<GaussianMixture> em;
  for (int s = 0; s < 9; ++s) {
    const int p = s / 3;
    em.emplace_back(std::vector<double>{1.0},
                    Matrix::FromRows({{4.0 * p, p == 1 ? 3.0 : -1.0}}),
                    Matrix::FromRows({{0.09, 0.09}}));
  }
  return hmm::AcousticHmm(std::move(a), std::move(em));
}

dsp::FeatureBundle Track(const std::vector<std::optional<double>>& f0,
                         const std::vector<double>& energy) {
  dsp::FeatureBundle f;
  f.mfcc = Matrix(f0.size(), 1);
  f.f0 = f0;
  f.log_energy = energy;
  for (std::size_t t = 0; t < f0.size(); ++t) f.frame_times.push_back(0.01 * t);
  return f;
}

DiagGaussian Centered(const ProsodicVector& v, double var) {
  DiagGaussian g;
  g.mean = v.ToArray();
  g.variance.fill(var);
  return g;
}

}  // namespace

TEST_CASE("segmenting a path through all nine states") {
  const auto seg = SegmentFromPath({0, 0, 1, 2, 3, 4, 5, 6, 7, 8}, 9);
  CHECK(seg[0].size() == 4);
  CHECK(seg[1].size() == 3);
  CHECK(seg[2].size() == 3);
}

TEST_CASE("a path that never leaves the first state fills only the first segment") {
  const auto seg = SegmentFromPath(std::vector<int>(12, 0), 9);
  CHECK(seg[0] == FrameRange{0, 12});
  CHECK(seg[1].empty());
  CHECK(seg[2].empty());
}

TEST_CASE("segments partition the frames in order") {
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<int> path{0};
    std::bernoulli_distribution step(0.3);
    for (int t = 1; t < 40; ++t) path.push_back(std::min(8, path.back() + int(step(rng))));
    const auto seg = SegmentFromPath(path, 9);
    CHECK(seg[0].begin == 0);
    CHECK(seg[0].end == seg[1].begin);
    CHECK(seg[1].end == seg[2].begin);
    CHECK(seg[2].end == path.size());
  }
}

TEST_CASE("segmentation needs a state count divisible by three") {
  CHECK_THROWS_AS(SegmentFromPath({0, 1, 2, 3}, 8), Error);
  CHECK_THROWS_AS(SegmentFromPath({0, 1, 2}, 0), Error);
}

TEST_CASE("alignment finds the phase boundaries of a three-phase utterance") {
  std::mt19937_64 rng(3);
  const auto model = ThreePhaseModel();
  for (auto lengths : {std::array<std::size_t, 3>{20, 30, 25}, {35, 15, 40}, {12, 12, 12}}) {
    const auto f = ThreePhase(lengths, {100, 120, 140}, rng);
    const auto seg = SegmentByAlignment(model, f);
    CHECK(std::abs(double(seg[0].end) - double(lengths[0])) <= 2.0);
    CHECK(std::abs(double(seg[1].end) - double(lengths[0] + lengths[1])) <= 2.0);
  }
}

TEST_CASE("constant f0 and energy give zero spread and full voicing") {
  const auto f = Track(std::vector<std::optional<double>>(10, 200.0), std::vector<double>(10, -2.0));
  const auto v = ComputeProsodicVector(f, {0, 10});
  CHECK(v.std_log_f0 == 0.0);
  CHECK(v.std_log_energy == 0.0);
  CHECK(v.voiced_fraction == 1.0);
  CHECK(v.mean_log_f0 == doctest::Approx(std::log(200.0)));
  CHECK(v.duration_fraction == 1.0);
}

TEST_CASE("unvoiced range carries the f0 sentinel") {
  const auto f = Track({std::nullopt, std::nullopt, std::nullopt, 150.0},
                       {-1.0, -2.0, -3.0, -4.0});
  const auto v = ComputeProsodicVector(f, {0, 3});
  CHECK(v.mean_log_f0 == 0.0);
  CHECK(v.std_log_f0 == 0.0);
  CHECK(v.voiced_fraction == 0.0);
  CHECK(v.mean_log_energy == doctest::Approx(-2.0));
  CHECK(v.std_log_energy == doctest::Approx(std::sqrt(2.0 / 3.0)));
  CHECK(v.duration_fraction == doctest::Approx(0.75));
}

TEST_CASE("half at 100 Hz and half at 400 Hz average to log 200") {
  const auto f = Track({100.0, 400.0, 100.0, 400.0}, {0, 0, 0, 0});
  const auto v = ComputeProsodicVector(f, {0, 4});
  CHECK(v.mean_log_f0 == doctest::Approx(std::log(200.0)).epsilon(1e-14));
  CHECK(v.std_log_f0 == doctest::Approx(std::log(2.0)));
}

TEST_CASE("empty range gives the all-zero vector and out-of-range throws") {
  const auto f = Track({100.0, 200.0}, {0, 0});
  const auto v = ComputeProsodicVector(f, {1, 1});
  for (double x : v.ToArray()) CHECK(x == 0.0);
  CHECK_THROWS_AS(ComputeProsodicVector(f, {1, 3}), Error);
}

TEST_CASE("prosodic vector array order") {
  ProsodicVector v{1, 2, 3, 4, 5, 6};
  CHECK(v.ToArray() == std::array<double, 6>{1, 2, 3, 4, 5, 6});
  CHECK(ProsodicVector::FromArray(v.ToArray()).ToArray() == v.ToArray());
}

TEST_CASE("identical utterances give floor variances") {
  std::mt19937_64 rng(5);
  const auto f = ThreePhase({10, 10, 10}, {100, 150, 200}, rng);
  const auto model = TrainSuprasegmental(ThreePhaseModel(), {f, f, f}, 1e-4);
  for (const auto& s : model.segment_states) {
    for (double v : s.variance) CHECK(v == 1e-4);
  }
  for (double v : model.utterance_state.variance) CHECK(v == 1e-4);
}

TEST_CASE("two utterances give the average as mean") {
  std::mt19937_64 rng(6);
  const auto acoustic = ThreePhaseModel();
  const auto a = ThreePhase({10, 10, 10}, {100, 150, 200}, rng);
  const auto b = ThreePhase({12, 9, 14}, {110, 140, 230}, rng);
  const auto model = TrainSuprasegmental(acoustic, {a, b});
  const auto pa = AnalyzeProsody(acoustic, a), pb = AnalyzeProsody(acoustic, b);
  for (int k = 0; k < 3; ++k) {
    const auto va = pa.segment_vectors[k].ToArray(), vb = pb.segment_vectors[k].ToArray();
    for (int d = 0; d < 6; ++d) {
      CHECK(model.segment_states[k].mean[d] == doctest::Approx(0.5 * (va[d] + vb[d])));
      const double half = 0.5 * (va[d] - vb[d]);
      CHECK(model.segment_states[k].variance[d] ==
            doctest::Approx(std::max(half * half, kDefaultVarianceFloor)));
    }
  }
}

TEST_CASE("rising f0 shows up as rising segment means") {
  std::mt19937_64 rng(7);
  const auto acoustic = ThreePhaseModel();
  std::vector<dsp::FeatureBundle> utts;
  for (int i = 0; i < 6; ++i) {
    utts.push_back(ThreePhase({15u + i, 18, 14u + 2 * i}, {110, 130, 160}, rng, 0.05));
  }
  const auto model = TrainSuprasegmental(acoustic, utts);
  CHECK(model.segment_states[0].mean[0] < model.segment_states[1].mean[0]);
  CHECK(model.segment_states[1].mean[0] < model.segment_states[2].mean[0]);
}

TEST_CASE("a position empty in every utterance cannot be fitted") {
  UtteranceProsody p;
  p.segments = {FrameRange{0, 5}, FrameRange{5, 5}, FrameRange{5, 5}};
  p.segment_vectors[0] = ProsodicVector{5, 0.1, 1, -2, 0.2, 1};
  p.utterance_vector = p.segment_vectors[0];
  CHECK_THROWS_AS(FitSuprasegmental({p, p}), Error);
}

TEST_CASE("empty segments are skipped in the fit") {
  UtteranceProsody a, b;
  a.segments = {FrameRange{0, 4}, FrameRange{4, 8}, FrameRange{8, 10}};
  a.segment_vectors = {ProsodicVector{4, 0, 1, 0, 0, .4}, ProsodicVector{5, 0, 1, 0, 0, .4},
                       ProsodicVector{6, 0, 1, 0, 0, .2}};
  b.segments = {FrameRange{0, 6}, FrameRange{6, 10}, FrameRange{10, 10}};
  b.segment_vectors = {ProsodicVector{4.2, 0, 1, 0, 0, .6}, ProsodicVector{5.2, 0, 1, 0, 0, .4},
                       ProsodicVector{}};
  const auto m = FitSuprasegmental({a, b});
  CHECK(m.segment_states[0].mean[0] == doctest::Approx(4.1));
  CHECK(m.segment_states[2].mean[0] == doctest::Approx(6.0));
  CHECK(m.segment_states[2].mean[5] == doctest::Approx(0.2));
}

TEST_CASE("unvoiced segments leave the pitch dimensions out of the fit") {
  UtteranceProsody a, b, c;
  for (auto* p : {&a, &b, &c}) p->segments = {FrameRange{0, 4}, FrameRange{4, 8}, FrameRange{8, 10}};
  a.segment_vectors = {ProsodicVector{4, .1, 1, -1, .2, .4}, ProsodicVector{5, .1, 1, -1, .2, .4},
                       ProsodicVector{0, 0, 0, -3, .5, .2}};
  b.segment_vectors = {ProsodicVector{4.4, .3, .5, -2, .4, .4}, ProsodicVector{5, .1, 1, -1, .2, .4},
                       ProsodicVector{0, 0, 0, -5, .7, .2}};
  c.segment_vectors = {ProsodicVector{0, 0, 0, -3, .6, .4}, ProsodicVector{5, .1, 1, -1, .2, .4},
                       ProsodicVector{0, 0, 0, -4, .6, .2}};
  const auto m = FitSuprasegmental({a, b, c});
  // Pitch statistics come from the two voiced vectors only.
  CHECK(m.segment_states[0].mean[0] == doctest::Approx(4.2));
  CHECK(m.segment_states[0].variance[0] == doctest::Approx(0.04));
  CHECK(m.segment_states[0].mean[1] == doctest::Approx(0.2));
  // Every other dimension uses all three.
  CHECK(m.segment_states[0].mean[2] == doctest::Approx(0.5));
  CHECK(m.segment_states[0].mean[3] == doctest::Approx(-2.0));
  // No voiced vector at all: mean 0 and the floor.
  CHECK(m.segment_states[2].mean[0] == 0.0);
  CHECK(m.segment_states[2].variance[0] == kDefaultVarianceFloor);
  CHECK(m.segment_states[2].variance[1] == kDefaultVarianceFloor);
  CHECK(m.segment_states[2].mean[3] == doctest::Approx(-4.0));
}

TEST_CASE("an unvoiced vector is scored on the non-pitch dimensions alone") {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> n(0.0, 1.0);
  std::uniform_real_distribution<double> var(0.05, 2.0);
  for (int trial = 0; trial < 20; ++trial) {
    DiagGaussian g;
    for (std::size_t d = 0; d < kProsodicDim; ++d) {
      g.mean[d] = n(rng);
      g.variance[d] = var(rng);
    }
    const ProsodicVector v{0, 0, 0, n(rng), n(rng), 0.3};
    const auto x = v.ToArray();
    double want = 0.0;
    for (std::size_t d = kPitchDims; d < kProsodicDim; ++d) {
      const double z = x[d] - g.mean[d];
      want += -0.5 * std::log(2.0 * std::numbers::pi * g.variance[d]) - 0.5 * z * z / g.variance[d];
    }
    CHECK(g.LogDensity(v) == doctest::Approx(want).epsilon(1e-12));
    // Moving the pitch means cannot change the score.
    auto moved = g;
    moved.mean[0] += 3.0;
    moved.variance[1] *= 10.0;
    CHECK(moved.LogDensity(v) == g.LogDensity(v));
  }
}

TEST_CASE("centered model scores the four normalization constants") {
  std::mt19937_64 rng(8);
  const auto acoustic = ThreePhaseModel();
  const auto f = ThreePhase({10, 14, 12}, {100, 130, 170}, rng, 0.05);
  const auto p = AnalyzeProsody(acoustic, f);
  const double v = 0.02;
  SuprasegmentalModel m;
  for (int k = 0; k < 3; ++k) m.segment_states[k] = Centered(p.segment_vectors[k], v);
  m.utterance_state = Centered(p.utterance_vector, v);
  const auto s = LogLikelihoodSupra(m, acoustic, f);
  CHECK(s.num_skipped() == 0);
  CHECK(s.log_likelihood == doctest::Approx(-4.0 * 6.0 * 0.5 * std::log(2.0 * std::numbers::pi * v)));
}

TEST_CASE("doubling a variance lowers the density at the mean") {
  DiagGaussian g;
  g.mean = {1, 2, 3, 4, 5, 6};
  g.variance.fill(0.1);
  const auto at_mean = ProsodicVector::FromArray(g.mean);
  const double before = g.LogDensity(at_mean);
  g.variance[3] *= 2.0;
  CHECK(g.LogDensity(at_mean) < before);
}

TEST_CASE("hand-computed six-dimensional score") {
  const ProsodicVector seg[3] = {{4.6, 0.05, 0.9, -3.0, 0.4, 0.3},
                                 {4.8, 0.02, 1.0, -2.5, 0.3, 0.4},
                                 {4.5, 0.08, 0.7, -3.2, 0.6, 0.3}};
  const ProsodicVector utt{4.65, 0.12, 0.87, -2.9, 0.5, 1.0};
  SuprasegmentalModel m;
  for (int k = 0; k < 3; ++k) {
    m.segment_states[k].mean = {4.7, 0.04, 0.95, -2.8, 0.45, 0.33};
    m.segment_states[k].variance = {0.01, 0.001, 0.005, 0.2, 0.02, 0.004};
  }
  m.utterance_state.mean = {4.6, 0.1, 0.9, -3.0, 0.45, 1.0};
  m.utterance_state.variance = {0.02, 0.002, 0.004, 0.3, 0.01, 1e-4};
  UtteranceProsody p;
  p.segments = {FrameRange{0, 3}, FrameRange{3, 7}, FrameRange{7, 10}};
  for (int k = 0; k < 3; ++k) p.segment_vectors[k] = seg[k];
  p.utterance_vector = utt;

  auto scalar = [](double x, double mu, double var) {
    return -0.5 * std::log(2.0 * std::numbers::pi * var) - 0.5 * (x - mu) * (x - mu) / var;
  };
  double expected = 0.0;
  for (int k = 0; k < 3; ++k) {
    const auto x = seg[k].ToArray();
    for (int d = 0; d < 6; ++d) {
      expected += scalar(x[d], m.segment_states[k].mean[d], m.segment_states[k].variance[d]);
    }
  }
  const auto x = utt.ToArray();
  for (int d = 0; d < 6; ++d) {
    expected += scalar(x[d], m.utterance_state.mean[d], m.utterance_state.variance[d]);
  }
  CHECK(std::abs(ScoreProsody(m, p).log_likelihood - expected) <= 1e-10);
}

TEST_CASE("empty segments contribute nothing and are flagged") {
  SuprasegmentalModel m;
  for (auto& s : m.segment_states) s.variance.fill(0.5);
  m.utterance_state.variance.fill(0.5);
  UtteranceProsody p;
  p.segments = {FrameRange{0, 10}, FrameRange{10, 10}, FrameRange{10, 10}};
  const auto full = ScoreProsody(m, p);
  CHECK(full.num_skipped() == 2);
  CHECK(full.skipped == std::array<bool, 3>{false, true, true});
  const double one = m.segment_states[0].LogDensity(p.segment_vectors[0]);
  CHECK(full.log_likelihood == doctest::Approx(2.0 * one));
}

TEST_CASE("fusion weight must lie in the unit interval") {
  CHECK_THROWS_AS(FusionWeight(-0.1), Error);
  CHECK_THROWS_AS(FusionWeight(1.0001), Error);
  CHECK_THROWS_AS(FusionWeight(std::nan("")), Error);
  CHECK_NOTHROW(FusionWeight(0.0));
  CHECK_NOTHROW(FusionWeight(1.0));
}

TEST_CASE("fusion endpoints return the components exactly") {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(-5000.0, 100.0);
  for (int i = 0; i < 100; ++i) {
    const ScoreComponents c{u(rng), u(rng)};
    CHECK(Fuse(c, FusionWeight(0.0)) == c.acoustic);
    CHECK(Fuse(c, FusionWeight(1.0)) == c.supra);
    CHECK(Fuse(c, FusionWeight(0.5)) == doctest::Approx(0.5 * (c.acoustic + c.supra)));
  }
}

TEST_CASE("fused score is affine in alpha") {
  std::mt19937_64 rng(10);
  std::uniform_real_distribution<double> u(-3000.0, 50.0), ua(0.0, 1.0);
  for (int i = 0; i < 100; ++i) {
    const ScoreComponents c{u(rng), u(rng)};
    const double a = ua(rng);
    const double s0 = Fuse(c, FusionWeight(0.0)), s1 = Fuse(c, FusionWeight(1.0));
    const double tol = 1e-12 * std::max({1.0, std::abs(s0), std::abs(s1)});
    CHECK(std::abs(Fuse(c, FusionWeight(a)) - (s0 + a * (s1 - s0))) <= tol);
  }
}

TEST_CASE("own training data outscores a model fitted elsewhere") {
  std::mt19937_64 rng(11);
  const auto acoustic = ThreePhaseModel();
  std::vector<dsp::FeatureBundle> mine, other;
  for (int i = 0; i < 8; ++i) {
    mine.push_back(ThreePhase({14u + i % 3, 16, 15}, {110, 125, 140}, rng, 0.05));
    other.push_back(ThreePhase({8, 25u + i % 4, 10}, {210, 190, 170}, rng, 0.05));
  }
  const auto m_mine = TrainSuprasegmental(acoustic, mine);
  const auto m_other = TrainSuprasegmental(acoustic, other);
  double own = 0.0, foreign = 0.0;
  for (const auto& f : mine) {
    own += LogLikelihoodSupra(m_mine, acoustic, f).log_likelihood;
    foreign += LogLikelihoodSupra(m_other, acoustic, f).log_likelihood;
  }
  CHECK(own > foreign);
}

TEST_CASE("model pair json round trip keeps scores bit-exact") {
  std::mt19937_64 rng(12);
  const auto acoustic = ThreePhaseModel();
  std::vector<dsp::FeatureBundle> utts;
  for (int i = 0; i < 4; ++i) utts.push_back(ThreePhase({10u + i, 12, 11}, {120, 140, 160}, rng, 0.03));
  ModelPair pair{"spk", acoustic, TrainSuprasegmental(acoustic, utts)};
  const auto back = ModelPairFromJson(nlohmann::json::parse(ToJson(pair).dump()));
  CHECK(back.label == "spk");
  const auto a = ScoreComponentsFor(pair, utts[0]), b = ScoreComponentsFor(back, utts[0]);
  CHECK(a.acoustic == b.acoustic);
  CHECK(a.supra == b.supra);
  const auto j = ToJson(pair.supra);
  CHECK(j.at("segment_states").size() == 3);
  CHECK(j.at("utterance_state").at("mean").size() == 6);
}

TEST_CASE("scoring is deterministic") {
  std::mt19937_64 rng(13);
  const auto acoustic = ThreePhaseModel();
  const auto f = ThreePhase({10, 12, 11}, {120, 140, 160}, rng, 0.03);
  const auto m = TrainSuprasegmental(acoustic, {f, ThreePhase({11, 12, 10}, {121, 139, 158}, rng, 0.03)});
  ModelPair pair{"x", acoustic, m};
  CHECK(FusedLogScore(pair, f, FusionWeight(0.3)) == FusedLogScore(pair, f, FusionWeight(0.3)));
}
