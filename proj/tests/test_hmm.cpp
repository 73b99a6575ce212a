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

#include <random>

#include "oracles.hpp"
#include "sphmm/error.hpp"
#include "sphmm/gaussian.hpp"
#include "sphmm/hmm.hpp"

using namespace sphmm;
using namespace sphmm::hmm;

namespace {

GaussianMixture Single(std::vector<double> mean, std::vector<double> var) {
  return GaussianMixture({1.0}, Matrix::FromRows({mean}), Matrix::FromRows({var}));
}

AcousticHmm TwoState(double stay = 0.7) {
  return AcousticHmm(Matrix::FromRows({{stay, 1.0 - stay}, {0.0, 1.0}}),
                     {Single({0.0}, {1.0}), Single({5.0}, {1.0})});
}

}  // namespace

TEST_CASE("log-add and log-sum-exp handle log zero") {
  CHECK(LogAdd(kLogZero, kLogZero) == kLogZero);
  CHECK(LogAdd(std::log(2.0), kLogZero) == doctest::Approx(std::log(2.0)));
  CHECK(LogAdd(std::log(2.0), std::log(3.0)) == doctest::Approx(std::log(5.0)));
  const std::vector<double> v{std::log(1.0), std::log(2.0), kLogZero, std::log(4.0)};
  CHECK(LogSumExp(v) == doctest::Approx(std::log(7.0)));
}

TEST_CASE("gaussian mixture density matches the direct formula") {
  GaussianMixture g({0.3, 0.7}, Matrix::FromRows({{0.0, 1.0}, {2.0, -1.0}}),
                    Matrix::FromRows({{1.0, 0.5}, {2.0, 0.25}}));
  const double x[2] = {0.4, 0.1};
  const double direct = 0.3 * oracle::GaussianDensity(x, g.means().row(0).data(), g.variances().row(0).data(), 2) +
                        0.7 * oracle::GaussianDensity(x, g.means().row(1).data(), g.variances().row(1).data(), 2);
  CHECK(g.LogDensity(x) == doctest::Approx(std::log(direct)).epsilon(1e-12));
}

TEST_CASE("gaussian mixture validates its parameters") {
  CHECK_THROWS_AS(GaussianMixture({0.5, 0.6}, Matrix(2, 1), Matrix(2, 1, 1.0)), Error);
  CHECK_THROWS_AS(GaussianMixture({1.0}, Matrix(1, 1), Matrix(1, 1, 0.0)), Error);
}

TEST_CASE("model construction rejects skips and bad rows") {
  CHECK_THROWS_AS(AcousticHmm(Matrix::FromRows({{0.5, 0.0, 0.5}, {0, 0.5, 0.5}, {0, 0, 1}}),
                              {Single({0}, {1}), Single({0}, {1}), Single({0}, {1})}),
                  Error);
  CHECK_THROWS_AS(AcousticHmm(Matrix::FromRows({{0.5, 0.4}, {0, 1}}),
                              {Single({0}, {1}), Single({0}, {1})}),
                  Error);
  CHECK_THROWS_AS(AcousticHmm(Matrix::FromRows({{1.0, 0.0}, {0.5, 0.5}}),
                              {Single({0}, {1}), Single({0}, {1})}),
                  Error);
}

TEST_CASE("forward equals brute-force path enumeration") {
  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 30; ++trial) {
    const int n = 1 + trial % 3;
    const auto model = oracle::RandomModel(rng, n, 1 + trial % 2, 2);
    const auto obs = oracle::RandomObs(rng, 1 + trial % 5, 2);
    CHECK(LogLikelihood(model, obs) ==
          doctest::Approx(oracle::BruteForceLogLikelihood(model, obs)).epsilon(1e-10));
  }
}

TEST_CASE("single state, single frame is the emission log-density") {
  AcousticHmm m(Matrix::FromRows({{1.0}}), {Single({1.0, 2.0}, {0.5, 2.0})});
  const auto obs = Matrix::FromRows({{0.0, 0.0}});
  CHECK(LogLikelihood(m, obs) == doctest::Approx(DiagGaussianLogDensity(
                                     obs.row(0), std::vector<double>{1.0, 2.0},
                                     std::vector<double>{0.5, 2.0})));
}

TEST_CASE("viterbi equals the brute-force best path") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 30; ++trial) {
    const auto model = oracle::RandomModel(rng, 1 + trial % 4, 2, 1);
    const auto obs = oracle::RandomObs(rng, 1 + trial % 6, 1);
    const auto v = Viterbi(model, obs);
    const auto best = oracle::BruteForceViterbi(model, obs);
    CHECK(v.log_prob == doctest::Approx(best.log_prob).epsilon(1e-10));
    CHECK(v.state_path == best.path);
  }
}

TEST_CASE("viterbi never exceeds the forward likelihood") {
  std::mt19937_64 rng(6);
  for (int trial = 0; trial < 20; ++trial) {
    const auto model = oracle::RandomModel(rng, 3, 2, 3);
    const auto obs = oracle::RandomObs(rng, 12, 3);
    CHECK(Viterbi(model, obs).log_prob <= LogLikelihood(model, obs) + 1e-12);
  }
}

TEST_CASE("viterbi paths are left-to-right and start in the first state") {
  std::mt19937_64 rng(8);
  const auto model = oracle::RandomModel(rng, 5, 2, 2);
  const auto v = Viterbi(model, oracle::RandomObs(rng, 40, 2));
  REQUIRE(v.state_path.size() == 40);
  CHECK(v.state_path[0] == 0);
  for (std::size_t t = 1; t < v.state_path.size(); ++t) {
    const int step = v.state_path[t] - v.state_path[t - 1];
    CHECK((step == 0 || step == 1));
  }
}

TEST_CASE("viterbi follows an obvious two-phase sequence") {
  const auto obs = Matrix::FromRows({{0.1}, {-0.2}, {0.0}, {5.1}, {4.9}});
  CHECK(Viterbi(TwoState(), obs).state_path == std::vector<int>{0, 0, 0, 1, 1});
}

TEST_CASE("viterbi ties end in the lowest state") {
  AcousticHmm m(Matrix::FromRows({{0.5, 0.5}, {0.0, 1.0}}),
                {Single({0.0}, {1.0}), Single({0.0}, {1.0})});
  // Paths 0,0 and 0,1 score the same.
  const auto obs = Matrix::FromRows({{0.0}, {0.0}});
  const auto v = Viterbi(m, obs);
  CHECK(v.state_path == std::vector<int>{0, 0});
}

TEST_CASE("likelihood of an impossible model is log zero, not NaN") {
  AcousticHmm m(Matrix::FromRows({{1.0}}), {Single({0.0}, {1e-3})});
  const auto obs = Matrix::FromRows({{1e6}});
  const double ll = LogLikelihood(m, obs);
  CHECK_FALSE(std::isnan(ll));
}

TEST_CASE("k-means recovers two separated clusters") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g(0.0, 0.1);
  std::vector<std::vector<double>> rows;
  for (int i = 0; i < 40; ++i) rows.push_back({g(rng) + (i % 2 ? 5.0 : -5.0), g(rng)});
  const auto r = KMeans(Matrix::FromRows(rows), 2, 9);
  CHECK(r.counts[0] == 20);
  CHECK(r.counts[1] == 20);
  for (int i = 0; i < 40; ++i) CHECK(r.assignment[i] == r.assignment[i % 2]);
  CHECK(r.assignment[0] != r.assignment[1]);
  std::vector<double> xs{r.centroids(0, 0), r.centroids(1, 0)};
  std::sort(xs.begin(), xs.end());
  CHECK(xs[0] == doctest::Approx(-5.0).epsilon(0.01));
  CHECK(xs[1] == doctest::Approx(5.0).epsilon(0.01));
}

TEST_CASE("k-means with more clusters than distinct points leaves no cluster empty") {
  const auto pts = Matrix::FromRows({{0.0}, {0.0}, {1.0}, {1.0}, {2.0}});
  const auto r = KMeans(pts, 3, 1);
  for (auto c : r.counts) CHECK(c > 0);
}

TEST_CASE("initial model uses 0.8 self-loops and a final absorbing state") {
  std::mt19937_64 rng(4);
  std::vector<Matrix> seqs{oracle::RandomObs(rng, 30, 2), oracle::RandomObs(rng, 25, 2)};
  const auto m = InitModel(seqs, 3, 2, 1);
  CHECK(m.transitions()(0, 0) == doctest::Approx(0.8));
  CHECK(m.transitions()(0, 1) == doctest::Approx(0.2));
  CHECK(m.transitions()(1, 1) == doctest::Approx(0.8));
  CHECK(m.transitions()(2, 2) == 1.0);
  for (const auto& e : m.emissions()) {
    for (double v : e.variances().data()) CHECK(v >= 1e-3);
  }
}

TEST_CASE("initialization rejects sequences shorter than the state count") {
  std::mt19937_64 rng(4);
  std::vector<Matrix> seqs{oracle::RandomObs(rng, 30, 2), oracle::RandomObs(rng, 2, 2)};
  CHECK_THROWS_AS(InitModel(seqs, 3, 1, 1), Error);
  CHECK_THROWS_AS(InitModel({}, 3, 1, 1), Error);
}

TEST_CASE("baum-welch never lowers the training likelihood") {
  std::mt19937_64 rng(12);
  const auto truth = oracle::RandomModel(rng, 3, 2, 2);
  std::vector<Matrix> seqs;
  for (int i = 0; i < 10; ++i) seqs.push_back(oracle::Sample(truth, 30, rng));
  TrainConfig cfg;
  cfg.max_iterations = 20;
  cfg.rel_loglik_tolerance = 1e-12;
  const auto r = BaumWelch(InitModel(seqs, 3, 2, 1), seqs, cfg);
  REQUIRE(r.loglik_history.size() >= 2);
  for (std::size_t i = 1; i < r.loglik_history.size(); ++i) {
    CHECK(r.loglik_history[i] >= r.loglik_history[i - 1] - 1e-8);
  }
}

TEST_CASE("baum-welch history starts at the initial model") {
  std::mt19937_64 rng(13);
  std::vector<Matrix> seqs{oracle::RandomObs(rng, 20, 2), oracle::RandomObs(rng, 20, 2)};
  const auto init = InitModel(seqs, 2, 1, 1);
  TrainConfig cfg;
  cfg.max_iterations = 3;
  const auto r = BaumWelch(init, seqs, cfg);
  double total = 0.0;
  for (const auto& s : seqs) total += LogLikelihood(init, s);
  CHECK(r.loglik_history.front() == doctest::Approx(total));
  CHECK(r.loglik_history.size() <= 4);
  double final_total = 0.0;
  for (const auto& s : seqs) final_total += LogLikelihood(r.model, s);
  CHECK(final_total == doctest::Approx(r.loglik_history.back()));
}

TEST_CASE("baum-welch recovers a known two-state model") {
  const AcousticHmm truth(Matrix::FromRows({{0.9, 0.1}, {0.0, 1.0}}),
                          {Single({-2.0}, {0.5}), Single({3.0}, {1.0})});
  std::mt19937_64 rng(99);
  std::vector<Matrix> seqs;
  for (int i = 0; i < 60; ++i) seqs.push_back(oracle::Sample(truth, 40, rng));
  TrainConfig cfg;
  cfg.max_iterations = 50;
  const auto r = BaumWelch(InitModel(seqs, 2, 1, 1), seqs, cfg);
  CHECK(r.model.transitions()(0, 0) == doctest::Approx(0.9).epsilon(0.03));
  CHECK(r.model.emission(0).means()(0, 0) == doctest::Approx(-2.0).epsilon(0.05));
  CHECK(r.model.emission(1).means()(0, 0) == doctest::Approx(3.0).epsilon(0.05));
  CHECK(r.model.emission(0).variances()(0, 0) == doctest::Approx(0.5).epsilon(0.15));
  CHECK(r.model.emission(1).variances()(0, 0) == doctest::Approx(1.0).epsilon(0.15));
}

TEST_CASE("identical sequences collapse to floored variances") {
  const auto s = Matrix::FromRows({{1.0}, {1.0}, {1.0}, {1.0}});
  TrainConfig cfg;
  const auto r = BaumWelch(InitModel({s, s}, 2, 1, 1), {s, s}, cfg);
  for (const auto& e : r.model.emissions()) {
    CHECK(e.variances()(0, 0) == doctest::Approx(cfg.variance_floor));
  }
}

TEST_CASE("training is deterministic per seed") {
  std::mt19937_64 rng(21);
  std::vector<Matrix> seqs;
  for (int i = 0; i < 4; ++i) seqs.push_back(oracle::RandomObs(rng, 25, 3));
  TrainConfig cfg;
  const auto a = BaumWelch(InitModel(seqs, 3, 2, 5), seqs, cfg);
  const auto b = BaumWelch(InitModel(seqs, 3, 2, 5), seqs, cfg);
  CHECK(ToJson(a.model) == ToJson(b.model));
  CHECK(a.loglik_history == b.loglik_history);
}

TEST_CASE("train config validation") {
  TrainConfig cfg;
  cfg.max_iterations = 0;
  CHECK_THROWS_AS(cfg.Validate(), Error);
}

TEST_CASE("model json round trip is lossless") {
  std::mt19937_64 rng(31);
  const auto m = oracle::RandomModel(rng, 4, 3, 5);
  const auto j = ToJson(m);
  CHECK(j.at("format_version") == 1);
  CHECK(j.at("num_states") == 4);
  const auto back = AcousticHmmFromJson(nlohmann::json::parse(j.dump()));
  CHECK(back.transitions() == m.transitions());
  for (int s = 0; s < 4; ++s) {
    CHECK(back.emission(s).means() == m.emission(s).means());
    CHECK(back.emission(s).variances() == m.emission(s).variances());
    CHECK(back.emission(s).weights() == m.emission(s).weights());
  }
  const auto obs = oracle::RandomObs(rng, 10, 5);
  CHECK(LogLikelihood(back, obs) == LogLikelihood(m, obs));
}

TEST_CASE("model json with an unknown version is rejected") {
  auto j = ToJson(TwoState());
  j["format_version"] = 7;
  CHECK_THROWS(AcousticHmmFromJson(j));
}
