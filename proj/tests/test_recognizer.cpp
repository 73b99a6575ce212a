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
#include <filesystem>
#include <random>

#include "sphmm/error.hpp"
#include "sphmm/model_bundle.hpp"
#include "sphmm/recognizer.hpp"

using namespace sphmm;
using namespace sphmm::recog;

namespace {

ModelConfig Tiny() {
  ModelConfig c;
  c.num_states = 3;
  c.num_mixtures = 1;
  c.train.max_iterations = 8;
  return c;
}

// Fabricated features: three phases whose cepstra depend on the speaker and
// whose f0 depends on the gender.
dsp::FeatureBundle Fake(int speaker, Gender g, std::mt19937_64& rng, double shift = 0.0) {
  std::normal_distribution<double> n(0.0, 0.25);
  std::uniform_int_distribution<int> len(10, 14);
  dsp::FeatureBundle f;
  const double base_f0 = (g == Gender::kMale ? 110.0 : 220.0) * (1.0 + 0.03 * speaker);
  std::vector<std::array<double, 3>> rows;
  for (int p = 0; p < 3; ++p) {
    const int l = len(rng);
    for (int i = 0; i < l; ++i) {
      rows.push_back({1.5 * p + 0.8 * speaker + shift + n(rng),
                      (g == Gender::kMale ? -2.0 : 2.0) + n(rng), 0.5 * p + n(rng)});
      f.f0.push_back(base_f0 * std::exp(0.1 * p + 0.02 * n(rng)));
      f.log_energy.push_back(-3.0 + 0.2 * p + 0.1 * n(rng));
    }
  }
  f.mfcc = Matrix(rows.size(), 3);
  for (std::size_t t = 0; t < rows.size(); ++t) {
    for (int d = 0; d < 3; ++d) f.mfcc(t, d) = rows[t][d];
    f.frame_times.push_back(0.01 * double(t));
  }
  return f;
}

std::string Name(Gender g, int s) { return ToString(g) + std::to_string(s); }

std::vector<LabeledUtterance> Corpus(int speakers, int reps, std::uint64_t seed,
                                     bool with_shouted = true) {
  std::mt19937_64 rng(seed);
  std::vector<LabeledUtterance> out;
  for (Gender g : kGenders) {
    for (int s = 0; s < speakers; ++s) {
      for (Condition c : kConditions) {
        if (c == Condition::kShouted && !with_shouted) continue;
        for (int r = 0; r < reps + 2; ++r) {
          LabeledUtterance u;
          u.speaker_id = Name(g, s);
          u.id = u.speaker_id + "_" + ToString(c) + "_" + std::to_string(r);
          u.gender = g;
          u.sentence_id = "s1";
          u.condition = c;
          u.session = r < reps ? Session::kTrain : Session::kTest;
          u.features = Fake(s, g, rng, c == Condition::kShouted ? 0.6 : 0.0);
          out.push_back(std::move(u));
        }
      }
    }
  }
  return out;
}

}  // namespace

TEST_CASE("argmax picks the larger score") {
  CHECK(ArgmaxFirst(std::vector<double>{-120.0, -115.0}) == 1);
}

TEST_CASE("argmax ties go to the first index") {
  CHECK(ArgmaxFirst(std::vector<double>{-3.0, -1.0, -1.0}) == 1);
  CHECK(ArgmaxFirst(std::vector<double>{-2.0, -2.0}) == 0);
}

TEST_CASE("argmax rejects NaN and empty input") {
  CHECK_THROWS_AS(ArgmaxFirst(std::vector<double>{-1.0, std::nan("")}), Error);
  CHECK_THROWS_AS(ArgmaxFirst(std::vector<double>{}), Error);
}

TEST_CASE("model config validation and json") {
  ModelConfig c;
  c.num_states = 8;
  CHECK_THROWS_AS(c.Validate(), Error);
  c = Tiny();
  c.train.seed = 42;
  const auto back = ModelConfigFromJson(ToJson(c));
  CHECK(back.num_states == 3);
  CHECK(back.num_mixtures == 1);
  CHECK(back.train.seed == 42);
  CHECK(ToJson(back) == ToJson(c));
}

TEST_CASE("minimal corpus trains two serializable gender models") {
  std::mt19937_64 rng(1);
  std::vector<LabeledUtterance> corpus(2);
  corpus[0].gender = Gender::kMale;
  corpus[0].features = Fake(0, Gender::kMale, rng);
  corpus[1].gender = Gender::kFemale;
  corpus[1].features = Fake(0, Gender::kFemale, rng);
  const auto set = EnrollGender(corpus, Tiny());
  CHECK(set.male.label != set.female.label);
  const auto back = GenderModelSetFromJson(nlohmann::json::parse(ToJson(set).dump()));
  CHECK(ToJson(back) == ToJson(set));
}

TEST_CASE("missing gender is named in the error") {
  auto corpus = Corpus(1, 2, 2);
  std::erase_if(corpus, [](const auto& u) { return u.gender == Gender::kFemale; });
  try {
    EnrollGender(corpus, Tiny());
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kData);
    CHECK(std::string(e.what()).find("gender F") != std::string::npos);
  }
}

TEST_CASE("gender models pool both conditions of the training session") {
  const auto corpus = Corpus(3, 5, 3);
  EnrollmentCounts counts;
  EnrollGender(corpus, Tiny(), &counts);
  CHECK(counts.size() == 2);
  for (const auto& [label, n] : counts) CHECK(n == 2 * 5 * 3);
}

TEST_CASE("speaker models use neutral training rows only") {
  const auto corpus = Corpus(3, 5, 4);
  EnrollmentCounts counts;
  const auto reg = EnrollSpeakers(corpus, Tiny(), &counts);
  CHECK(reg.size(Gender::kMale) == 3);
  CHECK(reg.size(Gender::kFemale) == 3);
  CHECK(counts.size() == 6);
  for (const auto& [label, n] : counts) CHECK(n == 5);
  for (int s = 0; s < 3; ++s) CHECK(reg.at(Gender::kFemale)[s].label == Name(Gender::kFemale, s));
}

TEST_CASE("one speaker with five neutral utterances") {
  auto corpus = Corpus(1, 5, 5);
  std::erase_if(corpus, [](const auto& u) { return u.gender == Gender::kFemale; });
  const auto reg = EnrollSpeakers(corpus, Tiny());
  CHECK(reg.size(Gender::kMale) == 1);
  CHECK(reg.size(Gender::kFemale) == 0);
}

TEST_CASE("speaker without neutral training rows is rejected") {
  auto corpus = Corpus(2, 3, 6);
  std::erase_if(corpus, [](const auto& u) {
    return u.speaker_id == "M1" && u.condition == Condition::kNeutral;
  });
  CHECK_THROWS_AS(EnrollSpeakers(corpus, Tiny()), Error);
}

TEST_CASE("identical gender models resolve to the male label") {
  std::mt19937_64 rng(7);
  std::vector<LabeledUtterance> corpus(2);
  corpus[0].features = Fake(0, Gender::kMale, rng);
  corpus[1] = corpus[0];
  corpus[1].gender = Gender::kFemale;
  auto set = EnrollGender(corpus, Tiny());
  set.female.acoustic = set.male.acoustic;
  set.female.supra = set.male.supra;
  const auto d = IdentifyGender(set, corpus[0].features, FusionWeight(0.5));
  CHECK(d.scores[0] == d.scores[1]);
  CHECK(d.gender == Gender::kMale);
}

TEST_CASE("trained system recognizes its own training data") {
  const auto corpus = Corpus(4, 4, 8, false);
  const auto genders = EnrollGender(corpus, Tiny());
  const auto reg = EnrollSpeakers(corpus, Tiny());
  int correct = 0, total = 0;
  for (const auto& u : corpus) {
    if (u.session != Session::kTrain) continue;
    const auto r = Identify(genders, reg, u.features, FusionWeight(0.5));
    ++total;
    correct += r.gender == u.gender && r.speaker == u.speaker_id;
  }
  CHECK(double(correct) >= 0.99 * total);
}

TEST_CASE("speaker stage searches only the identified gender") {
  const auto corpus = Corpus(3, 3, 9);
  auto reg = EnrollSpeakers(corpus, Tiny());
  reg.by_gender[1].pop_back();
  const auto genders = EnrollGender(corpus, Tiny());
  for (const auto& u : corpus) {
    if (u.session != Session::kTest) continue;
    const auto r = Identify(genders, reg, u.features, FusionWeight(0.4));
    CHECK(r.speaker_scores.size() == reg.size(r.gender));
    const auto& pool = reg.at(r.gender);
    const bool listed = std::any_of(pool.begin(), pool.end(),
                                    [&](const auto& p) { return p.label == r.speaker; });
    CHECK(listed);
    CHECK(r.gender_scores[Index(r.gender)] ==
          *std::max_element(r.gender_scores.begin(), r.gender_scores.end()));
    CHECK(r.speaker_scores[ArgmaxFirst(r.speaker_scores)] ==
          *std::max_element(r.speaker_scores.begin(), r.speaker_scores.end()));
  }
}

TEST_CASE("registry with one speaker returns that speaker") {
  const auto corpus = Corpus(2, 3, 10);
  auto reg = EnrollSpeakers(corpus, Tiny());
  reg.by_gender[0].resize(1);
  const auto r = IdentifySpeaker(reg, Gender::kMale, corpus.front().features, FusionWeight(0.5));
  CHECK(r.speaker == reg.at(Gender::kMale)[0].label);
  CHECK(r.scores.size() == 1);
}

TEST_CASE("empty gender in the registry is an error") {
  SpeakerRegistry reg;
  std::mt19937_64 rng(1);
  CHECK_THROWS_AS(IdentifySpeaker(reg, Gender::kFemale, Fake(0, Gender::kFemale, rng),
                                  FusionWeight(0.5)),
                  Error);
}

TEST_CASE("precomputed decisions agree with direct identification") {
  const auto corpus = Corpus(3, 3, 11);
  const auto genders = EnrollGender(corpus, Tiny());
  const auto reg = EnrollSpeakers(corpus, Tiny());
  for (const auto& u : corpus) {
    if (u.session != Session::kTest) continue;
    const auto scores = ScoreAllCandidates(genders, reg, u.features);
    for (double a : {0.0, 0.1, 0.5, 0.9, 1.0}) {
      const auto direct = Identify(genders, reg, u.features, FusionWeight(a));
      const auto fast = Decide(scores, reg, FusionWeight(a), FusionWeight(a));
      CHECK(direct.gender == fast.gender);
      CHECK(direct.speaker == fast.speaker);
      CHECK(direct.gender_scores == fast.gender_scores);
      CHECK(direct.speaker_scores == fast.speaker_scores);
    }
  }
}

TEST_CASE("separate gender and speaker weights are honoured") {
  const auto corpus = Corpus(2, 3, 12);
  const auto genders = EnrollGender(corpus, Tiny());
  const auto reg = EnrollSpeakers(corpus, Tiny());
  const auto& f = corpus.back().features;
  const auto r = Identify(genders, reg, f, FusionWeight(0.0), FusionWeight(1.0));
  CHECK(r.gender_alpha == 0.0);
  CHECK(r.speaker_alpha == 1.0);
  CHECK(r.gender_scores[0] == hmm::LogLikelihood(genders.male.acoustic, f.mfcc));
  const auto& spk = reg.at(r.gender);
  for (std::size_t i = 0; i < spk.size(); ++i) {
    CHECK(r.speaker_scores[i] == supra::LogLikelihoodSupra(spk[i].supra, spk[i].acoustic, f).log_likelihood);
  }
}

TEST_CASE("a constant added to every candidate leaves the labels unchanged") {
  const auto corpus = Corpus(3, 3, 13);
  const auto genders = EnrollGender(corpus, Tiny());
  const auto reg = EnrollSpeakers(corpus, Tiny());
  for (const auto& u : corpus) {
    if (u.session != Session::kTest) continue;
    auto scores = ScoreAllCandidates(genders, reg, u.features);
    const auto before = Decide(scores, reg, FusionWeight(0.5), FusionWeight(0.5));
    for (auto& c : scores.gender) c.acoustic += 1000.0, c.supra += 1000.0;
    for (auto& v : scores.speakers) {
      for (auto& c : v) c.acoustic -= 250.0, c.supra -= 250.0;
    }
    const auto after = Decide(scores, reg, FusionWeight(0.5), FusionWeight(0.5));
    CHECK(before.gender == after.gender);
    CHECK(before.speaker == after.speaker);
  }
}

TEST_CASE("speaker accuracy never exceeds gender accuracy") {
  const auto corpus = Corpus(3, 3, 14);
  const auto genders = EnrollGender(corpus, Tiny());
  const auto reg = EnrollSpeakers(corpus, Tiny());
  for (double a : {0.0, 0.5, 1.0}) {
    int g_ok = 0, s_ok = 0;
    for (const auto& u : corpus) {
      if (u.session != Session::kTest) continue;
      const auto r = Identify(genders, reg, u.features, FusionWeight(a));
      g_ok += r.gender == u.gender;
      s_ok += r.speaker == u.speaker_id;
    }
    CHECK(s_ok <= g_ok);
  }
}

TEST_CASE("bundle save and load reproduce every score") {
  const auto corpus = Corpus(2, 3, 15);
  ModelBundle b;
  b.model = Tiny();
  b.alpha = 0.3;
  b.gender_alpha = 0.6;
  b.genders = EnrollGender(corpus, b.model);
  b.speakers = EnrollSpeakers(corpus, b.model);
  const auto dir = std::filesystem::temp_directory_path() / "sphmm_test_bundle";
  std::filesystem::remove_all(dir);
  SaveBundle(b, dir);
  const auto back = LoadBundle(dir);
  CHECK(back.alpha == 0.3);
  CHECK(back.gender_alpha == 0.6);
  CHECK(ModelChecksum(back.genders, back.speakers) == ModelChecksum(b.genders, b.speakers));
  for (const auto& u : corpus) {
    const auto x = ScoreAllCandidates(b.genders, b.speakers, u.features);
    const auto y = ScoreAllCandidates(back.genders, back.speakers, u.features);
    for (int g = 0; g < 2; ++g) {
      CHECK(x.gender[g].acoustic == y.gender[g].acoustic);
      CHECK(x.gender[g].supra == y.gender[g].supra);
      for (std::size_t i = 0; i < x.speakers[g].size(); ++i) {
        CHECK(x.speakers[g][i].acoustic == y.speakers[g][i].acoustic);
        CHECK(x.speakers[g][i].supra == y.speakers[g][i].supra);
      }
    }
  }
  std::filesystem::remove_all(dir);
}

TEST_CASE("bundle labels must be safe file names") {
  ModelBundle b;
  b.model = Tiny();
  const auto corpus = Corpus(1, 2, 16);
  b.genders = EnrollGender(corpus, b.model);
  b.speakers = EnrollSpeakers(corpus, b.model);
  b.speakers.by_gender[0][0].label = "../evil";
  CHECK_THROWS_AS(SaveBundle(b, std::filesystem::temp_directory_path() / "sphmm_bad_bundle"), Error);
}
