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

// sphmm-sid: synthetic corpus generation, training, identification and
// evaluation of the two-stage gender/speaker recognizer.

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "sphmm/error.hpp"
#include "sphmm/experiment.hpp"
#include "sphmm/model_bundle.hpp"
#include "sphmm/report.hpp"
#include "sphmm/synth.hpp"
#include "sphmm/wav.hpp"

namespace {

using namespace sphmm;
namespace fs = std::filesystem;

struct Options {
  std::string spec, config, out, models, wav, alphas = "0:1:0.1";
  std::optional<double> alpha;
  std::optional<std::uint64_t> seed;
  bool svg = false;
};

harness::ExperimentConfig LoadConfig(const Options& o) {
  auto config = harness::LoadExperimentConfig(o.config);
  if (o.seed) {
    config.seed = *o.seed;
    config.model.train.seed = *o.seed;
  }
  if (!o.out.empty()) config.output_dir = o.out;
  return config;
}

int GenSynth(const Options& o) {
  auto spec = corpus::SynthSpecFromJson(recog::ReadJsonFile(o.spec));
  if (o.seed) spec.seed = *o.seed;
  const auto records = corpus::GenerateSyntheticCorpus(spec, o.out);
  std::printf("wrote %zu utterances to %s\n", records.size(), o.out.c_str());
  return 0;
}

int Train(const Options& o) {
  const auto config = LoadConfig(o);
  const auto manifest = corpus::LoadManifest(config.manifest_path);
  const auto utterances = harness::LoadUtterances(manifest, config.frontend);
  const auto enrollment = harness::Enroll(utterances, config.model);

  recog::ModelBundle bundle;
  bundle.frontend = config.frontend;
  bundle.model = config.model;
  bundle.alpha = config.alphas.front();
  bundle.gender_alpha = config.gender_alpha.value_or(bundle.alpha);
  bundle.genders = enrollment.genders;
  bundle.speakers = enrollment.speakers;
  recog::SaveBundle(bundle, o.out);
  std::printf("trained 2 gender models and %zu speaker models; checksum %016llx\n",
              bundle.speakers.size(Gender::kMale) + bundle.speakers.size(Gender::kFemale),
              static_cast<unsigned long long>(enrollment.checksum));
  return 0;
}

int IdentifyCmd(const Options& o) {
  const auto bundle = recog::LoadBundle(o.models);
  const auto clip = dsp::ReadWav(o.wav);
  const auto features = dsp::ExtractFeatures(clip, bundle.frontend);
  const double speaker_alpha = o.alpha.value_or(bundle.alpha);
  const double gender_alpha = o.alpha.value_or(bundle.gender_alpha);
  const auto result =
      recog::Identify(bundle.genders, bundle.speakers, features,
                      recog::FusionWeight(gender_alpha), recog::FusionWeight(speaker_alpha));
  nlohmann::json j = {{"wav", o.wav},
                      {"gender", ToString(result.gender)},
                      {"gender_scores", result.gender_scores},
                      {"speaker", result.speaker},
                      {"speaker_scores", result.speaker_scores},
                      {"gender_alpha", result.gender_alpha},
                      {"speaker_alpha", result.speaker_alpha}};
  std::cout << j.dump(2) << "\n";
  return 0;
}

void PrintSummary(const harness::AccuracyReport& r) {
  std::printf("alpha=%.2f", r.alpha);
  for (auto s : harness::kStages) {
    for (auto c : kConditions) {
      const auto& t = r.cell(s, c);
      std::printf("  %s/%s %zu/%zu (%.2f%%)", harness::ToString(s).c_str(), ToString(c).c_str(),
                  t.correct, t.total, t.accuracy_pct());
    }
  }
  std::printf("\n");
}

int Evaluate(const Options& o) {
  auto config = LoadConfig(o);
  if (o.alpha) config.alphas = {*o.alpha};
  const auto report = harness::RunExperiment(config);
  harness::EmitReport({report}, config.output_dir, config.write_svg || o.svg);
  PrintSummary(report);
  return 0;
}

int Sweep(const Options& o) {
  auto config = LoadConfig(o);
  config.alphas = harness::ParseAlphaGrid(o.alphas);
  const auto reports = harness::SweepAlpha(config);
  harness::EmitReport(reports, config.output_dir, config.write_svg || o.svg);
  for (const auto& r : reports) PrintSummary(r);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Gender-dependent speaker identification with suprasegmental HMMs"};
  app.require_subcommand(1);
  Options o;

  auto* gen = app.add_subcommand("gen-synth", "Render the synthetic neutral/shouted corpus");
  gen->add_option("--spec", o.spec, "Synthesis spec (JSON)")->required()->check(CLI::ExistingFile);
  gen->add_option("--out", o.out, "Output directory")->required();
  gen->add_option("--seed", o.seed, "Override the spec seed");

  auto* train = app.add_subcommand("train", "Enroll gender and speaker models");
  train->add_option("--config", o.config, "Experiment config (JSON)")
      ->required()
      ->check(CLI::ExistingFile);
  train->add_option("--out", o.out, "Model bundle directory")->required();
  train->add_option("--seed", o.seed, "Training seed");

  auto* ident = app.add_subcommand("identify", "Identify the gender and speaker of one WAV");
  ident->add_option("--models", o.models, "Model bundle directory")
      ->required()
      ->check(CLI::ExistingDirectory);
  ident->add_option("--wav", o.wav, "Mono WAV file")->required()->check(CLI::ExistingFile);
  ident->add_option("--alpha", o.alpha, "Fusion weight for both stages")
      ->check(CLI::Range(0.0, 1.0));

  auto* eval = app.add_subcommand("evaluate", "Run the protocol at one alpha");
  eval->add_option("--config", o.config, "Experiment config (JSON)")
      ->required()
      ->check(CLI::ExistingFile);
  eval->add_option("--out", o.out, "Report directory (overrides the config)");
  eval->add_option("--alpha", o.alpha, "Fusion weight (overrides the config)")
      ->check(CLI::Range(0.0, 1.0));
  eval->add_option("--seed", o.seed, "Training seed");
  eval->add_flag("--svg", o.svg, "Also write sweep.svg");

  auto* sweep = app.add_subcommand("sweep-alpha", "Run the protocol over a grid of alphas");
  sweep->add_option("--config", o.config, "Experiment config (JSON)")
      ->required()
      ->check(CLI::ExistingFile);
  sweep->add_option("--alphas", o.alphas, "Grid lo:hi:step")->capture_default_str();
  sweep->add_option("--out", o.out, "Report directory (overrides the config)");
  sweep->add_option("--seed", o.seed, "Training seed");
  sweep->add_flag("--svg", o.svg, "Also write sweep.svg");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  try {
    if (*gen) return GenSynth(o);
    if (*train) return Train(o);
    if (*ident) return IdentifyCmd(o);
    if (*eval) return Evaluate(o);
    if (*sweep) return Sweep(o);
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return ExitCodeFor(e.kind());
  } catch (const nlohmann::json::exception& e) {
    std::fprintf(stderr, "error: malformed JSON: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 1;
}
