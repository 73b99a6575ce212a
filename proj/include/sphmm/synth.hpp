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
#include <filesystem>
#include <vector>

#include "json.hpp"
#include "sphmm/frontend.hpp"
#include "sphmm/manifest.hpp"

namespace sphmm::corpus {

struct ShoutTransform {
  double f0_factor = 1.5;
  double energy_db = 6.0;
  double duration_factor = 0.85;
  double tilt_db_per_octave = 3.0;
};

// Recipe for a seeded neutral/shouted corpus. Speakers share the sentence
// inventory; every (speaker, sentence, condition) gets train_reps training
// and test_reps test renditions.
struct SynthSpec {
  int speakers_per_gender = 10;
  int sentences = 4;
  int train_reps = 5;
  int test_reps = 4;
  std::array<double, 2> male_f0_range{100.0, 140.0};
  std::array<double, 2> female_f0_range{185.0, 250.0};
  std::uint64_t envelope_seed = 17;
  ShoutTransform shout;
  int sample_rate = 12000;
  std::uint64_t seed = 20240607;

  // Throws unless counts are positive and the F0 ranges (including shouted
  // renditions) stay inside [f0_min, f0_max].
  void Validate(double f0_min = 60.0, double f0_max = 500.0) const;
  std::size_t num_utterances() const;
};

nlohmann::json ToJson(const SynthSpec& spec);
SynthSpec SynthSpecFromJson(const nlohmann::json& j);

// Everything needed to render one utterance. Time inside the utterance is
// normalized to u in [0, 1]: three voiced syllables separated by two
// unvoiced (noise) gaps.
struct UtteranceParams {
  int sample_rate = 12000;
  double duration_s = 1.0;
  double f0_hz = 120.0;
  double f0_excursion = 1.0;                // scales f0_shape
  std::vector<double> f0_shape{0.0, 0.0};   // log-F0 offsets at evenly spaced u
  std::array<double, 3> formants_hz{500.0, 1500.0, 2500.0};
  std::array<double, 3> bandwidths_hz{70.0, 110.0, 160.0};
  std::array<double, 3> syllable_weights{1.0, 1.0, 1.0};
  double gap_fraction = 0.08;               // each gap's share of the duration
  double amplitude_depth = 0.5;             // within-syllable loudness swing
  double gain_db = 0.0;
  double tilt_db_per_octave = 0.0;
  double gap_level_db = -14.0;              // unvoiced gaps relative to voiced
  double aspiration_db = -3.0;              // breath noise through the envelope
  double noise_std = 2e-4;                  // background noise
  std::uint64_t noise_seed = 1;
};

// Applies the shout transform to the parameters, not to a waveform.
UtteranceParams ApplyShout(UtteranceParams neutral, const ShoutTransform& shout);

dsp::AudioClip RenderUtterance(const UtteranceParams& params);

struct SynthUtterance {
  UtteranceRecord record;
  UtteranceParams params;
};

// Parameters and manifest rows for the whole corpus, in manifest order.
// Audio paths are "wav/<id>.wav".
std::vector<SynthUtterance> PlanSyntheticCorpus(const SynthSpec& spec);

// Renders the corpus into out_dir (wav/ plus manifest.csv and the spec as
// synth_spec.json) and returns the manifest rows.
std::vector<UtteranceRecord> GenerateSyntheticCorpus(const SynthSpec& spec,
                                                     const std::filesystem::path& out_dir);

}  // namespace sphmm::corpus
