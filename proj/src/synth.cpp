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

#include "sphmm/synth.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <fstream>
#include <numbers>
#include <random>

#include "sphmm/error.hpp"
#include "sphmm/parallel.hpp"
#include "sphmm/wav.hpp"

namespace sphmm::corpus {
namespace {

constexpr double kVoicedRms = 0.04;
constexpr double kMinRenderF0 = 62.0;
constexpr double kMaxRenderF0 = 490.0;
constexpr double kFemaleFormantScale = 1.18;
// Gap noise band, as a fraction of the sample rate and in Hz.
constexpr double kFricativeCenter = 0.33;
constexpr double kFricativeBandwidth = 2000.0;
constexpr std::array<double, 3> kMaleFormants{520.0, 1480.0, 2500.0};

std::uint64_t Fnv1a(const std::string& s) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::mt19937_64 Stream(std::uint64_t a, std::uint64_t b, std::uint64_t c = 0) {
  std::seed_seq seq{static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(a >> 32),
                    static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32),
                    static_cast<std::uint32_t>(c), static_cast<std::uint32_t>(c >> 32)};
  return std::mt19937_64(seq);
}

double Uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

double Normal(std::mt19937_64& rng, double sd) {
  return std::normal_distribution<double>(0.0, sd)(rng);
}

// Magnitude of a resonator pole pair, unity at DC.
double ResonanceGain(double f, double center, double bandwidth) {
  const double b2 = 0.25 * bandwidth * bandwidth;
  const double num = center * center + b2;
  const double den = std::sqrt(((f - center) * (f - center) + b2) * ((f + center) * (f + center) + b2));
  return num / den;
}

struct SpeakerStyle {
  std::string id;
  Gender gender;
  double f0_hz;
  double excursion;
  std::array<double, 3> formants;
  std::array<double, 3> syllable_weights;
  double gap_fraction;
  double amplitude_depth;
  double tempo;
};

struct SentenceStyle {
  std::string id;
  std::vector<double> f0_shape;
  double duration_s;
};

SpeakerStyle MakeSpeaker(const SynthSpec& spec, Gender g, int index) {
  SpeakerStyle s;
  s.gender = g;
  char buf[16];
  std::snprintf(buf, sizeof buf, "%s%02d", ToString(g).c_str(), index + 1);
  s.id = buf;

  auto env = Stream(spec.envelope_seed, Fnv1a(s.id), 1);
  const double scale = g == Gender::kFemale ? kFemaleFormantScale : 1.0;
  for (int k = 0; k < 3; ++k) s.formants[k] = kMaleFormants[k] * scale * Uniform(env, 0.9, 1.1);

  auto pros = Stream(spec.seed, Fnv1a(s.id), 2);
  const auto& range = g == Gender::kMale ? spec.male_f0_range : spec.female_f0_range;
  s.f0_hz = std::exp(Uniform(pros, std::log(range[0]), std::log(range[1])));
  s.excursion = Uniform(pros, 0.4, 1.6);
  for (auto& w : s.syllable_weights) w = Uniform(pros, 0.6, 1.4);
  s.gap_fraction = Uniform(pros, 0.08, 0.16);
  s.amplitude_depth = Uniform(pros, 0.15, 0.85);
  s.tempo = Uniform(pros, 0.85, 1.15);
  return s;
}

SentenceStyle MakeSentence(const SynthSpec& spec, int index) {
  SentenceStyle s;
  s.id = "s" + std::to_string(index + 1);
  auto rng = Stream(spec.seed, Fnv1a(s.id), 3);
  constexpr int kPoints = 7;
  for (int i = 0; i < kPoints; ++i) {
    const double declination = 0.08 - 0.16 * i / (kPoints - 1);
    s.f0_shape.push_back(std::clamp(declination + Normal(rng, 0.03), -0.15, 0.15));
  }
  s.duration_s = Uniform(rng, 0.9, 1.2);
  return s;
}

UtteranceParams NeutralParams(const SynthSpec& spec, const SpeakerStyle& spk,
                              const SentenceStyle& sent, int rep) {
  auto rng = Stream(spec.seed, Fnv1a(spk.id + "/" + sent.id), 100 + rep);
  UtteranceParams p;
  p.sample_rate = spec.sample_rate;
  p.duration_s = sent.duration_s * spk.tempo * std::exp(Normal(rng, 0.04));
  p.f0_hz = spk.f0_hz * std::exp(Normal(rng, 0.08));
  p.f0_excursion = spk.excursion;
  p.f0_shape = sent.f0_shape;
  for (int k = 0; k < 3; ++k) p.formants_hz[k] = spk.formants[k] * std::exp(Normal(rng, 0.015));
  for (int k = 0; k < 3; ++k) {
    p.syllable_weights[k] = spk.syllable_weights[k] * std::exp(Normal(rng, 0.05));
  }
  p.gap_fraction = spk.gap_fraction;
  p.amplitude_depth = spk.amplitude_depth;
  p.gain_db = Normal(rng, 3.0);
  p.noise_seed = rng();
  return p;
}

}  // namespace

void SynthSpec::Validate(double f0_min, double f0_max) const {
  if (speakers_per_gender < 1 || sentences < 1) {
    ThrowUsage("synth spec: need at least one speaker per gender and one sentence");
  }
  if (train_reps < 1 || test_reps < 1) ThrowUsage("synth spec: reps must be >= 1");
  if (sample_rate < 4000) ThrowUsage("synth spec: sample_rate must be >= 4000 Hz");
  for (const auto* r : {&male_f0_range, &female_f0_range}) {
    if (!((*r)[0] > 0.0 && (*r)[0] <= (*r)[1])) ThrowUsage("synth spec: invalid F0 range");
    if ((*r)[0] < f0_min || (*r)[1] * shout.f0_factor > f0_max) {
      ThrowUsage("synth spec: F0 range (with shouted factor) leaves [" +
                 std::to_string(f0_min) + ", " + std::to_string(f0_max) + "] Hz");
    }
  }
  if (!(shout.f0_factor > 0.0 && shout.duration_factor > 0.0)) {
    ThrowUsage("synth spec: shout factors must be positive");
  }
}

std::size_t SynthSpec::num_utterances() const {
  return std::size_t(2) * speakers_per_gender * sentences * (train_reps + test_reps) * 2;
}

nlohmann::json ToJson(const SynthSpec& s) {
  return {{"speakers_per_gender", s.speakers_per_gender},
          {"sentences", s.sentences},
          {"train_reps", s.train_reps},
          {"test_reps", s.test_reps},
          {"base_f0_ranges", {{"M", s.male_f0_range}, {"F", s.female_f0_range}}},
          {"envelope_seed", s.envelope_seed},
          {"shout_transform",
           {{"f0_factor", s.shout.f0_factor},
            {"energy_db", s.shout.energy_db},
            {"duration_factor", s.shout.duration_factor},
            {"tilt_db_per_octave", s.shout.tilt_db_per_octave}}},
          {"sample_rate", s.sample_rate},
          {"seed", s.seed}};
}

SynthSpec SynthSpecFromJson(const nlohmann::json& j) {
  if (!j.is_object()) ThrowUsage("synth spec: expected a JSON object");
  SynthSpec s;
  try {
    s.speakers_per_gender = j.value("speakers_per_gender", s.speakers_per_gender);
    s.sentences = j.value("sentences", s.sentences);
    s.train_reps = j.value("train_reps", s.train_reps);
    s.test_reps = j.value("test_reps", s.test_reps);
    if (j.contains("base_f0_ranges")) {
      const auto& r = j.at("base_f0_ranges");
      if (r.contains("M")) s.male_f0_range = r.at("M").get<std::array<double, 2>>();
      if (r.contains("F")) s.female_f0_range = r.at("F").get<std::array<double, 2>>();
    }
    s.envelope_seed = j.value("envelope_seed", s.envelope_seed);
    if (j.contains("shout_transform")) {
      const auto& t = j.at("shout_transform");
      s.shout.f0_factor = t.value("f0_factor", s.shout.f0_factor);
      s.shout.energy_db = t.value("energy_db", s.shout.energy_db);
      s.shout.duration_factor = t.value("duration_factor", s.shout.duration_factor);
      s.shout.tilt_db_per_octave = t.value("tilt_db_per_octave", s.shout.tilt_db_per_octave);
    }
    s.sample_rate = j.value("sample_rate", s.sample_rate);
    s.seed = j.value("seed", s.seed);
  } catch (const nlohmann::json::exception& e) {
    ThrowUsage(std::string("synth spec: ") + e.what());
  }
  s.Validate();
  return s;
}

UtteranceParams ApplyShout(UtteranceParams p, const ShoutTransform& shout) {
  p.f0_hz *= shout.f0_factor;
  p.gain_db += shout.energy_db;
  p.duration_s *= shout.duration_factor;
  p.tilt_db_per_octave += shout.tilt_db_per_octave;
  return p;
}

dsp::AudioClip RenderUtterance(const UtteranceParams& p) {
  if (p.sample_rate <= 0 || !(p.duration_s > 0.0)) ThrowUsage("RenderUtterance: bad geometry");
  if (p.f0_shape.empty()) ThrowUsage("RenderUtterance: empty F0 shape");
  if (!(p.gap_fraction >= 0.0 && p.gap_fraction < 0.3)) {
    ThrowUsage("RenderUtterance: gap_fraction must lie in [0, 0.3)");
  }
  const double rate = p.sample_rate;
  const std::size_t n = static_cast<std::size_t>(std::lround(p.duration_s * rate));
  dsp::AudioClip clip;
  clip.sample_rate = p.sample_rate;
  clip.samples.assign(n, 0.0);

  // Syllable boundaries in normalized time.
  const double wsum = p.syllable_weights[0] + p.syllable_weights[1] + p.syllable_weights[2];
  const double voiced_total = 1.0 - 2.0 * p.gap_fraction;
  std::array<double, 3> begin{}, end{};
  double u = 0.0;
  for (int k = 0; k < 3; ++k) {
    begin[k] = u;
    u += voiced_total * p.syllable_weights[k] / wsum;
    end[k] = u;
    u += p.gap_fraction;
  }

  const double gain = std::pow(10.0, p.gain_db / 20.0);
  const double ramp = 0.01 * rate / double(n);  // 10 ms edges, normalized
  const double nyquist = 0.5 * rate;
  const std::size_t block = 32;

  std::mt19937_64 rng(p.noise_seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<double> amps;
  double phase = 0.0;
  // Two-pole resonator shaping the gap noise into a high, narrow band.
  const double fr_r = std::exp(-std::numbers::pi * kFricativeBandwidth / rate);
  const double fr_c = 2.0 * fr_r * std::cos(2.0 * std::numbers::pi * kFricativeCenter);
  const double fr_r2 = fr_r * fr_r;
  const double fr_norm =
      std::sqrt((1.0 - fr_r2) * ((1.0 + fr_r2) * (1.0 + fr_r2) - fr_c * fr_c) / (1.0 + fr_r2));
  double y1 = 0.0, y2 = 0.0;

  // Aspiration: white noise through a 200 Hz one-pole lowpass and the three
  // resonances, scaled to aspiration_db below the voiced level.
  struct Resonator {
    double c, r2, g, y1 = 0.0, y2 = 0.0;
    double Step(double x) {
      const double y = g * x + c * y1 - r2 * y2;
      y2 = y1;
      y1 = y;
      return y;
    }
  };
  const double lp_a = std::exp(-2.0 * std::numbers::pi * 200.0 / rate);
  auto make_tract = [&] {
    std::array<Resonator, 3> tract{};
    for (int k = 0; k < 3; ++k) {
      const double r = std::exp(-std::numbers::pi * p.bandwidths_hz[k] / rate);
      const double c = 2.0 * r * std::cos(2.0 * std::numbers::pi * p.formants_hz[k] / rate);
      tract[k] = Resonator{c, r * r, 1.0 - c + r * r};
    }
    return tract;
  };
  auto tract = make_tract();
  double lp = 0.0;
  double asp_norm = 0.0;
  {
    auto probe = make_tract();
    std::mt19937_64 probe_rng(0x9e3779b97f4a7c15ull);
    double probe_lp = 0.0, acc = 0.0;
    constexpr int kBurn = 1024, kProbe = 8192;
    for (int i = 0; i < kBurn + kProbe; ++i) {
      probe_lp = gauss(probe_rng) + lp_a * probe_lp;
      double v = probe_lp;
      for (auto& res : probe) v = res.Step(v);
      if (i >= kBurn) acc += v * v;
    }
    asp_norm = kVoicedRms * std::pow(10.0, p.aspiration_db / 20.0) / std::sqrt(acc / kProbe);
  }

  for (std::size_t start = 0; start < n; start += block) {
    const std::size_t stop = std::min(n, start + block);
    const double uc = (0.5 * double(start + stop)) / double(n);
    // F0 from the piecewise-linear shape.
    const double pos = uc * double(p.f0_shape.size() - 1);
    const std::size_t i0 = std::min<std::size_t>(static_cast<std::size_t>(pos), p.f0_shape.size() - 1);
    const std::size_t i1 = std::min(i0 + 1, p.f0_shape.size() - 1);
    const double frac = pos - double(i0);
    const double offset = (1.0 - frac) * p.f0_shape[i0] + frac * p.f0_shape[i1];
    const double f0 = std::clamp(p.f0_hz * std::exp(p.f0_excursion * offset), kMinRenderF0,
                                 kMaxRenderF0);

    // Harmonic amplitudes: 1/h source, three resonances, spectral tilt,
    // normalized so the voiced power is fixed by gain and envelope only.
    const int harmonics = static_cast<int>(0.95 * nyquist / f0);
    amps.assign(harmonics, 0.0);
    double power = 0.0;
    for (int h = 1; h <= harmonics; ++h) {
      const double f = h * f0;
      double a = 1.0 / h;
      for (int k = 0; k < 3; ++k) a *= ResonanceGain(f, p.formants_hz[k], p.bandwidths_hz[k]);
      a *= std::pow(10.0, p.tilt_db_per_octave * std::log2(f / 500.0) / 20.0);
      amps[h - 1] = a;
      power += 0.5 * a * a;
    }
    const double norm = power > 0.0 ? kVoicedRms / std::sqrt(power) : 0.0;
    const double dphi = 2.0 * std::numbers::pi * f0 / rate;

    for (std::size_t t = start; t < stop; ++t) {
      const double ut = double(t) / double(n);
      phase += dphi;
      if (phase > 2.0 * std::numbers::pi) phase -= 2.0 * std::numbers::pi;

      int syl = -1;
      for (int k = 0; k < 3; ++k) {
        if (ut >= begin[k] && ut < end[k]) syl = k;
      }
      double sample = 0.0;
      const double noise = gauss(rng);
      lp = gauss(rng) + lp_a * lp;
      double breath = lp;
      for (auto& res : tract) breath = res.Step(breath);
      if (syl >= 0) {
        const double v = (ut - begin[syl]) / (end[syl] - begin[syl]);
        double env = (1.0 - p.amplitude_depth) + p.amplitude_depth * std::sin(std::numbers::pi * v);
        const double edge = std::min(ut - begin[syl], end[syl] - ut);
        if (edge < ramp) env *= edge / ramp;
        const std::complex<double> z(std::cos(phase), std::sin(phase));
        std::complex<double> zh = z;
        double s = 0.0;
        for (int h = 0; h < harmonics; ++h) {
          s += amps[h] * zh.imag();
          zh *= z;
        }
        sample = gain * env * (norm * s + asp_norm * breath);
      } else {
        const double level = gain * kVoicedRms * std::pow(10.0, p.gap_level_db / 20.0);
        sample = level * fr_norm * y1;
      }
      const double y = noise + fr_c * y1 - fr_r * fr_r * y2;
      y2 = y1;
      y1 = y;
      clip.samples[t] = std::clamp(sample + p.noise_std * gauss(rng), -1.0, 1.0);
    }
  }
  return clip;
}

std::vector<SynthUtterance> PlanSyntheticCorpus(const SynthSpec& spec) {
  spec.Validate();
  std::vector<SentenceStyle> sentences;
  for (int s = 0; s < spec.sentences; ++s) sentences.push_back(MakeSentence(spec, s));

  std::vector<SynthUtterance> plan;
  plan.reserve(spec.num_utterances());
  for (Gender g : kGenders) {
    for (int i = 0; i < spec.speakers_per_gender; ++i) {
      const SpeakerStyle spk = MakeSpeaker(spec, g, i);
      for (const auto& sent : sentences) {
        for (Condition c : kConditions) {
          for (int rep = 0; rep < spec.train_reps + spec.test_reps; ++rep) {
            UtteranceParams params = NeutralParams(spec, spk, sent, rep);
            if (c == Condition::kShouted) {
              params = ApplyShout(params, spec.shout);
              params.noise_seed ^= 0x5bd1e995u;
            }
            char id[96];
            std::snprintf(id, sizeof id, "%s_%s_%s_r%02d", spk.id.c_str(), sent.id.c_str(),
                          ToString(c).c_str(), rep + 1);
            UtteranceRecord rec;
            rec.id = id;
            rec.audio_path = "wav/" + rec.id + ".wav";
            rec.speaker_id = spk.id;
            rec.gender = g;
            rec.sentence_id = sent.id;
            rec.condition = c;
            rec.session = rep < spec.train_reps ? Session::kTrain : Session::kTest;
            plan.push_back({std::move(rec), std::move(params)});
          }
        }
      }
    }
  }
  return plan;
}

std::vector<UtteranceRecord> GenerateSyntheticCorpus(const SynthSpec& spec,
                                                     const std::filesystem::path& out_dir) {
  const auto plan = PlanSyntheticCorpus(spec);
  std::error_code ec;
  std::filesystem::create_directories(out_dir / "wav", ec);
  if (ec) ThrowData("cannot create " + (out_dir / "wav").string() + ": " + ec.message());

  ParallelFor(plan.size(), [&](std::size_t i) {
    dsp::WriteWav16(out_dir / plan[i].record.audio_path, RenderUtterance(plan[i].params));
  });

  std::vector<UtteranceRecord> records;
  records.reserve(plan.size());
  for (const auto& u : plan) records.push_back(u.record);
  WriteManifest(out_dir / "manifest.csv", records);
  std::ofstream spec_out(out_dir / "synth_spec.json", std::ios::trunc);
  if (!spec_out) ThrowData("cannot write " + (out_dir / "synth_spec.json").string());
  spec_out << ToJson(spec).dump(2) << '\n';
  return records;
}

}  // namespace sphmm::corpus
