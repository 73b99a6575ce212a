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

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "sphmm/matrix.hpp"

namespace sphmm::dsp {

struct AudioClip {
  std::vector<double> samples;  // normalized to [-1, 1]
  int sample_rate = 0;          // Hz

  double duration_seconds() const {
    return sample_rate > 0 ? double(samples.size()) / sample_rate : 0.0;
  }
};

// Throws if the clip is empty, has a non-positive rate or out-of-range samples.
void ValidateClip(const AudioClip& clip);

struct FrontendConfig {
  double frame_length_ms = 25.0;
  double frame_hop_ms = 10.0;
  double preemphasis_coeff = 0.97;
  std::string window = "hamming";
  int num_mel_channels = 24;  // M
  int num_cepstra = 16;       // D, keeps C(1)..C(D)
  double f0_min = 60.0;
  double f0_max = 500.0;
  double log_floor = 1e-10;
  double voicing_threshold = 0.3;

  // Rate-independent checks.
  void Validate() const;
  // Also checks f0_max against Nyquist and that a frame holds >= 1 sample.
  void Validate(int sample_rate) const;

  std::size_t FrameLength(int sample_rate) const;
  std::size_t FrameHop(int sample_rate) const;
};

nlohmann::json ToJson(const FrontendConfig& config);
FrontendConfig FrontendConfigFromJson(const nlohmann::json& j);

// Per-utterance observation sequence plus the frame-synchronous prosody track.
struct FeatureBundle {
  Matrix mfcc;                             // T x D
  std::vector<std::optional<double>> f0;   // Hz, nullopt = unvoiced
  std::vector<double> log_energy;
  std::vector<double> frame_times;         // frame centers, seconds

  std::size_t num_frames() const noexcept { return log_energy.size(); }
};

// Throws unless all tracks have the same length T >= 1 and MFCCs are finite.
void ValidateFeatures(const FeatureBundle& features);

// y[0] = x[0], y[t] = x[t] - coeff * x[t-1].
AudioClip Preemphasize(const AudioClip& clip, double coeff);

// floor((num_samples - frame_length) / hop) + 1, or 0 when the clip is
// shorter than one frame.
std::size_t NumFrames(std::size_t num_samples, std::size_t frame_length,
                      std::size_t hop);

// Smallest power of two >= n.
std::size_t FftSizeFor(std::size_t n);

// In-place radix-2 complex FFT; re/im sizes must be equal powers of two.
void Fft(std::vector<double>& re, std::vector<double>& im);

// |X(k)|^2 for k = 0..fft_size/2 of the zero-padded frame.
std::vector<double> PowerSpectrum(std::span<const double> frame,
                                  std::size_t fft_size);

// Triangular filters equally spaced on the mel scale over [0, Nyquist].
class MelFilterbank {
 public:
  MelFilterbank(int num_channels, int sample_rate, std::size_t fft_size);

  // Filter outputs, each floored at `floor`. Negative spectrum entries throw.
  std::vector<double> Apply(std::span<const double> power_spectrum,
                            double floor) const;

  int num_channels() const noexcept { return static_cast<int>(filters_.size()); }
  std::size_t num_bins() const noexcept { return num_bins_; }
  // Bin closest to the peak of filter m.
  std::size_t center_bin(int m) const { return center_bins_.at(m); }
  // Weight of filter m at spectrum bin k.
  double weight(int m, std::size_t k) const;

 private:
  struct Filter {
    std::size_t first_bin = 0;
    std::vector<double> weights;
  };
  std::size_t num_bins_ = 0;
  std::vector<Filter> filters_;
  std::vector<std::size_t> center_bins_;
};

double HzToMel(double hz);
double MelToHz(double mel);

// Y(m) for a power spectrum of fft_size/2 + 1 bins.
std::vector<double> MelFilterbankEnergies(std::span<const double> power_spectrum,
                                          const FrontendConfig& config,
                                          int sample_rate);

// C(n) = sum_{m=1..M} log Y(m) cos(pi n / M (m - 1/2)), n = 1..num_cepstra.
std::vector<double> MfccFromEnergies(std::span<const double> energies,
                                     int num_cepstra);

// Normalized cross-correlation pitch estimate on raw (unweighted) samples.
// The first `window` samples are correlated against lagged copies; samples
// past the window extend the reach of long lags. Lags are searched in
// [rate/f0_max, rate/f0_min], clipped to the segment.
std::optional<double> EstimateF0(std::span<const double> segment, std::size_t window,
                                 const FrontendConfig& config, int sample_rate);

// Same, with the whole frame as the window.
std::optional<double> EstimateF0(std::span<const double> frame,
                                 const FrontendConfig& config, int sample_rate);

FeatureBundle ExtractFeatures(const AudioClip& clip, const FrontendConfig& config);

}  // namespace sphmm::dsp
