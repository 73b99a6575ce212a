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

#include "sphmm/frontend.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "sphmm/error.hpp"

namespace sphmm::dsp {

void ValidateClip(const AudioClip& clip) {
  if (clip.sample_rate <= 0) ThrowUsage("audio clip: sample rate must be positive");
  if (clip.samples.empty()) ThrowUsage("audio clip: no samples");
  for (double s : clip.samples) {
    if (!(std::abs(s) <= 1.0)) ThrowUsage("audio clip: sample outside [-1, 1]");
  }
}

void FrontendConfig::Validate() const {
  if (!(frame_hop_ms > 0.0) || !(frame_length_ms >= frame_hop_ms)) {
    ThrowUsage("frontend config: need frame_length_ms >= frame_hop_ms > 0");
  }
  if (!(preemphasis_coeff >= 0.0 && preemphasis_coeff < 1.0)) {
    ThrowUsage("frontend config: preemphasis_coeff must lie in [0, 1)");
  }
  std::string w = window;
  std::transform(w.begin(), w.end(), w.begin(), ::tolower);
  if (w != "hamming") ThrowUsage("frontend config: unsupported window '" + window + "'");
  if (num_mel_channels < 2) ThrowUsage("frontend config: num_mel_channels must be >= 2");
  if (num_cepstra < 1 || num_cepstra > num_mel_channels - 1) {
    ThrowUsage("frontend config: need 1 <= num_cepstra <= num_mel_channels - 1");
  }
  if (!(f0_min > 0.0 && f0_min < f0_max)) {
    ThrowUsage("frontend config: need 0 < f0_min < f0_max");
  }
  if (!(log_floor > 0.0)) ThrowUsage("frontend config: log_floor must be positive");
  if (!(voicing_threshold > 0.0 && voicing_threshold < 1.0)) {
    ThrowUsage("frontend config: voicing_threshold must lie in (0, 1)");
  }
}

void FrontendConfig::Validate(int sample_rate) const {
  Validate();
  if (sample_rate <= 0) ThrowUsage("frontend config: sample rate must be positive");
  if (!(f0_max < sample_rate / 2.0)) {
    ThrowUsage("frontend config: f0_max must be below Nyquist (" +
               std::to_string(sample_rate / 2.0) + " Hz)");
  }
  if (FrameHop(sample_rate) < 1) ThrowUsage("frontend config: frame hop rounds to zero samples");
}

std::size_t FrontendConfig::FrameLength(int sample_rate) const {
  return static_cast<std::size_t>(std::lround(frame_length_ms * sample_rate / 1000.0));
}

std::size_t FrontendConfig::FrameHop(int sample_rate) const {
  return static_cast<std::size_t>(std::lround(frame_hop_ms * sample_rate / 1000.0));
}

nlohmann::json ToJson(const FrontendConfig& c) {
  return {
      {"frame_length_ms", c.frame_length_ms},
      {"frame_hop_ms", c.frame_hop_ms},
      {"preemphasis_coeff", c.preemphasis_coeff},
      {"window", c.window},
      {"num_mel_channels", c.num_mel_channels},
      {"num_cepstra", c.num_cepstra},
      {"f0_min", c.f0_min},
      {"f0_max", c.f0_max},
      {"log_floor", c.log_floor},
      {"voicing_threshold", c.voicing_threshold},
  };
}

FrontendConfig FrontendConfigFromJson(const nlohmann::json& j) {
  if (!j.is_object()) ThrowUsage("frontend config: expected a JSON object");
  FrontendConfig c;
  try {
    c.frame_length_ms = j.value("frame_length_ms", c.frame_length_ms);
    c.frame_hop_ms = j.value("frame_hop_ms", c.frame_hop_ms);
    c.preemphasis_coeff = j.value("preemphasis_coeff", c.preemphasis_coeff);
    c.window = j.value("window", c.window);
    c.num_mel_channels = j.value("num_mel_channels", c.num_mel_channels);
    c.num_cepstra = j.value("num_cepstra", c.num_cepstra);
    c.f0_min = j.value("f0_min", c.f0_min);
    c.f0_max = j.value("f0_max", c.f0_max);
    c.log_floor = j.value("log_floor", c.log_floor);
    c.voicing_threshold = j.value("voicing_threshold", c.voicing_threshold);
  } catch (const nlohmann::json::exception& e) {
    ThrowUsage(std::string("frontend config: ") + e.what());
  }
  c.Validate();
  return c;
}

void ValidateFeatures(const FeatureBundle& f) {
  const std::size_t t = f.log_energy.size();
  if (t == 0) ThrowData("feature bundle: no frames");
  if (f.mfcc.rows() != t || f.f0.size() != t || f.frame_times.size() != t) {
    ThrowData("feature bundle: track lengths differ");
  }
  for (double v : f.mfcc.data()) {
    if (!std::isfinite(v)) ThrowNumeric("feature bundle: non-finite MFCC");
  }
}

AudioClip Preemphasize(const AudioClip& clip, double coeff) {
  if (clip.samples.empty()) ThrowUsage("Preemphasize: empty clip");
  if (!(coeff >= 0.0 && coeff < 1.0)) ThrowUsage("Preemphasize: coeff must lie in [0, 1)");
  AudioClip out;
  out.sample_rate = clip.sample_rate;
  out.samples.resize(clip.samples.size());
  out.samples[0] = clip.samples[0];
  for (std::size_t t = 1; t < clip.samples.size(); ++t) {
    out.samples[t] = clip.samples[t] - coeff * clip.samples[t - 1];
  }
  return out;
}

std::size_t NumFrames(std::size_t num_samples, std::size_t frame_length,
                      std::size_t hop) {
  if (frame_length == 0 || hop == 0 || num_samples < frame_length) return 0;
  return (num_samples - frame_length) / hop + 1;
}

std::size_t FftSizeFor(std::size_t n) {
  std::size_t size = 1;
  while (size < n) size <<= 1;
  return size;
}

void Fft(std::vector<double>& re, std::vector<double>& im) {
  const std::size_t n = re.size();
  if (im.size() != n || n == 0 || (n & (n - 1)) != 0) {
    ThrowUsage("Fft: size must be a power of two");
  }
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) {
      std::swap(re[i], re[j]);
      std::swap(im[i], im[j]);
    }
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const double ang = -2.0 * std::numbers::pi / double(len);
    for (std::size_t k = 0; k < len / 2; ++k) {
      const double wr = std::cos(ang * double(k));
      const double wi = std::sin(ang * double(k));
      for (std::size_t i = 0; i < n; i += len) {
        const std::size_t a = i + k, b = i + k + len / 2;
        const double xr = re[b] * wr - im[b] * wi;
        const double xi = re[b] * wi + im[b] * wr;
        re[b] = re[a] - xr;
        im[b] = im[a] - xi;
        re[a] += xr;
        im[a] += xi;
      }
    }
  }
}

std::vector<double> PowerSpectrum(std::span<const double> frame,
                                  std::size_t fft_size) {
  if (fft_size < frame.size()) ThrowUsage("PowerSpectrum: fft_size shorter than frame");
  std::vector<double> re(fft_size, 0.0), im(fft_size, 0.0);
  std::copy(frame.begin(), frame.end(), re.begin());
  Fft(re, im);
  std::vector<double> power(fft_size / 2 + 1);
  for (std::size_t k = 0; k < power.size(); ++k) {
    power[k] = re[k] * re[k] + im[k] * im[k];
  }
  return power;
}

double HzToMel(double hz) { return 1127.0 * std::log1p(hz / 700.0); }
double MelToHz(double mel) { return 700.0 * std::expm1(mel / 1127.0); }

MelFilterbank::MelFilterbank(int num_channels, int sample_rate,
                             std::size_t fft_size)
    : num_bins_(fft_size / 2 + 1) {
  if (num_channels < 1 || sample_rate <= 0 || fft_size < 2) {
    ThrowUsage("MelFilterbank: invalid geometry");
  }
  const double nyquist = sample_rate / 2.0;
  const double mel_hi = HzToMel(nyquist);
  const double mel_step = mel_hi / (num_channels + 1);
  const double bin_hz = double(sample_rate) / double(fft_size);

  filters_.resize(num_channels);
  center_bins_.resize(num_channels);
  for (int m = 0; m < num_channels; ++m) {
    const double left = mel_step * m;
    const double center = mel_step * (m + 1);
    const double right = mel_step * (m + 2);
    Filter& f = filters_[m];
    bool started = false;
    for (std::size_t k = 0; k < num_bins_; ++k) {
      const double mel = HzToMel(k * bin_hz);
      double w = 0.0;
      if (mel > left && mel <= center) {
        w = (mel - left) / (center - left);
      } else if (mel > center && mel < right) {
        w = (right - mel) / (right - center);
      }
      if (w > 0.0) {
        if (!started) {
          f.first_bin = k;
          started = true;
        }
        f.weights.resize(k - f.first_bin + 1, 0.0);
        f.weights.back() = w;
      }
    }
    const double center_hz = MelToHz(center);
    center_bins_[m] = std::min<std::size_t>(
        num_bins_ - 1, static_cast<std::size_t>(std::lround(center_hz / bin_hz)));
  }
}

double MelFilterbank::weight(int m, std::size_t k) const {
  const Filter& f = filters_.at(m);
  if (k < f.first_bin || k >= f.first_bin + f.weights.size()) return 0.0;
  return f.weights[k - f.first_bin];
}

std::vector<double> MelFilterbank::Apply(std::span<const double> power,
                                         double floor) const {
  if (power.size() != num_bins_) {
    ThrowUsage("MelFilterbank: spectrum has " + std::to_string(power.size()) +
               " bins, expected " + std::to_string(num_bins_));
  }
  for (double p : power) {
    if (!(p >= 0.0)) ThrowUsage("MelFilterbank: negative spectrum entry");
  }
  std::vector<double> out(filters_.size());
  for (std::size_t m = 0; m < filters_.size(); ++m) {
    const Filter& f = filters_[m];
    double sum = 0.0;
    for (std::size_t i = 0; i < f.weights.size(); ++i) {
      sum += f.weights[i] * power[f.first_bin + i];
    }
    out[m] = std::max(sum, floor);
  }
  return out;
}

std::vector<double> MelFilterbankEnergies(std::span<const double> power_spectrum,
                                          const FrontendConfig& config,
                                          int sample_rate) {
  config.Validate();
  if (power_spectrum.size() < 2) ThrowUsage("MelFilterbankEnergies: spectrum too short");
  MelFilterbank bank(config.num_mel_channels, sample_rate,
                     2 * (power_spectrum.size() - 1));
  return bank.Apply(power_spectrum, config.log_floor);
}

std::vector<double> MfccFromEnergies(std::span<const double> energies,
                                     int num_cepstra) {
  const std::size_t m_count = energies.size();
  if (m_count == 0) ThrowUsage("MfccFromEnergies: no energies");
  if (num_cepstra < 1) ThrowUsage("MfccFromEnergies: num_cepstra must be >= 1");
  std::vector<double> log_y(m_count);
  for (std::size_t m = 0; m < m_count; ++m) {
    if (!(energies[m] > 0.0)) {
      ThrowUsage("MfccFromEnergies: non-positive energy at channel " + std::to_string(m));
    }
    log_y[m] = std::log(energies[m]);
  }
  std::vector<double> c(num_cepstra);
  const double scale = std::numbers::pi / double(m_count);
  for (int n = 1; n <= num_cepstra; ++n) {
    double sum = 0.0;
    for (std::size_t m = 1; m <= m_count; ++m) {
      sum += log_y[m - 1] * std::cos(scale * n * (double(m) - 0.5));
    }
    c[n - 1] = sum;
  }
  return c;
}

namespace {

constexpr double kWhiteNoiseCorrection = 1e-2;

// Cross-correlation of the first `window` samples of a DC-removed segment
// against its lagged copies. Each lag uses min(window, size - lag) products,
// so a segment longer than the window keeps the sum length fixed.
class LagTable {
 public:
  LagTable(std::span<const double> segment, std::size_t window)
      : n_(segment.size()), window_(std::min(window, segment.size())) {
    double mean = 0.0;
    for (double x : segment) mean += x;
    mean /= double(n_);
    const std::size_t size = FftSizeFor(n_ + window_);
    std::vector<double> xr(size, 0.0), xi(size, 0.0), wr(size, 0.0), wi(size, 0.0);
    prefix_.assign(n_ + 1, 0.0);
    for (std::size_t i = 0; i < n_; ++i) {
      xr[i] = segment[i] - mean;
      prefix_[i + 1] = prefix_[i] + xr[i] * xr[i];
      if (i < window_) wr[i] = xr[i];
    }
    Fft(xr, xi);
    Fft(wr, wi);
    // X * conj(W), then the inverse as conj(FFT(conj(.))) / size.
    for (std::size_t k = 0; k < size; ++k) {
      const double re = xr[k] * wr[k] + xi[k] * wi[k];
      const double im = xi[k] * wr[k] - xr[k] * wi[k];
      xr[k] = re;
      xi[k] = -im;
    }
    Fft(xr, xi);
    acf_.resize(n_);
    for (std::size_t lag = 0; lag < n_; ++lag) acf_[lag] = xr[lag] / double(size);
  }

  double energy() const { return prefix_[window_]; }

  double Nccf(std::size_t lag) const {
    const std::size_t len = std::min(window_, n_ - lag);
    const double head = prefix_[len];
    const double tail = prefix_[lag + len] - prefix_[lag];
    if (head <= 0.0 || tail <= 0.0) return 0.0;
    return acf_[lag] / std::sqrt(head * tail);
  }

 private:
  std::size_t n_;
  std::size_t window_;
  std::vector<double> acf_;
  std::vector<double> prefix_;
};

// Removes the spectral envelope with a short linear predictor fitted on the
// window, so formant ringing does not compete with the pitch period. The
// white-noise correction keeps the predictor stable on pure tones.
std::vector<double> InverseFilter(std::span<const double> segment, std::size_t window,
                                  int sample_rate) {
  const std::size_t n = segment.size();
  const std::size_t len = std::min(window, n);
  const std::size_t order = std::min<std::size_t>(2 + sample_rate / 1000, len / 4);
  double mean = 0.0;
  for (double x : segment) mean += x;
  mean /= double(n);
  std::vector<double> x(n), w(len);
  for (std::size_t i = 0; i < n; ++i) x[i] = segment[i] - mean;
  for (std::size_t i = 0; i < len; ++i) {
    w[i] = x[i] * (0.54 - 0.46 * std::cos(2.0 * std::numbers::pi * double(i) / double(len - 1)));
  }
  std::vector<double> r(order + 1, 0.0);
  for (std::size_t k = 0; k <= order; ++k) {
    for (std::size_t i = k; i < len; ++i) r[k] += w[i] * w[i - k];
  }
  if (!(r[0] > 0.0)) return x;
  r[0] *= 1.0 + kWhiteNoiseCorrection;

  // Levinson-Durbin recursion for a[1..order].
  std::vector<double> a(order + 1, 0.0), prev(order + 1, 0.0);
  a[0] = 1.0;
  double err = r[0];
  for (std::size_t m = 1; m <= order; ++m) {
    double acc = r[m];
    for (std::size_t k = 1; k < m; ++k) acc += a[k] * r[m - k];
    const double refl = -acc / err;
    prev = a;
    for (std::size_t k = 1; k < m; ++k) a[k] = prev[k] + refl * prev[m - k];
    a[m] = refl;
    err *= 1.0 - refl * refl;
    if (!(err > 0.0)) break;
  }

  // The first `order` outputs lack history and are dropped.
  std::vector<double> e(n - order);
  for (std::size_t i = order; i < n; ++i) {
    double v = x[i];
    for (std::size_t k = 1; k <= order; ++k) v += a[k] * x[i - k];
    e[i - order] = v;
  }
  return e;
}

constexpr double kLagPenalty = 0.5;
constexpr double kSubmultipleRatio = 0.7;

}  // namespace

std::optional<double> EstimateF0(std::span<const double> frame,
                                 const FrontendConfig& config, int sample_rate) {
  return EstimateF0(frame, frame.size(), config, sample_rate);
}

std::optional<double> EstimateF0(std::span<const double> segment, std::size_t window,
                                 const FrontendConfig& config, int sample_rate) {
  if (segment.size() < 4 || window < 4 || sample_rate <= 0) return std::nullopt;
  const std::size_t len = std::min(window, segment.size());
  double energy = 0.0;
  for (std::size_t i = 0; i < len; ++i) energy += segment[i] * segment[i];
  if (!(energy > 1e-12 * double(len))) return std::nullopt;
  const auto residual = InverseFilter(segment, window, sample_rate);
  const std::size_t dropped = segment.size() - residual.size();
  if (residual.size() < 4 || window <= dropped + 4) return std::nullopt;
  const LagTable table(residual, window - dropped);
  if (!(table.energy() > 0.0)) return std::nullopt;

  const std::size_t lag_min = std::max<std::size_t>(
      2, static_cast<std::size_t>(std::ceil(sample_rate / config.f0_max)));
  const std::size_t lag_max = std::min<std::size_t>(
      static_cast<std::size_t>(std::floor(sample_rate / config.f0_min)),
      residual.size() - 2);
  if (lag_min >= lag_max) return std::nullopt;

  // Candidates are local maxima of the normalized correlation. A mild linear
  // penalty on lag breaks near-ties toward the shorter period.
  const auto score = [&](std::size_t lag) {
    return table.Nccf(lag) * (1.0 - kLagPenalty * double(lag) / double(lag_max));
  };
  std::size_t best = 0;
  for (std::size_t lag = lag_min; lag <= lag_max; ++lag) {
    const double r = table.Nccf(lag);
    if (r < table.Nccf(lag - 1) || r < table.Nccf(lag + 1)) continue;
    if (best == 0 || score(lag) > score(best)) best = lag;
  }
  if (best == 0) return std::nullopt;

  // Sub-multiple guard: take the shortest lag best/k that is nearly as
  // periodic as best itself.
  for (std::size_t k = best / lag_min; k >= 2; --k) {
    const std::size_t center = (best + k / 2) / k;
    std::size_t cand = center;
    for (std::size_t l = center - 1; l <= center + 1; ++l) {
      if (l >= lag_min && table.Nccf(l) > table.Nccf(cand)) cand = l;
    }
    if (cand >= lag_min && table.Nccf(cand) >= kSubmultipleRatio * table.Nccf(best)) {
      best = cand;
      break;
    }
  }

  const double peak = table.Nccf(best);
  if (!(peak >= config.voicing_threshold)) return std::nullopt;

  double refined = double(best);
  const double ym = table.Nccf(best - 1);
  const double yp = table.Nccf(best + 1);
  const double denom = ym - 2.0 * peak + yp;
  if (denom < 0.0) {
    const double shift = 0.5 * (ym - yp) / denom;
    if (std::abs(shift) < 1.0) refined += shift;
  }
  const double f0 = double(sample_rate) / refined;
  return std::clamp(f0, config.f0_min, config.f0_max);
}

FeatureBundle ExtractFeatures(const AudioClip& clip, const FrontendConfig& config) {
  ValidateClip(clip);
  config.Validate(clip.sample_rate);
  const int rate = clip.sample_rate;
  const std::size_t frame_len = config.FrameLength(rate);
  const std::size_t hop = config.FrameHop(rate);
  const std::size_t num_frames = NumFrames(clip.samples.size(), frame_len, hop);
  if (num_frames == 0) {
    ThrowUsage("ExtractFeatures: clip of " + std::to_string(clip.samples.size()) +
               " samples is shorter than one frame (" + std::to_string(frame_len) + ")");
  }

  const std::size_t fft_size = FftSizeFor(frame_len);
  const MelFilterbank bank(config.num_mel_channels, rate, fft_size);
  std::vector<double> window(frame_len);
  for (std::size_t i = 0; i < frame_len; ++i) {
    window[i] = frame_len == 1
                    ? 1.0
                    : 0.54 - 0.46 * std::cos(2.0 * std::numbers::pi * double(i) /
                                             double(frame_len - 1));
  }

  const auto pitch_reach = static_cast<std::size_t>(std::ceil(rate / config.f0_min)) + 1;

  FeatureBundle out;
  out.mfcc = Matrix(num_frames, static_cast<std::size_t>(config.num_cepstra));
  out.f0.resize(num_frames);
  out.log_energy.resize(num_frames);
  out.frame_times.resize(num_frames);

  AudioClip frame_clip;
  frame_clip.sample_rate = rate;
  for (std::size_t t = 0; t < num_frames; ++t) {
    const std::span<const double> raw(clip.samples.data() + t * hop, frame_len);

    double energy = 0.0;
    for (double s : raw) energy += s * s;
    out.log_energy[t] = std::log(energy + config.log_floor);
    const std::size_t reach = std::min(clip.samples.size() - t * hop, frame_len + pitch_reach);
    out.f0[t] = EstimateF0({raw.data(), reach}, frame_len, config, rate);
    out.frame_times[t] = (double(t * hop) + 0.5 * double(frame_len)) / rate;

    frame_clip.samples.assign(raw.begin(), raw.end());
    AudioClip emphasized = Preemphasize(frame_clip, config.preemphasis_coeff);
    for (std::size_t i = 0; i < frame_len; ++i) emphasized.samples[i] *= window[i];
    const auto power = PowerSpectrum(emphasized.samples, fft_size);
    const auto mel = bank.Apply(power, config.log_floor);
    const auto cep = MfccFromEnergies(mel, config.num_cepstra);
    std::copy(cep.begin(), cep.end(), out.mfcc.row(t).begin());
  }
  return out;
}

}  // namespace sphmm::dsp
