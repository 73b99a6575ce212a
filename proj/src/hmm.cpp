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

#include "sphmm/hmm.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <random>

#include "sphmm/error.hpp"
#include "sphmm/parallel.hpp"

namespace sphmm::hmm {

AcousticHmm::AcousticHmm(Matrix transitions, std::vector<GaussianMixture> emissions)
    : transitions_(std::move(transitions)), emissions_(std::move(emissions)) {
  const std::size_t n = emissions_.size();
  if (n == 0) ThrowData("AcousticHmm: no states");
  if (transitions_.rows() != n || transitions_.cols() != n) {
    ThrowData("AcousticHmm: transition matrix must be " + std::to_string(n) + "x" +
              std::to_string(n));
  }
  const std::size_t dim = emissions_.front().dim();
  for (const auto& e : emissions_) {
    if (e.dim() != dim) ThrowData("AcousticHmm: emission dimensions differ");
  }
  log_transitions_ = Matrix(n, n, kLogZero);
  for (std::size_t i = 0; i < n; ++i) {
    double total = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const double p = transitions_(i, j);
      if (!(p >= 0.0 && p <= 1.0)) ThrowData("AcousticHmm: transition outside [0, 1]");
      if (p > 0.0 && j != i && j != i + 1) {
        ThrowData("AcousticHmm: transition " + std::to_string(i) + "->" +
                  std::to_string(j) + " violates left-to-right topology");
      }
      total += p;
      if (p > 0.0) log_transitions_(i, j) = std::log(p);
    }
    if (std::abs(total - 1.0) > 1e-9) {
      ThrowData("AcousticHmm: transition row " + std::to_string(i) + " sums to " +
                std::to_string(total));
    }
  }
}

void TrainConfig::Validate() const {
  if (max_iterations < 1) ThrowUsage("TrainConfig: max_iterations must be >= 1");
  if (!(rel_loglik_tolerance > 0.0)) ThrowUsage("TrainConfig: tolerance must be positive");
  if (!(variance_floor > 0.0)) ThrowUsage("TrainConfig: variance_floor must be positive");
}

namespace {

void CheckObs(const AcousticHmm& model, const Matrix& obs, const char* who) {
  if (model.num_states() == 0) ThrowUsage(std::string(who) + ": empty model");
  if (obs.rows() == 0) ThrowUsage(std::string(who) + ": empty observation sequence");
  if (obs.cols() != model.dim()) {
    ThrowUsage(std::string(who) + ": observation dimension " + std::to_string(obs.cols()) +
               " does not match model dimension " + std::to_string(model.dim()));
  }
}

// T x N table of log b_j(o_t).
Matrix EmissionTable(const AcousticHmm& model, const Matrix& obs) {
  const int n = model.num_states();
  Matrix out(obs.rows(), n);
  std::size_t kmax = 0;
  for (const auto& e : model.emissions()) kmax = std::max(kmax, e.num_components());
  std::vector<double> scratch(kmax);
  for (std::size_t t = 0; t < obs.rows(); ++t) {
    for (int j = 0; j < n; ++j) {
      out(t, j) = model.emission(j).ComponentLogDensities(obs.row(t), scratch);
    }
  }
  return out;
}

Matrix Forward(const AcousticHmm& model, const Matrix& logb) {
  const int n = model.num_states();
  const std::size_t len = logb.rows();
  Matrix alpha(len, n, kLogZero);
  alpha(0, 0) = logb(0, 0);
  for (std::size_t t = 1; t < len; ++t) {
    for (int j = 0; j < n; ++j) {
      double stay = alpha(t - 1, j) + model.log_transition(j, j);
      double enter = j > 0 ? alpha(t - 1, j - 1) + model.log_transition(j - 1, j) : kLogZero;
      alpha(t, j) = LogAdd(stay, enter) + logb(t, j);
    }
  }
  return alpha;
}

Matrix Backward(const AcousticHmm& model, const Matrix& logb) {
  const int n = model.num_states();
  const std::size_t len = logb.rows();
  Matrix beta(len, n, kLogZero);
  for (int j = 0; j < n; ++j) beta(len - 1, j) = 0.0;
  for (std::size_t t = len - 1; t-- > 0;) {
    for (int j = 0; j < n; ++j) {
      double stay = model.log_transition(j, j) + logb(t + 1, j) + beta(t + 1, j);
      double leave = j + 1 < n ? model.log_transition(j, j + 1) + logb(t + 1, j + 1) +
                                     beta(t + 1, j + 1)
                               : kLogZero;
      beta(t, j) = LogAdd(stay, leave);
    }
  }
  return beta;
}

double TerminalLogLikelihood(const Matrix& alpha) {
  return LogSumExp(alpha.row(alpha.rows() - 1));
}

}  // namespace

double LogLikelihood(const AcousticHmm& model, const Matrix& obs) {
  CheckObs(model, obs, "LogLikelihood");
  return TerminalLogLikelihood(Forward(model, EmissionTable(model, obs)));
}

ViterbiResult Viterbi(const AcousticHmm& model, const Matrix& obs) {
  CheckObs(model, obs, "Viterbi");
  const int n = model.num_states();
  const std::size_t len = obs.rows();
  const Matrix logb = EmissionTable(model, obs);
  Matrix delta(len, n, kLogZero);
  std::vector<std::vector<unsigned char>> entered(len, std::vector<unsigned char>(n, 0));
  delta(0, 0) = logb(0, 0);
  for (std::size_t t = 1; t < len; ++t) {
    for (int j = 0; j < n; ++j) {
      const double stay = delta(t - 1, j) + model.log_transition(j, j);
      const double enter =
          j > 0 ? delta(t - 1, j - 1) + model.log_transition(j - 1, j) : kLogZero;
      // The lower predecessor (j - 1) wins ties.
      if (j > 0 && enter >= stay && enter != kLogZero) {
        delta(t, j) = enter + logb(t, j);
        entered[t][j] = 1;
      } else {
        delta(t, j) = stay + logb(t, j);
      }
    }
  }
  ViterbiResult result;
  int state = 0;
  for (int j = 1; j < n; ++j) {
    if (delta(len - 1, j) > delta(len - 1, state)) state = j;
  }
  result.log_prob = delta(len - 1, state);
  result.state_path.assign(len, 0);
  for (std::size_t t = len; t-- > 0;) {
    result.state_path[t] = state;
    if (t > 0 && entered[t][state]) --state;
  }
  return result;
}

namespace {

double SquaredDistance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t d = 0; d < a.size(); ++d) s += (a[d] - b[d]) * (a[d] - b[d]);
  return s;
}

}  // namespace

KMeansResult KMeans(const Matrix& points, int k, std::uint64_t seed, int iterations) {
  const std::size_t n = points.rows();
  const std::size_t dim = points.cols();
  if (k < 1) ThrowUsage("KMeans: k must be >= 1");
  if (n == 0) ThrowUsage("KMeans: no points");
  std::mt19937_64 rng(seed);

  KMeansResult res;
  res.centroids = Matrix(k, dim);
  // k-means++ seeding; with fewer distinct points than k, extra centroids
  // duplicate existing points and end up empty.
  std::vector<double> d2(n, std::numeric_limits<double>::infinity());
  std::size_t first = std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
  std::copy(points.row(first).begin(), points.row(first).end(), res.centroids.row(0).begin());
  for (int c = 1; c < k; ++c) {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      d2[i] = std::min(d2[i], SquaredDistance(points.row(i), res.centroids.row(c - 1)));
      total += d2[i];
    }
    std::size_t pick = 0;
    if (total > 0.0) {
      double u = std::uniform_real_distribution<double>(0.0, total)(rng);
      for (pick = 0; pick + 1 < n; ++pick) {
        u -= d2[pick];
        if (u < 0.0) break;
      }
    } else {
      pick = std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
    }
    std::copy(points.row(pick).begin(), points.row(pick).end(), res.centroids.row(c).begin());
  }

  res.assignment.assign(n, 0);
  res.counts.assign(k, 0);
  for (int iter = 0; iter < iterations; ++iter) {
    std::vector<double> dist(n);
    for (std::size_t i = 0; i < n; ++i) {
      int best = 0;
      double best_d = SquaredDistance(points.row(i), res.centroids.row(0));
      for (int c = 1; c < k; ++c) {
        double d = SquaredDistance(points.row(i), res.centroids.row(c));
        if (d < best_d) {
          best_d = d;
          best = c;
        }
      }
      res.assignment[i] = best;
      dist[i] = best_d;
    }
    // Re-seed empty clusters from the worst-fit points.
    std::fill(res.counts.begin(), res.counts.end(), 0);
    for (int a : res.assignment) ++res.counts[a];
    for (int c = 0; c < k; ++c) {
      if (res.counts[c] != 0) continue;
      std::size_t far = n;
      for (std::size_t i = 0; i < n; ++i) {
        if (res.counts[res.assignment[i]] > 1 && dist[i] > 0.0 &&
            (far == n || dist[i] > dist[far])) {
          far = i;
        }
      }
      if (far == n) continue;
      --res.counts[res.assignment[far]];
      res.assignment[far] = c;
      res.counts[c] = 1;
      dist[far] = 0.0;
    }
    Matrix sums(k, dim);
    for (std::size_t i = 0; i < n; ++i) {
      auto row = sums.row(res.assignment[i]);
      auto p = points.row(i);
      for (std::size_t d = 0; d < dim; ++d) row[d] += p[d];
    }
    for (int c = 0; c < k; ++c) {
      if (res.counts[c] == 0) continue;
      for (std::size_t d = 0; d < dim; ++d) {
        res.centroids(c, d) = sums(c, d) / double(res.counts[c]);
      }
    }
  }
  return res;
}

AcousticHmm InitModel(const std::vector<Matrix>& sequences, int num_states,
                      int num_mixtures, std::uint64_t seed, double variance_floor) {
  if (num_states < 1 || num_mixtures < 1) ThrowUsage("InitModel: need N >= 1 and K >= 1");
  if (!(variance_floor > 0.0)) ThrowUsage("InitModel: variance_floor must be positive");
  if (sequences.empty()) ThrowUsage("InitModel: no training sequences");
  const std::size_t dim = sequences.front().cols();
  for (std::size_t s = 0; s < sequences.size(); ++s) {
    if (sequences[s].cols() != dim) {
      ThrowUsage("InitModel: sequence " + std::to_string(s) + " has dimension " +
                 std::to_string(sequences[s].cols()) + ", expected " + std::to_string(dim));
    }
    if (sequences[s].rows() < static_cast<std::size_t>(num_states)) {
      ThrowUsage("InitModel: sequence " + std::to_string(s) + " has " +
                 std::to_string(sequences[s].rows()) + " frames, fewer than " +
                 std::to_string(num_states) + " states");
    }
  }

  std::vector<GaussianMixture> emissions;
  emissions.reserve(num_states);
  for (int j = 0; j < num_states; ++j) {
    std::size_t total = 0;
    for (const auto& seq : sequences) {
      const std::size_t len = seq.rows();
      total += (j + 1) * len / num_states - j * len / num_states;
    }
    Matrix pooled(total, dim);
    std::size_t at = 0;
    for (const auto& seq : sequences) {
      const std::size_t len = seq.rows();
      for (std::size_t t = j * len / num_states; t < (j + 1) * len / num_states; ++t) {
        std::copy(seq.row(t).begin(), seq.row(t).end(), pooled.row(at++).begin());
      }
    }

    std::vector<double> global_mean(dim, 0.0), global_var(dim, 0.0);
    for (std::size_t i = 0; i < total; ++i) {
      for (std::size_t d = 0; d < dim; ++d) global_mean[d] += pooled(i, d);
    }
    for (auto& m : global_mean) m /= double(total);
    for (std::size_t i = 0; i < total; ++i) {
      for (std::size_t d = 0; d < dim; ++d) {
        const double diff = pooled(i, d) - global_mean[d];
        global_var[d] += diff * diff;
      }
    }
    for (auto& v : global_var) v = std::max(v / double(total), variance_floor);

    const KMeansResult km = KMeans(pooled, num_mixtures, seed + 7919u * std::uint64_t(j));
    std::vector<double> weights(num_mixtures);
    Matrix means(num_mixtures, dim), vars(num_mixtures, dim);
    for (int c = 0; c < num_mixtures; ++c) {
      weights[c] = double(km.counts[c]) / double(total);
      for (std::size_t d = 0; d < dim; ++d) {
        means(c, d) = km.counts[c] ? km.centroids(c, d) : global_mean[d];
        vars(c, d) = 0.0;
      }
    }
    for (std::size_t i = 0; i < total; ++i) {
      const int c = km.assignment[i];
      for (std::size_t d = 0; d < dim; ++d) {
        const double diff = pooled(i, d) - means(c, d);
        vars(c, d) += diff * diff;
      }
    }
    for (int c = 0; c < num_mixtures; ++c) {
      for (std::size_t d = 0; d < dim; ++d) {
        vars(c, d) = km.counts[c] ? std::max(vars(c, d) / double(km.counts[c]), variance_floor)
                                  : global_var[d];
      }
    }
    emissions.emplace_back(std::move(weights), std::move(means), std::move(vars));
  }

  Matrix trans(num_states, num_states, 0.0);
  for (int j = 0; j + 1 < num_states; ++j) {
    trans(j, j) = 0.8;
    trans(j, j + 1) = 0.2;
  }
  trans(num_states - 1, num_states - 1) = 1.0;
  return AcousticHmm(std::move(trans), std::move(emissions));
}

namespace {

struct Stats {
  double loglik = 0.0;
  std::vector<double> stay, leave, occupancy;  // per state, t < T-1 for transitions
  Matrix comp_occ;                             // N x K
  std::vector<Matrix> sum, sumsq;              // per state, K x D

  Stats(int n, std::size_t k, std::size_t dim)
      : stay(n, 0.0), leave(n, 0.0), occupancy(n, 0.0), comp_occ(n, k),
        sum(n, Matrix(k, dim)), sumsq(n, Matrix(k, dim)) {}

  void Add(const Stats& o) {
    loglik += o.loglik;
    for (std::size_t j = 0; j < stay.size(); ++j) {
      stay[j] += o.stay[j];
      leave[j] += o.leave[j];
      occupancy[j] += o.occupancy[j];
      for (std::size_t i = 0; i < comp_occ.cols(); ++i) comp_occ(j, i) += o.comp_occ(j, i);
      for (std::size_t i = 0; i < sum[j].data().size(); ++i) {
        sum[j].data()[i] += o.sum[j].data()[i];
        sumsq[j].data()[i] += o.sumsq[j].data()[i];
      }
    }
  }
};

Stats Accumulate(const AcousticHmm& model, const Matrix& obs, std::size_t kmax) {
  const int n = model.num_states();
  const std::size_t len = obs.rows(), dim = obs.cols();
  Stats st(n, kmax, dim);

  Matrix logb(len, n);
  std::vector<Matrix> comp(n, Matrix(len, kmax, kLogZero));
  for (std::size_t t = 0; t < len; ++t) {
    for (int j = 0; j < n; ++j) {
      logb(t, j) = model.emission(j).ComponentLogDensities(obs.row(t), comp[j].row(t));
    }
  }
  const Matrix alpha = Forward(model, logb);
  const Matrix beta = Backward(model, logb);
  const double ll = TerminalLogLikelihood(alpha);
  if (!std::isfinite(ll)) ThrowNumeric("BaumWelch: training sequence has zero likelihood");
  st.loglik = ll;

  for (std::size_t t = 0; t < len; ++t) {
    for (int j = 0; j < n; ++j) {
      const double lg = alpha(t, j) + beta(t, j) - ll;
      if (lg == kLogZero) continue;
      const double gamma = std::exp(lg);
      if (t + 1 < len) {
        st.occupancy[j] += gamma;
        st.stay[j] += std::exp(alpha(t, j) + model.log_transition(j, j) + logb(t + 1, j) +
                               beta(t + 1, j) - ll);
        if (j + 1 < n) {
          st.leave[j] += std::exp(alpha(t, j) + model.log_transition(j, j + 1) +
                                  logb(t + 1, j + 1) + beta(t + 1, j + 1) - ll);
        }
      }
      const auto x = obs.row(t);
      const std::size_t k = model.emission(j).num_components();
      for (std::size_t c = 0; c < k; ++c) {
        const double lc = comp[j](t, c);
        if (lc == kLogZero) continue;
        const double g = gamma * std::exp(lc - logb(t, j));
        if (g == 0.0) continue;
        st.comp_occ(j, c) += g;
        auto s = st.sum[j].row(c);
        auto s2 = st.sumsq[j].row(c);
        for (std::size_t d = 0; d < dim; ++d) {
          s[d] += g * x[d];
          s2[d] += g * x[d] * x[d];
        }
      }
    }
  }
  return st;
}

Stats EStep(const AcousticHmm& model, const std::vector<Matrix>& sequences) {
  std::size_t kmax = 0;
  for (const auto& e : model.emissions()) kmax = std::max(kmax, e.num_components());
  std::vector<std::optional<Stats>> per(sequences.size());
  ParallelFor(sequences.size(), [&](std::size_t i) {
    per[i].emplace(Accumulate(model, sequences[i], kmax));
  });
  Stats total(model.num_states(), kmax, model.dim());
  for (const auto& s : per) total.Add(*s);
  return total;
}

AcousticHmm MStep(const AcousticHmm& model, const Stats& st, double variance_floor) {
  const int n = model.num_states();
  const std::size_t dim = model.dim();
  Matrix trans = model.transitions();
  for (int j = 0; j + 1 < n; ++j) {
    const double total = st.stay[j] + st.leave[j];
    if (total > 0.0) {
      trans(j, j) = st.stay[j] / total;
      trans(j, j + 1) = 1.0 - trans(j, j);
    }
  }

  std::vector<GaussianMixture> emissions;
  emissions.reserve(n);
  for (int j = 0; j < n; ++j) {
    const GaussianMixture& old = model.emission(j);
    const std::size_t k = old.num_components();
    double occ = 0.0;
    for (std::size_t c = 0; c < k; ++c) occ += st.comp_occ(j, c);
    if (!(occ > 0.0)) {
      emissions.push_back(old);
      continue;
    }
    std::vector<double> weights(k);
    Matrix means = old.means(), vars = old.variances();
    for (std::size_t c = 0; c < k; ++c) {
      const double g = st.comp_occ(j, c);
      weights[c] = g / occ;
      if (!(g > 0.0)) continue;
      for (std::size_t d = 0; d < dim; ++d) {
        const double mu = st.sum[j](c, d) / g;
        const double var = st.sumsq[j](c, d) / g - mu * mu;
        means(c, d) = mu;
        vars(c, d) = std::max(var, variance_floor);
      }
    }
    // Renormalize to absorb rounding so the weights stay stochastic.
    double wsum = 0.0;
    for (double w : weights) wsum += w;
    for (double& w : weights) w /= wsum;
    emissions.emplace_back(std::move(weights), std::move(means), std::move(vars));
  }
  return AcousticHmm(std::move(trans), std::move(emissions));
}

}  // namespace

TrainResult BaumWelch(const AcousticHmm& init, const std::vector<Matrix>& sequences,
                      const TrainConfig& config) {
  config.Validate();
  if (sequences.empty()) ThrowUsage("BaumWelch: no training sequences");
  for (const auto& seq : sequences) CheckObs(init, seq, "BaumWelch");

  TrainResult result{init, {}};
  Stats stats = EStep(result.model, sequences);
  result.loglik_history.push_back(stats.loglik);
  for (int iter = 0; iter < config.max_iterations; ++iter) {
    AcousticHmm next = MStep(result.model, stats, config.variance_floor);
    Stats next_stats = EStep(next, sequences);
    if (std::isnan(next_stats.loglik)) ThrowNumeric("BaumWelch: log-likelihood is NaN");
    const double prev = result.loglik_history.back();
    result.model = std::move(next);
    stats = std::move(next_stats);
    result.loglik_history.push_back(stats.loglik);
    const double rel = (stats.loglik - prev) / std::max(std::abs(prev), 1e-300);
    if (rel < config.rel_loglik_tolerance) break;
  }
  return result;
}

}  // namespace sphmm::hmm
