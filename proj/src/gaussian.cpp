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

#include "sphmm/gaussian.hpp"

#include <cmath>
#include <numbers>

#include "sphmm/error.hpp"

namespace sphmm {
namespace {
const double kLog2Pi = std::log(2.0 * std::numbers::pi);
}

double DiagGaussianLogDensity(std::span<const double> x,
                              std::span<const double> mean,
                              std::span<const double> variance) {
  if (x.size() != mean.size() || x.size() != variance.size()) {
    ThrowUsage("DiagGaussianLogDensity: dimension mismatch");
  }
  double acc = 0.0;
  for (std::size_t d = 0; d < x.size(); ++d) {
    const double diff = x[d] - mean[d];
    acc += kLog2Pi + std::log(variance[d]) + diff * diff / variance[d];
  }
  return -0.5 * acc;
}

GaussianMixture::GaussianMixture(std::vector<double> weights, Matrix means,
                                 Matrix variances)
    : weights_(std::move(weights)),
      means_(std::move(means)),
      variances_(std::move(variances)) {
  const std::size_t k = weights_.size();
  if (k == 0) ThrowData("GaussianMixture: no components");
  if (means_.rows() != k || variances_.rows() != k ||
      means_.cols() != variances_.cols() || means_.cols() == 0) {
    ThrowData("GaussianMixture: weight/mean/variance shapes disagree");
  }
  double total = 0.0;
  for (double w : weights_) {
    if (!(w >= 0.0)) ThrowData("GaussianMixture: negative mixture weight");
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-9) {
    ThrowData("GaussianMixture: weights sum to " + std::to_string(total));
  }

  const std::size_t dim = means_.cols();
  log_weights_.resize(k);
  inv_variances_ = Matrix(k, dim);
  log_norm_.resize(k);
  for (std::size_t c = 0; c < k; ++c) {
    log_weights_[c] = weights_[c] > 0.0 ? std::log(weights_[c]) : kLogZero;
    double log_det = 0.0;
    for (std::size_t d = 0; d < dim; ++d) {
      const double v = variances_(c, d);
      if (!(v > 0.0) || !std::isfinite(v)) ThrowData("GaussianMixture: non-positive variance");
      if (!std::isfinite(means_(c, d))) ThrowData("GaussianMixture: non-finite mean");
      inv_variances_(c, d) = 1.0 / v;
      log_det += std::log(v);
    }
    log_norm_[c] = -0.5 * (double(dim) * kLog2Pi + log_det);
  }
}

double GaussianMixture::ComponentLogDensities(std::span<const double> x,
                                              std::span<double> out) const {
  const std::size_t dim = means_.cols();
  for (std::size_t c = 0; c < weights_.size(); ++c) {
    if (log_weights_[c] == kLogZero) {
      out[c] = kLogZero;
      continue;
    }
    const auto mu = means_.row(c);
    const auto iv = inv_variances_.row(c);
    double maha = 0.0;
    for (std::size_t d = 0; d < dim; ++d) {
      const double diff = x[d] - mu[d];
      maha += diff * diff * iv[d];
    }
    out[c] = log_weights_[c] + log_norm_[c] - 0.5 * maha;
  }
  return LogSumExp(out.first(weights_.size()));
}

double GaussianMixture::LogDensity(std::span<const double> x) const {
  if (x.size() != dim()) ThrowUsage("GaussianMixture: observation dimension mismatch");
  std::vector<double> scratch(weights_.size());
  return ComponentLogDensities(x, scratch);
}

}  // namespace sphmm
