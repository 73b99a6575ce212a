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

#include <span>
#include <vector>

#include "sphmm/matrix.hpp"

namespace sphmm {

// log N(x; mean, diag(variance)).
double DiagGaussianLogDensity(std::span<const double> x,
                              std::span<const double> mean,
                              std::span<const double> variance);

// Diagonal-covariance Gaussian mixture. Derived quantities (log weights,
// inverse variances, normalizers) are recomputed from the stored fields on
// construction, so a model rebuilt from serialized fields scores identically.
class GaussianMixture {
 public:
  GaussianMixture() = default;
  // Throws unless weights are non-negative and sum to 1 within 1e-9, shapes
  // agree, and every variance is positive.
  GaussianMixture(std::vector<double> weights, Matrix means, Matrix variances);

  std::size_t num_components() const noexcept { return weights_.size(); }
  std::size_t dim() const noexcept { return means_.cols(); }

  const std::vector<double>& weights() const noexcept { return weights_; }
  const Matrix& means() const noexcept { return means_; }
  const Matrix& variances() const noexcept { return variances_; }

  // log sum_k w_k N(x; mu_k, Sigma_k).
  double LogDensity(std::span<const double> x) const;

  // out[k] = log w_k + log N(x; mu_k, Sigma_k); returns their log-sum.
  double ComponentLogDensities(std::span<const double> x, std::span<double> out) const;

 private:
  std::vector<double> weights_;
  Matrix means_;
  Matrix variances_;
  std::vector<double> log_weights_;
  Matrix inv_variances_;
  std::vector<double> log_norm_;
};

}  // namespace sphmm
