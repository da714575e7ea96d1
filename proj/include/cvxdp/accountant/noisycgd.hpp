// Copyright 2026 The cvxdp Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>

#include "cvxdp/core/error.hpp"

namespace cvxdp::accountant {

// Noisy cyclic mini-batch gradient descent on fixed disjoint batches, in the
// units of the GDP bound: noise N(0, sigma^2 I) is added to the batch-mean
// gradient and L bounds the gradient difference of any two per-sample losses.
struct NoisyCGDSpec {
  double L = 1.0;
  std::int64_t b = 1;
  double sigma = 1.0;
  double eta = 0.1;
  double lambda_sc = 0.1;
  double beta_sm = 1.0;
  std::int64_t k = 1;  // batches per epoch, n / b
  std::int64_t E = 1;  // epochs

  void Validate() const {
    Require(L > 0.0 && std::isfinite(L), ErrorKind::kDomain, "L must be positive");
    Require(b >= 1, ErrorKind::kDomain, "batch size must be positive");
    Require(sigma > 0.0 && std::isfinite(sigma), ErrorKind::kDomain,
            "sigma must be positive");
    Require(eta > 0.0, ErrorKind::kDomain, "eta must be positive");
    Require(lambda_sc > 0.0, ErrorKind::kDomain, "lambda must be positive");
    Require(beta_sm > 0.0, ErrorKind::kDomain, "beta must be positive");
    Require(k >= 1 && E >= 1, ErrorKind::kDomain,
            "batches per epoch and epochs must be positive");
  }
};

// c = max{|1 - eta*lambda|, |1 - eta*beta|}.
inline double ForgettingConstant(const NoisyCGDSpec& spec) {
  return std::max(std::abs(1.0 - spec.eta * spec.lambda_sc),
                  std::abs(1.0 - spec.eta * spec.beta_sm));
}

// GDP parameter of the final iterate:
//   mu = L/(b sigma) * sqrt(1 + c^{2k-2} (1-c^2)/(1-c^k)^2
//                              * (1-c^{k(E-1)})/(1+c^{k(E-1)})).
inline double NoisyCgdMu(const NoisyCGDSpec& spec) {
  spec.Validate();
  const double c = ForgettingConstant(spec);
  Require(c < 1.0, ErrorKind::kDomain,
          "forgetting constant must be < 1 (need 0 < eta*lambda and "
          "eta*beta < 2)");
  const double base = spec.L / (static_cast<double>(spec.b) * spec.sigma);
  if (spec.E == 1) return base;
  const double k = static_cast<double>(spec.k);
  const double ck = std::pow(c, k);
  const double tail = std::pow(c, k * static_cast<double>(spec.E - 1));
  const double amplification = std::pow(c, 2.0 * k - 2.0) * (1.0 - c * c) /
                               ((1.0 - ck) * (1.0 - ck)) * (1.0 - tail) /
                               (1.0 + tail);
  return base * std::sqrt(1.0 + amplification);
}

}  // namespace cvxdp::accountant
