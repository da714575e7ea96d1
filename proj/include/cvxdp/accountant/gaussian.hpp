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

#include <cmath>
#include <limits>

#include "cvxdp/accountant/normal.hpp"
#include "cvxdp/core/error.hpp"

namespace cvxdp::accountant {

namespace internal {

inline void CheckMu(double mu) {
  Require(std::isfinite(mu) && mu > 0.0, ErrorKind::kDomain,
          "mu must be finite and positive");
}

// H_{e^log_alpha}(N(mu,1) || N(0,1)) for any real log_alpha.
inline double GaussianHockeyStickLog(double log_alpha, double mu) {
  if (log_alpha == -std::numeric_limits<double>::infinity()) return 1.0;
  if (log_alpha == 0.0) return std::erf(mu / (2.0 * std::numbers::sqrt2));
  const double a = -log_alpha / mu + mu / 2.0;
  const double b = -log_alpha / mu - mu / 2.0;
  return Clamp01(NormalCdf(a) - ScaledNormalCdf(log_alpha, b));
}

// H_alpha - max(0, 1 - alpha). For alpha < 1 this is alpha * H_{1/alpha} of
// the swapped pair, which for a unit-shift Gaussian pair is the same pair, so
// the value keeps full relative precision where H_alpha itself is ~1.
inline double GaussianExcessLog(double log_alpha, double mu) {
  if (log_alpha >= 0.0) return GaussianHockeyStickLog(log_alpha, mu);
  if (log_alpha == -std::numeric_limits<double>::infinity()) return 0.0;
  return std::exp(log_alpha) * GaussianHockeyStickLog(-log_alpha, mu);
}

}  // namespace internal

// Tight delta(eps) of a mu-GDP mechanism:
//   Phi(-eps/mu + mu/2) - e^eps * Phi(-eps/mu - mu/2).
inline double GaussianDelta(double mu, double eps) {
  internal::CheckMu(mu);
  Require(std::isfinite(eps) && eps >= 0.0, ErrorKind::kDomain,
          "eps must be finite and non-negative");
  return internal::GaussianHockeyStickLog(eps, mu);
}

// Hockey-stick divergence H_alpha(N(mu,1) || N(0,1)) for alpha >= 0. The
// likelihood ratio is monotone in the sample, so the positive part of
// p - alpha*q is a half-line and the integral is a difference of CDFs.
inline double HockeyStickGaussian(double alpha, double mu) {
  internal::CheckMu(mu);
  Require(alpha >= 0.0 && !std::isnan(alpha), ErrorKind::kDomain,
          "alpha must be non-negative");
  if (alpha == 0.0) return 1.0;
  if (std::isinf(alpha)) return 0.0;
  return internal::GaussianHockeyStickLog(std::log(alpha), mu);
}

}  // namespace cvxdp::accountant
