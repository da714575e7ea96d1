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
#include <limits>

#include "cvxdp/accountant/gaussian.hpp"
#include "cvxdp/accountant/normal.hpp"
#include "cvxdp/core/error.hpp"

namespace cvxdp::accountant {

struct GaussianPairSpec {
  double mu = 1.0;
};

// Without-replacement subsampling of a Gaussian base pair P = N(mu,1),
// Q = N(0,1) at ratio q = batch size / dataset size.
struct SubsampledSpec {
  GaussianPairSpec base;
  double q = 1.0;

  void Validate() const {
    Require(std::isfinite(base.mu) && base.mu > 0.0, ErrorKind::kDomain,
            "subsampled spec: mu must be finite and positive");
    Require(q > 0.0 && q <= 1.0, ErrorKind::kDomain,
            "subsampled spec: q must lie in (0, 1]");
  }
};

namespace internal {

// Mass of N(m,1) to the right of t.
inline double RightTail(double mean, double t) { return NormalSf(t - mean); }

// Sample value where the unit-shift likelihood ratio exp(mu*t - mu^2/2)
// equals exp(log_ratio).
inline double RatioCrossing(double log_ratio, double mu) {
  return (log_ratio + 0.5 * mu * mu) / mu;
}

// H_alpha(a*P + (1-a)*Q || c*P + (1-c)*Q) for P = N(mu,1), Q = N(0,1). The
// integrand w1*p(t) + w0*q(t) changes sign at most once because p/q is
// monotone, so the positive part is a half-line located in closed form.
inline double MixturePairHockeyStick(double a, double c, double alpha,
                                     double mu) {
  const double w1 = a - alpha * c;
  const double w0 = (1.0 - a) - alpha * (1.0 - c);
  if (w1 >= 0.0 && w0 >= 0.0) return Clamp01(w1 + w0);
  if (w1 <= 0.0 && w0 <= 0.0) return 0.0;
  const double t = RatioCrossing(std::log(-w0 / w1), mu);
  if (w1 > 0.0) {
    // Positive on [t, inf).
    return Clamp01(w1 * RightTail(mu, t) + w0 * RightTail(0.0, t));
  }
  // Positive on (-inf, t].
  return Clamp01(w1 * NormalCdf(t - mu) + w0 * NormalCdf(t));
}

}  // namespace internal

// H_alpha(q*P + (1-q)*Q || Q), alpha = e^log_alpha.
//
// The mixture-to-Q likelihood ratio q*L(t) + 1 - q is increasing in t, so the
// set where the integrand is positive is either the whole line or a single
// half-line [t*, inf).
inline double MixtureHockeyStickUpper(const SubsampledSpec& spec,
                                      double log_alpha) {
  spec.Validate();
  const double mu = spec.base.mu;
  const double q = spec.q;
  if (log_alpha == -std::numeric_limits<double>::infinity()) return 1.0;
  const double alpha = std::exp(log_alpha);
  if (alpha <= 1.0 - q) return Clamp01(1.0 - alpha);
  const double t = internal::RatioCrossing(std::log((alpha - 1.0 + q) / q), mu);
  return Clamp01(q * internal::RightTail(mu, t) +
                 (1.0 - q - alpha) * internal::RightTail(0.0, t));
}

// H_alpha(P || q*Q + (1-q)*P). P over the mixture has likelihood ratio
// L / (q + (1-q) L), again increasing in t.
inline double MixtureHockeyStickLower(const SubsampledSpec& spec,
                                      double log_alpha) {
  spec.Validate();
  const double mu = spec.base.mu;
  const double q = spec.q;
  if (log_alpha == -std::numeric_limits<double>::infinity()) return 1.0;
  const double alpha = std::exp(log_alpha);
  const double p_weight = 1.0 - alpha * (1.0 - q);
  if (p_weight <= 0.0) return 0.0;
  const double q_weight = alpha * q;
  const double t =
      internal::RatioCrossing(std::log(q_weight / p_weight), mu);
  return Clamp01(p_weight * internal::RightTail(mu, t) -
                 q_weight * internal::RightTail(0.0, t));
}

// h(alpha) = max of the two mixture divergences; a privacy profile for one
// step of without-replacement subsampled Gaussian noise.
inline double SubsampledProfileLog(const SubsampledSpec& spec,
                                   double log_alpha) {
  return std::max(MixtureHockeyStickUpper(spec, log_alpha),
                  MixtureHockeyStickLower(spec, log_alpha));
}

// h(alpha) - max(0, 1 - alpha), evaluated for alpha < 1 through the swapped
// pairs: H_alpha(A || B) - (1 - alpha) = alpha * H_{1/alpha}(B || A).
inline double SubsampledExcessLog(const SubsampledSpec& spec,
                                  double log_alpha) {
  if (log_alpha >= 0.0) return SubsampledProfileLog(spec, log_alpha);
  spec.Validate();
  if (log_alpha == -std::numeric_limits<double>::infinity()) return 0.0;
  const double alpha = std::exp(log_alpha);
  const double inv = std::exp(-log_alpha);
  const double mu = spec.base.mu;
  const double q = spec.q;
  // Upper pair (qP + (1-q)Q, Q) swapped; lower pair (P, qQ + (1-q)P) swapped.
  const double upper = internal::MixturePairHockeyStick(0.0, q, inv, mu);
  const double lower = internal::MixturePairHockeyStick(1.0 - q, 1.0, inv, mu);
  return alpha * std::max(upper, lower);
}

inline double SubsampledProfile(const SubsampledSpec& spec, double alpha) {
  Require(alpha >= 0.0 && !std::isnan(alpha), ErrorKind::kDomain,
          "alpha must be non-negative");
  if (alpha == 0.0) return 1.0;
  return SubsampledProfileLog(spec, std::log(alpha));
}

}  // namespace cvxdp::accountant
