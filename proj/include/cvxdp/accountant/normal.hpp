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
#include <numbers>

#include "cvxdp/core/error.hpp"

namespace cvxdp::accountant {

// Standard normal CDF through erfc, which keeps full relative accuracy in the
// lower tail (Phi(-30) ~ 5e-198 is still representable).
inline double NormalCdf(double x) {
  return 0.5 * std::erfc(-x / std::numbers::sqrt2);
}

// Survival function 1 - Phi(x), also tail-accurate.
inline double NormalSf(double x) { return 0.5 * std::erfc(x / std::numbers::sqrt2); }

// exp(log_scale) * Phi(x) without overflowing when log_scale is large and
// Phi(x) is tiny.
inline double ScaledNormalCdf(double log_scale, double x) {
  const double cdf = NormalCdf(x);
  if (cdf == 0.0) return 0.0;
  return std::exp(log_scale + std::log(cdf));
}

inline double Clamp01(double v) {
  if (!(v > 0.0)) return 0.0;
  return v > 1.0 ? 1.0 : v;
}

}  // namespace cvxdp::accountant
