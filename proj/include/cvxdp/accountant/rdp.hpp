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

#include "cvxdp/accountant/normal.hpp"
#include "cvxdp/core/error.hpp"

namespace cvxdp::accountant {

// (alpha, eps_rdp)-RDP implies (eps, delta)-DP with
//   delta = exp((alpha-1)(eps_rdp - eps)) / alpha * (1 - 1/alpha)^(alpha-1).
// Evaluated in log space and clamped to [0, 1].
inline double RdpToDp(double alpha, double eps_rdp, double eps) {
  Require(alpha > 1.0 && std::isfinite(alpha), ErrorKind::kDomain,
          "RDP order alpha must be > 1");
  Require(eps_rdp >= 0.0 && eps >= 0.0, ErrorKind::kDomain,
          "RDP conversion needs non-negative epsilons");
  const double log_delta = (alpha - 1.0) * (eps_rdp - eps) - std::log(alpha) +
                           (alpha - 1.0) * std::log1p(-1.0 / alpha);
  return Clamp01(std::exp(log_delta));
}

}  // namespace cvxdp::accountant
