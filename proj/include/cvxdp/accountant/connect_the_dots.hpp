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
#include <cstdint>
#include <string>
#include <vector>

#include "cvxdp/accountant/pld.hpp"
#include "cvxdp/accountant/profile.hpp"
#include "cvxdp/core/error.hpp"

namespace cvxdp::accountant {

// Uniform eps grid {(first_index + i) * step : i < count}.
struct EpsGrid {
  std::int64_t first_index = 0;
  std::size_t count = 1;
  double step = 1e-3;

  double At(std::size_t i) const {
    return static_cast<double>(first_index + static_cast<std::int64_t>(i)) * step;
  }
};

struct PldGridOptions {
  double step = 1e-3;
  // Grids never extend past +-eps_max.
  double eps_max = kDefaultEpsMax;
  // The grid stops at the first eps with delta(eps) at or below this; the
  // remaining delta becomes the infinity atom.
  double tail_tolerance = 1e-12;
};

// Symmetric grid [-K*step, K*step] with K the smallest index at which the
// profile falls to the tail tolerance (capped at eps_max).
inline EpsGrid AdaptiveEpsGrid(const PrivacyProfile& profile,
                               const PldGridOptions& options = {}) {
  Require(options.step > 0.0 && std::isfinite(options.step), ErrorKind::kDomain,
          "eps grid step must be positive");
  Require(options.eps_max > 0.0, ErrorKind::kDomain, "eps_max must be positive");
  const auto max_index =
      static_cast<std::int64_t>(std::floor(options.eps_max / options.step));
  auto below = [&](std::int64_t k) {
    return profile.Delta(static_cast<double>(k) * options.step) <=
           options.tail_tolerance;
  };
  std::int64_t k = max_index;
  if (below(0)) {
    k = 0;
  } else if (below(max_index)) {
    std::int64_t lo = 0;  // not below
    std::int64_t hi = 1;
    while (hi < max_index && !below(hi)) {
      lo = hi;
      hi = std::min(max_index, hi * 2);
    }
    while (hi - lo > 1) {
      const std::int64_t mid = lo + (hi - lo) / 2;
      if (below(mid)) hi = mid; else lo = mid;
    }
    k = hi;
  }
  return EpsGrid{-k, static_cast<std::size_t>(2 * k + 1), options.step};
}

// Connect-the-dots discretization: the returned PLD reproduces the profile
// at every grid point and interpolates linearly in e^eps between them. As a
// privacy profile is convex in e^eps, the chords lie above it, so the result
// dominates the input everywhere.
//
// Mass at grid point i equals e^{eps_i} times the jump in slope (with respect
// to x = e^eps) at that point; the leftmost point absorbs whatever mass
// remains. The profile is split as delta = excess + max(0, 1 - x): the kink
// of the linear part is handled exactly and only the excess, which the
// profile can evaluate without cancellation, is differenced numerically.
inline DiscretePLD ConnectTheDots(const PrivacyProfile& profile,
                                  const EpsGrid& grid,
                                  double negative_tolerance = 1e-12) {
  Require(grid.count >= 1 && grid.step > 0.0, ErrorKind::kDomain,
          "connect-the-dots needs a non-empty grid with positive step");
  const std::size_t n = grid.count;
  std::vector<double> excess(n);
  std::vector<double> linear(n);
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double eps = grid.At(i);
    excess[i] = profile.Excess(eps);
    linear[i] = eps < 0.0 ? -std::expm1(eps) : 0.0;
    x[i] = std::exp(eps);
    const double delta = excess[i] + linear[i];
    Require(excess[i] >= -negative_tolerance && delta <= 1.0 + negative_tolerance,
            ErrorKind::kNumeric,
            "profile value outside [0, 1] at eps = " + std::to_string(eps));
  }

  // Slopes on [x_i, x_{i+1}]; i == n-1 denotes the flat extension past the
  // last grid point.
  auto excess_slope = [&](std::size_t i) {
    return (excess[i + 1] - excess[i]) / (x[i + 1] - x[i]);
  };
  auto linear_slope = [&](std::size_t i) {
    if (x[i + 1] <= 1.0) return -1.0;
    if (x[i] >= 1.0) return 0.0;
    return (linear[i + 1] - linear[i]) / (x[i + 1] - x[i]);
  };
  // Jump in slope at grid point i (1 <= i < n).
  auto jump = [&](std::size_t i) {
    if (i + 1 == n) return -(excess_slope(i - 1) + linear_slope(i - 1));
    return (excess_slope(i) - excess_slope(i - 1)) +
           (linear_slope(i) - linear_slope(i - 1));
  };

  DiscretePLD pld;
  pld.loss_step = grid.step;
  pld.origin_index = grid.first_index;
  pld.infinity_mass = std::max(0.0, excess[n - 1] + linear[n - 1]);
  pld.masses.assign(n, 0.0);

  for (std::size_t i = n; i-- > 1;) {
    double p = x[i] * jump(i);
    if (p < 0.0) {
      if (p < -negative_tolerance) {
        Fail(ErrorKind::kNumeric,
             "profile is not convex in e^eps near eps = " +
                 std::to_string(grid.At(i)) + " (mass " + std::to_string(p) + ")");
      }
      p = 0.0;
    }
    pld.masses[i] = p;
  }

  // Telescoping the jumps gives the interior mass in closed form,
  // sum_{i>0} p_i = delta_0 - m_inf - x_0 * slope_0, so the leftover
  // 1 - delta_0 + x_0 * slope_0 is evaluated directly.
  double leftover = 1.0 - pld.infinity_mass;
  if (n > 1) {
    const double s_lin = linear_slope(0);
    double linear_part;
    if (x[1] <= 1.0) {
      linear_part = 0.0;  // 1 - (1 - x_0) - x_0
    } else if (x[0] >= 1.0) {
      linear_part = 1.0;
    } else {
      linear_part = 1.0 - linear[0] + x[0] * s_lin;
    }
    leftover = linear_part - excess[0] + x[0] * excess_slope(0);
  }
  if (leftover < 0.0) {
    if (leftover < -negative_tolerance) {
      Fail(ErrorKind::kNumeric,
           "profile masses exceed one; grid does not reach far enough left");
    }
    leftover = 0.0;
  }
  pld.masses[0] = leftover;
  return pld;
}

}  // namespace cvxdp::accountant
