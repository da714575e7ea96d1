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

#include <Eigen/Dense>

#include <cmath>

#include "cvxdp/core/error.hpp"

namespace cvxdp::convex_dual {

struct YoungScalingResult {
  double numeric_min = 0.0;
  double closed_form = 0.0;
  double numeric_argmin = 0.0;
  double closed_argmin = 0.0;
};

// Minimizes g -> (lambda/2)(g^4 ||u||^4 + alpha^4 / g^4) over g > 0 by
// golden-section search on s = ln g, and compares with lambda ||u||^2 alpha^2
// attained at g* = sqrt(|alpha| / ||u||).
inline YoungScalingResult YoungScalingGap(const Eigen::Ref<const Eigen::VectorXd>& u,
                                          double alpha, double lambda,
                                          double tolerance = 1e-10) {
  const double un = u.norm();
  Require(std::isfinite(un) && un > 0.0, ErrorKind::kDomain, "Young scaling needs u != 0");
  Require(std::isfinite(alpha) && alpha != 0.0, ErrorKind::kDomain,
          "Young scaling needs alpha != 0");
  Require(std::isfinite(lambda) && lambda >= 0.0, ErrorKind::kDomain,
          "Young scaling needs lambda >= 0");

  // Written as lambda/2 (A e^{4s} + B e^{-4s}) with A, B formed in log space.
  const double log_a = 4.0 * std::log(un);
  const double log_b = 4.0 * std::log(std::abs(alpha));
  auto f = [&](double s) {
    return 0.5 * lambda * (std::exp(log_a + 4.0 * s) + std::exp(log_b - 4.0 * s));
  };

  const double s_star = 0.25 * (log_b - log_a);
  double lo = std::min(-30.0, s_star - 1.0);
  double hi = std::max(30.0, s_star + 1.0);
  const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = hi - phi * (hi - lo);
  double x2 = lo + phi * (hi - lo);
  double f1 = f(x1);
  double f2 = f(x2);
  while (hi - lo > tolerance) {
    if (f1 <= f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - phi * (hi - lo);
      f1 = f(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + phi * (hi - lo);
      f2 = f(x2);
    }
  }
  const double s = 0.5 * (lo + hi);

  YoungScalingResult r;
  r.numeric_argmin = std::exp(s);
  r.numeric_min = f(s);
  r.closed_form = lambda * un * un * alpha * alpha;
  r.closed_argmin = std::sqrt(std::abs(alpha) / un);
  return r;
}

}  // namespace cvxdp::convex_dual
