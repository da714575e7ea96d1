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
#include <limits>
#include <string>
#include <variant>

#include "cvxdp/core/error.hpp"

namespace cvxdp::optimizers {

// g if ||g|| <= C, else g C / ||g||. C may be +inf (no clipping).
inline Eigen::VectorXd Clip(const Eigen::Ref<const Eigen::VectorXd>& g, double C) {
  Require(C > 0.0, ErrorKind::kDomain, "clip norm must be positive");
  const double norm = g.norm();
  if (norm <= C) return g;
  return g * (C / norm);
}

// Scale factor min(1, C / norm), with 0-norm vectors left alone.
inline double ClipScale(double norm, double C) { return norm > C ? C / norm : 1.0; }

// Euclidean projection onto {v : a . v <= bound}. Points violating the bound
// by less than the rounding error of a . v count as feasible, which makes a
// projected point a fixed point of the projection.
inline Eigen::VectorXd ProjectHalfspace(const Eigen::Ref<const Eigen::VectorXd>& v,
                                        const Eigen::Ref<const Eigen::VectorXd>& a, double bound) {
  const double aa = a.squaredNorm();
  Require(aa > 0.0, ErrorKind::kDomain, "half-space normal must be nonzero");
  const double av = a.dot(v);
  const double slack = 4.0 * std::numeric_limits<double>::epsilon() *
                       (std::abs(bound) + a.cwiseAbs().dot(v.cwiseAbs()));
  if (av <= bound + slack) return v;
  return v + ((bound - av) / aa) * a;
}

// Projection onto the slab |a . v - y| <= C. The two half-spaces have
// parallel boundaries, so projecting onto one then the other is exact.
inline Eigen::VectorXd ProjectBand(const Eigen::Ref<const Eigen::VectorXd>& v,
                                   const Eigen::Ref<const Eigen::VectorXd>& a, double y, double C) {
  Require(C > 0.0, ErrorKind::kDomain, "band half-width must be positive");
  const Eigen::VectorXd upper = ProjectHalfspace(v, a, y + C);
  return ProjectHalfspace(upper, -a, C - y);
}

struct AllSpace {};

struct Ball {
  double radius = 1.0;
};

// Intersection of slabs |a_j . v - y_j| <= C (rows of A).
struct BandSet {
  Eigen::MatrixXd A;
  Eigen::VectorXd y;
  double C = 1.0;
  int max_sweeps = 10000;
  double tolerance = 1e-12;
};

using ConstraintSet = std::variant<AllSpace, Ball, BandSet>;

inline std::string ConstraintName(const ConstraintSet& c) {
  if (std::holds_alternative<AllSpace>(c)) return "all_space";
  if (std::holds_alternative<Ball>(c)) return "ball";
  return "band_set";
}

// Dykstra's alternating projections; a single band or mutually orthogonal
// bands converge after one sweep.
inline Eigen::VectorXd ProjectBandSet(const Eigen::VectorXd& v, const BandSet& set) {
  Require(set.A.rows() == set.y.size() && set.A.cols() == v.size(), ErrorKind::kShape,
          "band set shape does not match the parameter vector");
  const Eigen::Index m = set.A.rows();
  if (m == 0) return v;
  if (m == 1) return ProjectBand(v, set.A.row(0).transpose(), set.y(0), set.C);
  Eigen::VectorXd x = v;
  Eigen::MatrixXd increments = Eigen::MatrixXd::Zero(v.size(), m);
  for (int sweep = 0; sweep < set.max_sweeps; ++sweep) {
    const Eigen::VectorXd before = x;
    for (Eigen::Index j = 0; j < m; ++j) {
      const Eigen::VectorXd shifted = x + increments.col(j);
      x = ProjectBand(shifted, set.A.row(j).transpose(), set.y(j), set.C);
      increments.col(j) = shifted - x;
    }
    if ((x - before).norm() <= set.tolerance * std::max(1.0, x.norm())) return x;
  }
  Fail(ErrorKind::kNumeric, "band-set projection did not converge");
}

inline Eigen::VectorXd Project(const Eigen::VectorXd& v, const ConstraintSet& c) {
  if (std::holds_alternative<AllSpace>(c)) return v;
  if (const auto* ball = std::get_if<Ball>(&c)) {
    Require(ball->radius >= 0.0, ErrorKind::kDomain, "ball radius must be non-negative");
    const double norm = v.norm();
    return norm <= ball->radius ? v : Eigen::VectorXd(v * (ball->radius / norm));
  }
  return ProjectBandSet(v, std::get<BandSet>(c));
}

}  // namespace cvxdp::optimizers
