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

// Reference solver for small Euclidean projections onto polyhedra, used as
// an independent check of the closed-form projections.

#pragma once

#include <Eigen/Dense>

#include <limits>

namespace cvxdp::testing {

// argmin ||z - v|| subject to G z <= h, by enumerating active sets and
// solving each KKT system. Only meant for a handful of constraints.
inline Eigen::VectorXd NearestPointQp(const Eigen::VectorXd& v, const Eigen::MatrixXd& G,
                                      const Eigen::VectorXd& h) {
  const Eigen::Index m = G.rows();
  const Eigen::Index p = v.size();
  Eigen::VectorXd best;
  double best_dist = std::numeric_limits<double>::infinity();
  for (unsigned mask = 0; mask < (1u << m); ++mask) {
    std::vector<Eigen::Index> active;
    for (Eigen::Index j = 0; j < m; ++j) {
      if (mask & (1u << j)) active.push_back(j);
    }
    const auto s = static_cast<Eigen::Index>(active.size());
    Eigen::MatrixXd K = Eigen::MatrixXd::Zero(p + s, p + s);
    Eigen::VectorXd rhs(p + s);
    K.topLeftCorner(p, p).setIdentity();
    rhs.head(p) = v;
    for (Eigen::Index a = 0; a < s; ++a) {
      K.block(0, p + a, p, 1) = G.row(active[static_cast<std::size_t>(a)]).transpose();
      K.block(p + a, 0, 1, p) = G.row(active[static_cast<std::size_t>(a)]);
      rhs(p + a) = h(active[static_cast<std::size_t>(a)]);
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(K);
    if (!lu.isInvertible()) continue;
    const Eigen::VectorXd sol = lu.solve(rhs);
    const Eigen::VectorXd z = sol.head(p);
    if ((sol.tail(s).array() < -1e-12).any()) continue;
    if (((G * z - h).array() > 1e-10).any()) continue;
    const double dist = (z - v).norm();
    if (dist < best_dist) {
      best_dist = dist;
      best = z;
    }
  }
  return best;
}

}  // namespace cvxdp::testing
