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
#include <map>
#include <string>
#include <vector>

#include "cvxdp/convex_dual/enumerate.hpp"
#include "cvxdp/core/error.hpp"

namespace cvxdp::convex_dual {

// Two-layer scalar-output ReLU network x -> sum_j (x . u_j)_+ alpha_j.
struct ReluNetSpec {
  Eigen::MatrixXd U;       // m x d, one neuron per row
  Eigen::VectorXd alphas;  // m
  double lambda = 0.0;
};

struct DualPoint {
  std::vector<Pattern> patterns;
  std::vector<Eigen::VectorXd> v;
  std::vector<Eigen::VectorXd> w;
};

struct EmbeddingResult {
  DualPoint point;
  ReluNetSpec balanced;
  double relu_objective = 0.0;
  double dual_objective = 0.0;
  // Smallest entry over all (2 D_i - I) X v_i and (2 D_i - I) X w_i.
  double min_cone_slack = std::numeric_limits<double>::infinity();
  // Neurons with u_j = 0 or alpha_j = 0; they contribute nothing.
  std::vector<int> skipped;
  bool patterns_shared = false;
};

inline Pattern NeuronPattern(const Eigen::MatrixXd& X, const Eigen::Ref<const Eigen::VectorXd>& u) {
  const Eigen::VectorXd s = X * u;
  Pattern p(static_cast<std::size_t>(s.size()));
  for (Eigen::Index j = 0; j < s.size(); ++j) p[static_cast<std::size_t>(j)] = s(j) >= 0.0 ? 1 : 0;
  return p;
}

// 1/2 ||sum_j (X u_j)_+ alpha_j - y||^2 + lambda/2 sum_j (||u_j||^2 + alpha_j^2).
inline double ReluObjective(const ReluNetSpec& net, const Eigen::MatrixXd& X,
                            const Eigen::VectorXd& y) {
  const Eigen::VectorXd pred = (X * net.U.transpose()).cwiseMax(0.0) * net.alphas;
  return 0.5 * (pred - y).squaredNorm() +
         0.5 * net.lambda * (net.U.squaredNorm() + net.alphas.squaredNorm());
}

// 1/2 ||sum_i D_i X (v_i - w_i) - y||^2 + lambda sum_i (||v_i|| + ||w_i||).
inline double DualObjective(const DualPoint& point, double lambda, const Eigen::MatrixXd& X,
                            const Eigen::VectorXd& y) {
  Eigen::VectorXd pred = Eigen::VectorXd::Zero(X.rows());
  double penalty = 0.0;
  for (std::size_t i = 0; i < point.patterns.size(); ++i) {
    const Eigen::VectorXd proj = X * (point.v[i] - point.w[i]);
    for (Eigen::Index j = 0; j < X.rows(); ++j) {
      if (point.patterns[i][static_cast<std::size_t>(j)]) pred(j) += proj(j);
    }
    penalty += point.v[i].norm() + point.w[i].norm();
  }
  return 0.5 * (pred - y).squaredNorm() + lambda * penalty;
}

inline double MinConeSlack(const DualPoint& point, const Eigen::MatrixXd& X) {
  double slack = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < point.patterns.size(); ++i) {
    for (const auto* vec : {&point.v[i], &point.w[i]}) {
      const Eigen::VectorXd s = X * (*vec);
      for (Eigen::Index j = 0; j < X.rows(); ++j) {
        const double sign = point.patterns[i][static_cast<std::size_t>(j)] ? 1.0 : -1.0;
        slack = std::min(slack, sign * s(j));
      }
    }
  }
  return slack;
}

// Maps a ReLU network onto a feasible point of the constrained group-lasso
// problem whose objective never exceeds the network's.
inline EmbeddingResult EmbedReluIntoDual(const ReluNetSpec& net, const Eigen::MatrixXd& X,
                                         const Eigen::VectorXd& y) {
  Require(net.U.rows() == net.alphas.size(), ErrorKind::kShape,
          "network has " + std::to_string(net.U.rows()) + " neurons but " +
              std::to_string(net.alphas.size()) + " output weights");
  Require(net.U.cols() == X.cols(), ErrorKind::kShape,
          "network input dimension does not match the data");
  Require(X.rows() == y.size(), ErrorKind::kShape, "data and targets differ in length");
  Require(net.lambda >= 0.0, ErrorKind::kDomain, "lambda must be non-negative");

  EmbeddingResult out;
  out.balanced = net;
  std::map<Pattern, std::size_t> slot;
  for (Eigen::Index j = 0; j < net.U.rows(); ++j) {
    const double un = net.U.row(j).norm();
    const double a = net.alphas(j);
    if (un == 0.0 || a == 0.0) {
      out.skipped.push_back(static_cast<int>(j));
      out.balanced.U.row(j).setZero();
      out.balanced.alphas(j) = 0.0;
      continue;
    }
    // (x.(g u))_+ (a/g) = (x.u)_+ a for g > 0; g = sqrt(|a|/||u||) balances.
    const double g = std::sqrt(std::abs(a) / un);
    out.balanced.U.row(j) *= g;
    out.balanced.alphas(j) /= g;

    const Eigen::VectorXd u = out.balanced.U.row(j).transpose();
    Pattern p = NeuronPattern(X, u);
    auto [it, fresh] = slot.emplace(p, out.point.patterns.size());
    if (fresh) {
      out.point.patterns.push_back(std::move(p));
      out.point.v.push_back(Eigen::VectorXd::Zero(X.cols()));
      out.point.w.push_back(Eigen::VectorXd::Zero(X.cols()));
    } else {
      out.patterns_shared = true;
    }
    const double aj = out.balanced.alphas(j);
    if (aj >= 0.0) {
      out.point.v[it->second] += u * aj;
    } else {
      out.point.w[it->second] -= u * aj;
    }
  }
  out.relu_objective = ReluObjective(out.balanced, X, y);
  out.dual_objective = DualObjective(out.point, net.lambda, X, y);
  out.min_cone_slack = MinConeSlack(out.point, X);
  return out;
}

}  // namespace cvxdp::convex_dual
