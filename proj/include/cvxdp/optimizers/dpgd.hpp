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
#include <cstdint>
#include <functional>
#include <string>

#include "cvxdp/core/error.hpp"
#include "cvxdp/core/rng.hpp"
#include "cvxdp/optimizers/projection.hpp"

namespace cvxdp::optimizers {

// Gradient of the loss of sample i at theta.
using GradientOracle = std::function<Eigen::VectorXd(const Eigen::VectorXd& theta, Eigen::Index i)>;

struct DpgdConfig {
  double L = 1.0;  // gradient norm bound; per-sample gradients are clipped to it
  std::int64_t T = 1;
  double sigma = 0.0;  // std of the Gaussian added to the full-batch mean gradient
  double eta = 0.1;
  std::uint64_t seed = 0;
};

// Receives t, the running average of theta_1..theta_t after step t, and the
// noise engine state.
using IterateHook =
    std::function<void(std::int64_t t, const Eigen::VectorXd& average, const Engine& noise)>;

// Full-batch noisy projected gradient descent from theta_0 = 0; returns the
// average of theta_1..theta_T.
inline Eigen::VectorXd DpgdRun(Eigen::Index n, Eigen::Index p, const GradientOracle& grad,
                               const ConstraintSet& constraint, const DpgdConfig& cfg,
                               const IterateHook& hook = {}) {
  Require(n >= 1 && p >= 1, ErrorKind::kConfig, "DP-GD needs n >= 1 and p >= 1");
  Require(cfg.L > 0.0, ErrorKind::kConfig, "gradient bound L must be positive");
  Require(cfg.T >= 1, ErrorKind::kConfig, "T must be >= 1");
  Require(cfg.sigma >= 0.0 && std::isfinite(cfg.sigma), ErrorKind::kConfig, "sigma must be >= 0");
  Require(cfg.eta > 0.0, ErrorKind::kConfig, "eta must be positive");
  Engine noise = MakeEngine(cfg.seed, kNoiseStream);
  Eigen::VectorXd theta = Eigen::VectorXd::Zero(p);
  Eigen::VectorXd average = Eigen::VectorXd::Zero(p);
  Eigen::VectorXd g(p);
  for (std::int64_t t = 0; t < cfg.T; ++t) {
    g.setZero();
    for (Eigen::Index i = 0; i < n; ++i) {
      const Eigen::VectorXd gi = grad(theta, i);
      Require(gi.size() == p, ErrorKind::kShape, "gradient oracle returned the wrong size");
      g.noalias() += gi * ClipScale(gi.norm(), cfg.L);
    }
    g /= static_cast<double>(n);
    if (cfg.sigma > 0.0) {
      for (Eigen::Index c = 0; c < p; ++c) g(c) += cfg.sigma * StandardNormal(noise);
    }
    theta = Project(theta - cfg.eta * g, constraint);
    Require(theta.allFinite(), ErrorKind::kNumeric,
            "DP-GD iterate became non-finite at step " + std::to_string(t + 1));
    average += theta;
    if (hook) hook(t + 1, average / static_cast<double>(t + 1), noise);
  }
  return average / static_cast<double>(cfg.T);
}

}  // namespace cvxdp::optimizers
