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
#include <numeric>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "cvxdp/core/error.hpp"
#include "cvxdp/core/rng.hpp"
#include "cvxdp/data/dataset.hpp"
#include "cvxdp/optimizers/objectives.hpp"
#include "cvxdp/optimizers/trace.hpp"

namespace cvxdp::optimizers {

// Learning rate for iteration t (0-based); constant when unset.
using Schedule = std::function<double(std::int64_t)>;

struct DpsgdConfig {
  double C = 1.0;      // per-sample clip norm; +inf disables clipping
  double sigma = 1.0;  // noise multiplier; std on the batch mean is C sigma / b
  Eigen::Index b = 1;
  double eta = 0.1;
  Schedule schedule;
  int epochs = 1;
  std::uint64_t batch_seed = 0;
  std::uint64_t noise_seed = 0;
};

struct NoisyCgdConfig {
  double C = 1.0;
  double sigma = 1.0;  // same multiplier convention as DP-SGD
  Eigen::Index b = 1;
  double eta = 0.1;
  int epochs = 1;
  std::uint64_t batch_seed = 0;  // fixes the partition
  std::uint64_t noise_seed = 0;
};

// Called after every epoch; may fill in test accuracy and epsilon.
using EpochHook = std::function<void(EpochRecord&)>;

namespace internal {

inline void CheckNoiseConfig(double C, double sigma, Eigen::Index b, Eigen::Index n, double eta,
                             int epochs) {
  Require(C > 0.0, ErrorKind::kConfig, "clip norm C must be positive");
  Require(sigma >= 0.0 && std::isfinite(sigma), ErrorKind::kConfig, "sigma must be finite and >= 0");
  Require(sigma == 0.0 || std::isfinite(C), ErrorKind::kConfig,
          "noise needs a finite clip norm");
  Require(b >= 1 && b <= n, ErrorKind::kConfig,
          "batch size " + std::to_string(b) + " must lie in [1, n = " + std::to_string(n) + "]");
  Require(eta > 0.0 && std::isfinite(eta), ErrorKind::kConfig, "eta must be positive");
  Require(epochs >= 1, ErrorKind::kConfig, "epochs must be >= 1");
}

// theta <- theta - eta (sum_clipped / b + lambda theta + Z), Z ~ N(0, (C sigma / b)^2 I).
// Samples are reduced in the order given, so results do not depend on
// anything but the inputs and the engines.
template <SampleObjective Obj>
void PrivateStep(Obj& obj, std::span<const Eigen::Index> batch, double C, double sigma,
                 double eta, Engine& noise, Eigen::VectorXd& acc, std::int64_t iteration) {
  acc.setZero();
  for (Eigen::Index i : batch) obj.AccumulateClipped(i, C, acc);
  const double b = static_cast<double>(batch.size());
  Eigen::VectorXd& theta = obj.Params();
  acc /= b;
  acc.noalias() += obj.Lambda() * theta;
  if (sigma > 0.0) {
    const double std_dev = C * sigma / b;
    for (Eigen::Index p = 0; p < acc.size(); ++p) acc(p) += std_dev * StandardNormal(noise);
  }
  theta.noalias() -= eta * acc;
  Require(theta.allFinite(), ErrorKind::kNumeric,
          "parameters became non-finite at iteration " + std::to_string(iteration) +
              " (try a smaller learning rate)");
}

// "<batch stream digest>-<noise stream digest>".
inline std::string StreamDigest(const Engine& batch, const Engine& noise) {
  return EngineDigest(batch) + "-" + EngineDigest(noise);
}

}  // namespace internal

// DP-SGD with fresh size-b subsets drawn without replacement each iteration
// and floor(n / b) iterations per epoch.
template <SampleObjective Obj>
TrainTrace DpsgdRun(Obj& obj, const DpsgdConfig& cfg, const EpochHook& hook = {}) {
  const Eigen::Index n = obj.NumSamples();
  internal::CheckNoiseConfig(cfg.C, cfg.sigma, cfg.b, n, cfg.eta, cfg.epochs);
  Engine batch_rng = MakeEngine(cfg.batch_seed, kBatchStream);
  Engine noise_rng = MakeEngine(cfg.noise_seed, kNoiseStream);
  std::vector<Eigen::Index> pool(static_cast<std::size_t>(n));
  std::iota(pool.begin(), pool.end(), Eigen::Index{0});
  Eigen::VectorXd acc(obj.Params().size());
  const Eigen::Index per_epoch = n / cfg.b;
  const auto b = static_cast<std::size_t>(cfg.b);

  TrainTrace trace;
  std::int64_t t = 0;
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    for (Eigen::Index it = 0; it < per_epoch; ++it, ++t) {
      // Partial Fisher-Yates: the first b entries become a uniform subset.
      for (std::size_t a = 0; a < b; ++a) {
        std::uniform_int_distribution<std::size_t> pick(a, pool.size() - 1);
        std::swap(pool[a], pool[pick(batch_rng)]);
      }
      const double eta = cfg.schedule ? cfg.schedule(t) : cfg.eta;
      internal::PrivateStep(obj, std::span<const Eigen::Index>(pool.data(), b), cfg.C, cfg.sigma,
                            eta, noise_rng, acc, t);
    }
    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_loss = TrainingLoss(obj);
    rec.rng_state_digest = internal::StreamDigest(batch_rng, noise_rng);
    if (hook) hook(rec);
    trace.epochs.push_back(std::move(rec));
  }
  return trace;
}

// NoisyCGD: one seeded partition into n / b disjoint batches, visited in
// the same cyclic order every epoch.
template <SampleObjective Obj>
TrainTrace NoisyCgdRun(Obj& obj, const NoisyCgdConfig& cfg, const EpochHook& hook = {}) {
  const Eigen::Index n = obj.NumSamples();
  internal::CheckNoiseConfig(cfg.C, cfg.sigma, cfg.b, n, cfg.eta, cfg.epochs);
  Require(n % cfg.b == 0, ErrorKind::kConfig,
          "NoisyCGD needs b to divide n (b = " + std::to_string(cfg.b) + ", n = " +
              std::to_string(n) + ")");
  Require(obj.Lambda() > 0.0, ErrorKind::kConfig, "NoisyCGD needs lambda > 0");

  TrainTrace trace;
  double max_sq = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) max_sq = std::max(max_sq, obj.SquaredInputNorm(i));
  if (cfg.eta * (max_sq + obj.Lambda()) >= 2.0) {
    trace.warnings.push_back("eta * (max ||x||^2 + lambda) = " +
                             ExactDouble(cfg.eta * (max_sq + obj.Lambda())) +
                             " >= 2; the final-iterate bound does not apply");
  }

  const auto batches = data::PartitionDisjoint(n, cfg.b, cfg.batch_seed);
  Engine batch_rng = MakeEngine(cfg.batch_seed, kBatchStream);
  Engine noise_rng = MakeEngine(cfg.noise_seed, kNoiseStream);
  Eigen::VectorXd acc(obj.Params().size());
  std::int64_t t = 0;
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    for (const auto& batch : batches) {
      internal::PrivateStep(obj, std::span<const Eigen::Index>(batch), cfg.C, cfg.sigma, cfg.eta,
                            noise_rng, acc, t++);
    }
    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_loss = TrainingLoss(obj);
    rec.rng_state_digest = internal::StreamDigest(batch_rng, noise_rng);
    if (hook) hook(rec);
    trace.epochs.push_back(std::move(rec));
  }
  return trace;
}

}  // namespace cvxdp::optimizers
