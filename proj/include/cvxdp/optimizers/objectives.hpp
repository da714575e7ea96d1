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

#include <concepts>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "cvxdp/baseline/mlp.hpp"
#include "cvxdp/convex_dual/arrangement.hpp"
#include "cvxdp/convex_dual/model.hpp"
#include "cvxdp/core/error.hpp"
#include "cvxdp/data/dataset.hpp"
#include "cvxdp/optimizers/projection.hpp"

namespace cvxdp::optimizers {

using baseline::LossKind;

// What the private optimizers need from a model: a flat parameter vector, a
// ridge weight, and per-sample data-term gradients that can be clipped and
// summed without materializing them when the model allows it.
template <typename T>
concept SampleObjective = requires(T& t, const T& c, Eigen::Index i, double clip,
                                   Eigen::VectorXd& acc) {
  { c.NumSamples() } -> std::convertible_to<Eigen::Index>;
  { t.Params() } -> std::same_as<Eigen::VectorXd&>;
  { c.Lambda() } -> std::convertible_to<double>;
  // Adds min(1, clip / ||g_i||) g_i to acc and returns the data loss of i.
  { c.AccumulateClipped(i, clip, acc) } -> std::convertible_to<double>;
  { c.DataLoss(i) } -> std::convertible_to<double>;
  { c.SquaredInputNorm(i) } -> std::convertible_to<double>;
};

namespace internal {

inline void CheckLossKind(const data::Dataset& ds, LossKind kind, Eigen::Index k) {
  if (kind == LossKind::kCrossEntropy) {
    Require(ds.IsClassification(), ErrorKind::kConfig, "cross-entropy needs class labels");
    Require(k == ds.num_classes, ErrorKind::kShape, "model outputs do not match the class count");
  } else if (ds.IsClassification()) {
    Require(k == ds.num_classes, ErrorKind::kShape, "model outputs do not match the class count");
  } else {
    Require(k == 1, ErrorKind::kShape, "regression targets need a single output");
  }
}

// Residual d loss / d output and the loss for one sample.
inline double OutputResidual(const Eigen::VectorXd& out, LossKind kind, const data::Dataset& ds,
                             Eigen::Index i, Eigen::VectorXd& residual) {
  if (kind == LossKind::kCrossEntropy) {
    const int label = ds.labels[static_cast<std::size_t>(i)];
    const double mx = out.maxCoeff();
    residual = (out.array() - mx).exp();
    const double z = residual.sum();
    residual /= z;
    residual(label) -= 1.0;
    return mx + std::log(z) - out(label);
  }
  residual = out;
  if (ds.IsClassification()) {
    residual(ds.labels[static_cast<std::size_t>(i)]) -= 1.0;
  } else {
    residual(0) -= ds.targets(i);
  }
  return 0.5 * residual.squaredNorm();
}

}  // namespace internal

// Per-sample losses of a dual model over a fixed training set; gate bits are
// computed once since the gates never change.
class DualObjective {
 public:
  DualObjective(convex_dual::DualModel& model, const data::Dataset& ds, LossKind kind)
      : model_(model), ds_(ds), kind_(kind) {
    model.Validate();
    internal::CheckLossKind(ds, kind, model.k);
    X_ = convex_dual::AugmentData(model.bias, ds.X);
    masks_ = convex_dual::ComputeMasks(X_, model.arrangement);
  }

  Eigen::Index NumSamples() const { return X_.rows(); }
  Eigen::VectorXd& Params() { return model_.V; }
  double Lambda() const { return model_.lambda; }
  double SquaredInputNorm(Eigen::Index i) const { return X_.row(i).squaredNorm(); }
  const convex_dual::MaskTable& masks() const { return masks_; }

  double DataLoss(Eigen::Index i) const {
    Eigen::VectorXd residual;
    return internal::OutputResidual(Output(i), kind_, ds_, i, residual);
  }

  // The gradient is bits (x) x (x) residual, whose norm factorizes, so the
  // clipped sum is accumulated block by block.
  double AccumulateClipped(Eigen::Index i, double clip, Eigen::VectorXd& acc) const {
    Eigen::VectorXd residual;
    const double loss = internal::OutputResidual(Output(i), kind_, ds_, i, residual);
    const auto bits = masks_.row(static_cast<std::size_t>(i));
    double active = 0.0;
    for (auto b : bits) active += b;
    const Eigen::VectorXd x = X_.row(i).transpose();
    const double norm = residual.norm() * x.norm() * std::sqrt(active);
    const Eigen::VectorXd scaled = residual * ClipScale(norm, clip);
    Eigen::Map<convex_dual::RowMatrix> G(acc.data(), model_.P() * model_.d(), model_.k);
    const Eigen::Index d = model_.d();
    for (Eigen::Index g = 0; g < model_.P(); ++g) {
      if (bits[static_cast<std::size_t>(g)]) G.middleRows(g * d, d).noalias() += x * scaled.transpose();
    }
    return loss;
  }

 private:
  Eigen::VectorXd Output(Eigen::Index i) const {
    return convex_dual::Forward(model_, X_.row(i).transpose(), masks_.row(static_cast<std::size_t>(i)));
  }

  convex_dual::DualModel& model_;
  const data::Dataset& ds_;
  LossKind kind_;
  convex_dual::RowMatrix X_;
  convex_dual::MaskTable masks_;
};

// A linear model as a dual model with one all-zero gate: by the tie
// convention the gate is open for every input.
inline convex_dual::DualModel MakeLinearModel(Eigen::Index raw_dim, Eigen::Index k, double lambda,
                                              bool bias) {
  convex_dual::DualModel m;
  m.arrangement.gates = convex_dual::RowMatrix::Zero(1, raw_dim + (bias ? 1 : 0));
  m.k = k;
  m.lambda = lambda;
  m.bias = bias;
  m.V = Eigen::VectorXd::Zero(m.NumParams());
  return m;
}

class MlpObjective {
 public:
  MlpObjective(baseline::Mlp& net, const data::Dataset& ds, LossKind kind, double lambda, bool bias)
      : net_(net), ds_(ds), kind_(kind), lambda_(lambda) {
    net.Validate();
    internal::CheckLossKind(ds, kind, net.k);
    X_ = convex_dual::AugmentData(bias, ds.X);
    Require(X_.cols() == net.d, ErrorKind::kShape, "MLP input dimension does not match the data");
  }

  Eigen::Index NumSamples() const { return X_.rows(); }
  Eigen::VectorXd& Params() { return net_.theta; }
  double Lambda() const { return lambda_; }
  double SquaredInputNorm(Eigen::Index i) const { return X_.row(i).squaredNorm(); }

  double DataLoss(Eigen::Index i) const { return Sample(i).loss; }

  double AccumulateClipped(Eigen::Index i, double clip, Eigen::VectorXd& acc) const {
    const auto r = Sample(i);
    acc.noalias() += r.gradient * ClipScale(r.gradient.norm(), clip);
    return r.loss;
  }

 private:
  baseline::MlpSampleResult Sample(Eigen::Index i) const {
    const Eigen::VectorXd x = X_.row(i).transpose();
    Eigen::VectorXd y = Eigen::VectorXd::Zero(net_.k);
    int label = 0;
    if (ds_.IsClassification()) {
      label = ds_.labels[static_cast<std::size_t>(i)];
      if (kind_ == LossKind::kMse) y(label) = 1.0;
    } else {
      y(0) = ds_.targets(i);
    }
    return baseline::MlpPerSampleGrad(net_, x, kind_, label, y);
  }

  baseline::Mlp& net_;
  const data::Dataset& ds_;
  LossKind kind_;
  double lambda_;
  convex_dual::RowMatrix X_;
};

// Mean data loss plus the ridge term over the whole training set.
template <SampleObjective Obj>
double TrainingLoss(Obj& obj) {
  double total = 0.0;
  for (Eigen::Index i = 0; i < obj.NumSamples(); ++i) total += obj.DataLoss(i);
  return total / static_cast<double>(obj.NumSamples()) + 0.5 * obj.Lambda() * obj.Params().squaredNorm();
}

}  // namespace cvxdp::optimizers
