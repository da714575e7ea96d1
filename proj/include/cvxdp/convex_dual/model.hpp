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
#include <span>
#include <string>
#include <vector>

#include "cvxdp/convex_dual/arrangement.hpp"
#include "cvxdp/core/error.hpp"

namespace cvxdp::convex_dual {

// Stochastic strongly convex dual of a two-layer ReLU network: k linear
// models v_{i,c}, each restricted to the inputs that activate gate i.
//
// V is stored row-major as P x d x k, i.e. as a (P*d) x k matrix whose i-th
// block of d rows holds the slice v_i.
struct DualModel {
  Arrangement arrangement;
  Eigen::Index k = 1;
  double lambda = 0.0;
  // Inputs get a constant-1 feature appended before gates and model.
  bool bias = true;
  Eigen::VectorXd V;

  Eigen::Index P() const { return arrangement.P(); }
  Eigen::Index d() const { return arrangement.d(); }
  Eigen::Index NumParams() const { return P() * d() * k; }

  Eigen::Map<RowMatrix> Weights() { return {V.data(), P() * d(), k}; }
  Eigen::Map<const RowMatrix> Weights() const { return {V.data(), P() * d(), k}; }

  void Validate() const {
    Require(k >= 1, ErrorKind::kShape, "dual model needs k >= 1");
    Require(V.size() == NumParams(), ErrorKind::kShape,
            "dual model parameter count " + std::to_string(V.size()) +
                " does not match P*d*k = " + std::to_string(NumParams()));
    Require(V.allFinite(), ErrorKind::kNumeric, "dual model has non-finite entries");
  }
};

// raw_dim is the data dimension before the optional bias feature.
inline DualModel MakeDualModel(Eigen::Index raw_dim, Eigen::Index P, Eigen::Index k,
                               double lambda, bool bias, std::uint64_t gate_seed) {
  DualModel m;
  m.arrangement = SampleArrangement(raw_dim + (bias ? 1 : 0), P, gate_seed);
  m.k = k;
  m.lambda = lambda;
  m.bias = bias;
  m.V = Eigen::VectorXd::Zero(m.NumParams());
  return m;
}

// Appends the bias feature when the model uses one.
inline Eigen::VectorXd AugmentInput(const DualModel& model,
                                    const Eigen::Ref<const Eigen::VectorXd>& raw) {
  if (!model.bias) return raw;
  Eigen::VectorXd x(raw.size() + 1);
  x.head(raw.size()) = raw;
  x(raw.size()) = 1.0;
  return x;
}

inline RowMatrix AugmentData(bool bias, const Eigen::Ref<const RowMatrix>& X) {
  if (!bias) return X;
  RowMatrix out(X.rows(), X.cols() + 1);
  out.leftCols(X.cols()) = X;
  out.col(X.cols()).setOnes();
  return out;
}

namespace internal {

inline void CheckForwardShapes(const DualModel& model, Eigen::Index x_size,
                               std::size_t bits_size) {
  Require(x_size == model.d(), ErrorKind::kShape,
          "forward: input dimension " + std::to_string(x_size) +
              " != model dimension " + std::to_string(model.d()));
  Require(bits_size == static_cast<std::size_t>(model.P()), ErrorKind::kShape,
          "forward: " + std::to_string(bits_size) + " gate bits for " +
              std::to_string(model.P()) + " gates");
  Require(model.V.size() == model.NumParams(), ErrorKind::kShape,
          "forward: parameter vector has the wrong size");
}

}  // namespace internal

// output_c = sum_i bits[i] * x . V[i, :, c]. x is already augmented.
inline Eigen::VectorXd Forward(const DualModel& model,
                               const Eigen::Ref<const Eigen::VectorXd>& x,
                               std::span<const std::uint8_t> bits) {
  internal::CheckForwardShapes(model, x.size(), bits.size());
  const auto W = model.Weights();
  const Eigen::Index d = model.d();
  Eigen::VectorXd out = Eigen::VectorXd::Zero(model.k);
  for (Eigen::Index i = 0; i < model.P(); ++i) {
    if (!bits[static_cast<std::size_t>(i)]) continue;
    out.noalias() += W.middleRows(i * d, d).transpose() * x;
  }
  return out;
}

// Gates and forward pass on a raw (un-augmented) input.
inline Eigen::VectorXd Predict(const DualModel& model,
                               const Eigen::Ref<const Eigen::VectorXd>& raw) {
  const Eigen::VectorXd x = AugmentInput(model, raw);
  const auto bits = GateBits(model.arrangement, x);
  return Forward(model, x, bits);
}

struct SampleLossResult {
  double loss = 0.0;
  Eigen::VectorXd gradient;
  // Gradient of the data term only; clipping acts on this part.
  Eigen::VectorXd data_term_gradient;
};

namespace internal {

// Writes the data-term gradient bits[i] * x * residual_c into `grad`. The
// gradient is the outer product of the masked feature vector and the
// residual, so its norm is ||residual|| * ||x|| * sqrt(#active gates).
inline void MaskedOuterProduct(const DualModel& model,
                               const Eigen::Ref<const Eigen::VectorXd>& x,
                               std::span<const std::uint8_t> bits,
                               const Eigen::Ref<const Eigen::VectorXd>& residual,
                               Eigen::VectorXd& grad) {
  grad.setZero(model.NumParams());
  Eigen::Map<RowMatrix> G(grad.data(), model.P() * model.d(), model.k);
  const Eigen::Index d = model.d();
  for (Eigen::Index i = 0; i < model.P(); ++i) {
    if (!bits[static_cast<std::size_t>(i)]) continue;
    G.middleRows(i * d, d).noalias() = x * residual.transpose();
  }
}

inline SampleLossResult Finish(const DualModel& model, double data_loss,
                               Eigen::VectorXd data_grad) {
  SampleLossResult r;
  r.loss = data_loss + 0.5 * model.lambda * model.V.squaredNorm();
  r.gradient = data_grad + model.lambda * model.V;
  r.data_term_gradient = std::move(data_grad);
  return r;
}

}  // namespace internal

// loss = 1/2 ||forward(x) - y||^2 + lambda/2 ||V||^2.
inline SampleLossResult SampleLossMse(const DualModel& model,
                                      const Eigen::Ref<const Eigen::VectorXd>& x,
                                      const Eigen::Ref<const Eigen::VectorXd>& y,
                                      std::span<const std::uint8_t> bits) {
  Require(y.size() == model.k, ErrorKind::kShape,
          "MSE loss: target has " + std::to_string(y.size()) + " entries, model has k = " +
              std::to_string(model.k));
  const Eigen::VectorXd residual = Forward(model, x, bits) - y;
  Eigen::VectorXd grad;
  internal::MaskedOuterProduct(model, x, bits, residual, grad);
  return internal::Finish(model, 0.5 * residual.squaredNorm(), std::move(grad));
}

// Numerically stable softmax.
inline Eigen::VectorXd Softmax(const Eigen::Ref<const Eigen::VectorXd>& logits) {
  const double m = logits.maxCoeff();
  Eigen::VectorXd e = (logits.array() - m).exp();
  return e / e.sum();
}

inline double LogSumExp(const Eigen::Ref<const Eigen::VectorXd>& logits) {
  const double m = logits.maxCoeff();
  return m + std::log((logits.array() - m).exp().sum());
}

// Softmax cross-entropy on the k logits.
inline SampleLossResult SampleLossCrossEntropy(
    const DualModel& model, const Eigen::Ref<const Eigen::VectorXd>& x, int label,
    std::span<const std::uint8_t> bits) {
  Require(model.k >= 2, ErrorKind::kShape, "cross-entropy needs k >= 2 classes");
  Require(label >= 0 && label < model.k, ErrorKind::kDomain,
          "cross-entropy: label " + std::to_string(label) + " outside [0, " +
              std::to_string(model.k) + ")");
  const Eigen::VectorXd logits = Forward(model, x, bits);
  Eigen::VectorXd residual = Softmax(logits);
  residual(label) -= 1.0;
  Eigen::VectorXd grad;
  internal::MaskedOuterProduct(model, x, bits, residual, grad);
  return internal::Finish(model, LogSumExp(logits) - logits(label), std::move(grad));
}

// Smoothness constant ||x||^2 + lambda of the per-sample loss as stated for
// a single active gate.
inline double LipschitzBeta(const Eigen::Ref<const Eigen::VectorXd>& x, double lambda) {
  return x.squaredNorm() + lambda;
}

// Exact gradient-Lipschitz constant of the per-sample MSE loss. The Hessian
// of the data term is a a^T with a = (bits_1 x, ..., bits_P x), so its norm
// is (#active gates) * ||x||^2; this exceeds LipschitzBeta whenever two or
// more gates fire.
inline double ActiveGateSmoothness(const Eigen::Ref<const Eigen::VectorXd>& x,
                                   std::span<const std::uint8_t> bits, double lambda) {
  double active = 0.0;
  for (auto b : bits) active += b ? 1.0 : 0.0;
  return active * x.squaredNorm() + lambda;
}

}  // namespace cvxdp::convex_dual
