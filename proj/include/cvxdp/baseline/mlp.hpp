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

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "cvxdp/core/error.hpp"
#include "cvxdp/core/json_io.hpp"
#include "cvxdp/core/rng.hpp"

namespace cvxdp::baseline {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

enum class LossKind { kMse, kCrossEntropy };

// One-hidden-layer ReLU network x -> A^T relu(U x). The parameters live in
// one flat vector [U (m x d, row-major), A (m x k, row-major)] so that the
// optimizers can treat every model alike.
struct Mlp {
  Eigen::Index m = 200;
  Eigen::Index d = 1;
  Eigen::Index k = 1;
  Eigen::VectorXd theta;

  Eigen::Index NumParams() const { return m * d + m * k; }
  Eigen::Map<RowMatrix> U() { return {theta.data(), m, d}; }
  Eigen::Map<const RowMatrix> U() const { return {theta.data(), m, d}; }
  Eigen::Map<RowMatrix> A() { return {theta.data() + m * d, m, k}; }
  Eigen::Map<const RowMatrix> A() const { return {theta.data() + m * d, m, k}; }

  void Validate() const {
    Require(m >= 1 && d >= 1 && k >= 1, ErrorKind::kShape, "MLP needs m, d, k >= 1");
    Require(theta.size() == NumParams(), ErrorKind::kShape, "MLP parameter vector has the wrong size");
    Require(theta.allFinite(), ErrorKind::kNumeric, "MLP has non-finite weights");
  }
};

// Hidden weights N(0, 1/d), output weights N(0, 1/m), from the init stream.
inline Mlp MakeMlp(Eigen::Index d, Eigen::Index m, Eigen::Index k, std::uint64_t seed) {
  Require(m >= 1 && d >= 1 && k >= 1, ErrorKind::kShape, "MLP needs m, d, k >= 1");
  Mlp net;
  net.m = m;
  net.d = d;
  net.k = k;
  net.theta.resize(net.NumParams());
  Engine engine = MakeEngine(seed, kInitStream);
  const double su = 1.0 / std::sqrt(static_cast<double>(d));
  const double sa = 1.0 / std::sqrt(static_cast<double>(m));
  for (Eigen::Index i = 0; i < m * d; ++i) net.theta(i) = su * StandardNormal(engine);
  for (Eigen::Index i = m * d; i < net.NumParams(); ++i) net.theta(i) = sa * StandardNormal(engine);
  return net;
}

inline Eigen::VectorXd MlpForward(const Mlp& net, const Eigen::Ref<const Eigen::VectorXd>& x) {
  Require(x.size() == net.d, ErrorKind::kShape,
          "MLP input has dimension " + std::to_string(x.size()) + ", expected " +
              std::to_string(net.d));
  const Eigen::VectorXd hidden = (net.U() * x).cwiseMax(0.0);
  return net.A().transpose() * hidden;
}

struct MlpSampleResult {
  double loss = 0.0;
  Eigen::VectorXd gradient;
};

// Data-term loss and its gradient, flattened like theta. The ReLU
// derivative at exactly zero is taken as 0. `target` holds the class index
// (cross-entropy) or is ignored in favour of `y` (MSE).
inline MlpSampleResult MlpPerSampleGrad(const Mlp& net, const Eigen::Ref<const Eigen::VectorXd>& x,
                                        LossKind kind, int label,
                                        const Eigen::Ref<const Eigen::VectorXd>& y) {
  Require(x.size() == net.d, ErrorKind::kShape, "MLP input has the wrong dimension");
  const Eigen::VectorXd pre = net.U() * x;
  const Eigen::VectorXd hidden = pre.cwiseMax(0.0);
  const Eigen::VectorXd out = net.A().transpose() * hidden;

  MlpSampleResult r;
  Eigen::VectorXd residual;
  if (kind == LossKind::kCrossEntropy) {
    Require(net.k >= 2, ErrorKind::kShape, "cross-entropy needs k >= 2");
    Require(label >= 0 && label < net.k, ErrorKind::kDomain,
            "label " + std::to_string(label) + " outside [0, " + std::to_string(net.k) + ")");
    const double mx = out.maxCoeff();
    const Eigen::VectorXd e = (out.array() - mx).exp();
    const double z = e.sum();
    r.loss = mx + std::log(z) - out(label);
    residual = e / z;
    residual(label) -= 1.0;
  } else {
    Require(y.size() == net.k, ErrorKind::kShape, "MSE target has the wrong length");
    residual = out - y;
    r.loss = 0.5 * residual.squaredNorm();
  }

  r.gradient.resize(net.NumParams());
  Eigen::Map<RowMatrix> gU(r.gradient.data(), net.m, net.d);
  Eigen::Map<RowMatrix> gA(r.gradient.data() + net.m * net.d, net.m, net.k);
  gA.noalias() = hidden * residual.transpose();
  const Eigen::VectorXd dpre =
      (net.A() * residual).cwiseProduct((pre.array() > 0.0).cast<double>().matrix());
  gU.noalias() = dpre * x.transpose();
  return r;
}

inline Json MlpToJson(const Mlp& net) {
  net.Validate();
  Json j;
  j["format"] = "cvxdp-mlp";
  j["version"] = 1;
  j["m"] = net.m;
  j["d"] = net.d;
  j["k"] = net.k;
  const auto U = net.U();
  const auto A = net.A();
  j["U"] = std::vector<double>(U.data(), U.data() + U.size());
  j["A"] = std::vector<double>(A.data(), A.data() + A.size());
  return j;
}

inline Mlp MlpFromJson(const Json& j) {
  Require(JsonField<std::string>(j, "format") == "cvxdp-mlp", ErrorKind::kFormat,
          "not an MLP checkpoint");
  Mlp net;
  net.m = JsonField<Eigen::Index>(j, "m");
  net.d = JsonField<Eigen::Index>(j, "d");
  net.k = JsonField<Eigen::Index>(j, "k");
  Require(net.m >= 1 && net.d >= 1 && net.k >= 1, ErrorKind::kFormat, "MLP checkpoint has invalid sizes");
  const auto U = JsonField<std::vector<double>>(j, "U");
  const auto A = JsonField<std::vector<double>>(j, "A");
  Require(static_cast<Eigen::Index>(U.size()) == net.m * net.d &&
              static_cast<Eigen::Index>(A.size()) == net.m * net.k,
          ErrorKind::kFormat, "MLP checkpoint arrays have the wrong length");
  net.theta.resize(net.NumParams());
  std::copy(U.begin(), U.end(), net.theta.data());
  std::copy(A.begin(), A.end(), net.theta.data() + net.m * net.d);
  return net;
}

inline void SaveMlp(const std::filesystem::path& path, const Mlp& net) {
  WriteJsonFile(path, MlpToJson(net));
}

inline Mlp LoadMlp(const std::filesystem::path& path) { return MlpFromJson(ReadJsonFile(path)); }

}  // namespace cvxdp::baseline
