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
#include <span>
#include <string>
#include <vector>

#include "cvxdp/core/error.hpp"
#include "cvxdp/core/rng.hpp"

namespace cvxdp::convex_dual {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Gate vectors u_1..u_P (rows) that define the sampled activation patterns.
struct Arrangement {
  RowMatrix gates;  // P x d
  std::uint64_t seed = 0;

  Eigen::Index P() const { return gates.rows(); }
  Eigen::Index d() const { return gates.cols(); }
};

// P i.i.d. N(0, I_d) gate rows drawn from the gate stream of `seed`.
inline Arrangement SampleArrangement(Eigen::Index d, Eigen::Index P,
                                     std::uint64_t seed) {
  Require(d >= 1 && P >= 1, ErrorKind::kDomain,
          "arrangement needs d >= 1 and P >= 1");
  Engine engine = MakeEngine(seed, kGateStream);
  Arrangement arr;
  arr.seed = seed;
  arr.gates.resize(P, d);
  for (Eigen::Index i = 0; i < P; ++i) {
    for (Eigen::Index c = 0; c < d; ++c) arr.gates(i, c) = StandardNormal(engine);
  }
  return arr;
}

// bits[i] = 1(u_i . x >= 0). The tie x.u == 0 maps to 1.
inline std::vector<std::uint8_t> GateBits(const Arrangement& arr,
                                          const Eigen::Ref<const Eigen::VectorXd>& x) {
  Require(x.size() == arr.d(), ErrorKind::kShape,
          "gate evaluation: input has dimension " + std::to_string(x.size()) +
              ", gates expect " + std::to_string(arr.d()));
  std::vector<std::uint8_t> bits(static_cast<std::size_t>(arr.P()));
  for (Eigen::Index i = 0; i < arr.P(); ++i) {
    bits[static_cast<std::size_t>(i)] = arr.gates.row(i).dot(x) >= 0.0 ? 1 : 0;
  }
  return bits;
}

// n x P activation table (D_i)_{jj} for a data matrix.
class MaskTable {
 public:
  MaskTable() = default;
  MaskTable(std::size_t n, std::size_t P) : n_(n), P_(P), bits_(n * P, 0) {}

  std::size_t n() const { return n_; }
  std::size_t P() const { return P_; }
  std::uint8_t operator()(std::size_t j, std::size_t i) const { return bits_[j * P_ + i]; }
  std::uint8_t& operator()(std::size_t j, std::size_t i) { return bits_[j * P_ + i]; }
  std::span<const std::uint8_t> row(std::size_t j) const {
    return {bits_.data() + j * P_, P_};
  }
  bool operator==(const MaskTable&) const = default;

 private:
  std::size_t n_ = 0;
  std::size_t P_ = 0;
  std::vector<std::uint8_t> bits_;
};

inline MaskTable ComputeMasks(const Eigen::Ref<const RowMatrix>& X,
                              const Arrangement& arr) {
  Require(X.cols() == arr.d(), ErrorKind::kShape,
          "mask computation: data has " + std::to_string(X.cols()) +
              " columns, gates expect " + std::to_string(arr.d()));
  const Eigen::MatrixXd products = X * arr.gates.transpose();  // n x P
  MaskTable table(static_cast<std::size_t>(X.rows()), static_cast<std::size_t>(arr.P()));
  for (Eigen::Index j = 0; j < X.rows(); ++j) {
    for (Eigen::Index i = 0; i < arr.P(); ++i) {
      table(static_cast<std::size_t>(j), static_cast<std::size_t>(i)) =
          products(j, i) >= 0.0 ? 1 : 0;
    }
  }
  return table;
}

}  // namespace cvxdp::convex_dual
