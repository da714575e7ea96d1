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

#include <Eigen/Dense>

#include <cmath>
#include <filesystem>
#include <random>

#include "cvxdp/baseline/mlp.hpp"
#include "gtest/gtest.h"

namespace cvxdp::baseline {
namespace {

Eigen::VectorXd RandomVector(std::mt19937_64& g, Eigen::Index n) {
  std::normal_distribution<double> nd;
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = nd(g);
  return v;
}

TEST(MlpForwardTest, IdentityWeightsPassNonNegativeInput) {
  Mlp net = MakeMlp(3, 3, 3, 0);
  net.U() = RowMatrix::Identity(3, 3);
  net.A() = RowMatrix::Identity(3, 3);
  const Eigen::Vector3d x(0.5, 0.0, 2.0);
  EXPECT_EQ(MlpForward(net, x), Eigen::VectorXd(x));
  EXPECT_EQ(MlpForward(net, -x), Eigen::VectorXd::Zero(3));
}

TEST(MlpForwardTest, PositiveRescalingInvariance) {
  std::mt19937_64 g(1);
  Mlp net = MakeMlp(4, 7, 3, 2);
  Mlp scaled = net;
  scaled.U() *= 3.7;
  scaled.A() /= 3.7;
  for (int t = 0; t < 20; ++t) {
    const Eigen::VectorXd x = RandomVector(g, 4);
    EXPECT_LT((MlpForward(net, x) - MlpForward(scaled, x)).norm(), 1e-12);
  }
}

TEST(MlpInitTest, DeterministicAndScaled) {
  const Mlp a = MakeMlp(50, 400, 2, 9), b = MakeMlp(50, 400, 2, 9);
  EXPECT_EQ(a.theta, b.theta);
  const double var_u = a.U().squaredNorm() / static_cast<double>(a.U().size());
  const double var_a = a.A().squaredNorm() / static_cast<double>(a.A().size());
  EXPECT_NEAR(var_u, 1.0 / 50, 0.1 / 50);
  EXPECT_NEAR(var_a, 1.0 / 400, 0.3 / 400);
}

double FiniteDifferenceError(Mlp net, const Eigen::VectorXd& x, LossKind kind, int label,
                             const Eigen::VectorXd& y) {
  const Eigen::VectorXd analytic = MlpPerSampleGrad(net, x, kind, label, y).gradient;
  double worst = 0.0;
  for (Eigen::Index p = 0; p < net.NumParams(); ++p) {
    const double keep = net.theta(p);
    const double h = 1e-6 * std::max(1.0, std::abs(keep));
    net.theta(p) = keep + h;
    const double up = MlpPerSampleGrad(net, x, kind, label, y).loss;
    net.theta(p) = keep - h;
    const double down = MlpPerSampleGrad(net, x, kind, label, y).loss;
    net.theta(p) = keep;
    worst = std::max(worst, std::abs((up - down) / (2 * h) - analytic(p)) /
                                std::max(1.0, std::abs(analytic(p))));
  }
  return worst;
}

TEST(MlpGradientTest, MatchesFiniteDifferencesAwayFromKink) {
  std::mt19937_64 g(3);
  int checked = 0;
  while (checked < 10) {
    Mlp net = MakeMlp(4, 6, 3, g());
    const Eigen::VectorXd x = RandomVector(g, 4);
    if ((net.U() * x).cwiseAbs().minCoeff() < 1e-3) continue;
    const Eigen::VectorXd y = RandomVector(g, 3);
    EXPECT_LE(FiniteDifferenceError(net, x, LossKind::kMse, 0, y), 1e-4);
    EXPECT_LE(FiniteDifferenceError(net, x, LossKind::kCrossEntropy, static_cast<int>(g() % 3), y),
              1e-4);
    ++checked;
  }
}

TEST(MlpGradientTest, DeadUnitsGiveZeroHiddenGradient) {
  Mlp net = MakeMlp(2, 3, 2, 4);
  net.U() = -net.U().cwiseAbs();
  const Eigen::Vector2d x(1.0, 2.0);
  const auto r = MlpPerSampleGrad(net, x, LossKind::kCrossEntropy, 1, Eigen::Vector2d::Zero());
  EXPECT_EQ(r.gradient.norm(), 0.0);
}

TEST(MlpGradientTest, KinkUsesZeroSubgradient) {
  Mlp net = MakeMlp(2, 1, 1, 5);
  net.U() << 1.0, -1.0;
  net.A() << 2.0;
  const auto r = MlpPerSampleGrad(net, Eigen::Vector2d(1.0, 1.0), LossKind::kMse, 0,
                                  Eigen::VectorXd::Constant(1, 1.0));
  EXPECT_EQ(r.gradient.head(2), Eigen::Vector2d::Zero());
}

TEST(MlpGradientTest, DuplicateSampleIdenticalAndLabelChecked) {
  const Mlp net = MakeMlp(3, 5, 2, 6);
  const Eigen::Vector3d x(0.1, -0.4, 0.9);
  EXPECT_EQ(MlpPerSampleGrad(net, x, LossKind::kCrossEntropy, 1, Eigen::Vector2d::Zero()).gradient,
            MlpPerSampleGrad(net, x, LossKind::kCrossEntropy, 1, Eigen::Vector2d::Zero()).gradient);
  EXPECT_THROW(MlpPerSampleGrad(net, x, LossKind::kCrossEntropy, 2, Eigen::Vector2d::Zero()),
               Error);
}

TEST(MlpCheckpointTest, RoundTrip) {
  const Mlp net = MakeMlp(3, 4, 2, 7);
  const auto path = std::filesystem::temp_directory_path() / "cvxdp_mlp_test" / "net.json";
  SaveMlp(path, net);
  const Mlp back = LoadMlp(path);
  EXPECT_EQ(back.theta, net.theta);
  EXPECT_EQ(back.m, 4);
  SaveMlp(path.parent_path() / "again.json", back);
  EXPECT_EQ(ReadTextFile(path), ReadTextFile(path.parent_path() / "again.json"));
  std::filesystem::remove_all(path.parent_path());
}

}  // namespace
}  // namespace cvxdp::baseline
