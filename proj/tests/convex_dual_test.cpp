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
#include <numbers>
#include <random>
#include <vector>

#include "cvxdp/convex_dual/arrangement.hpp"
#include "cvxdp/convex_dual/checkpoint.hpp"
#include "cvxdp/convex_dual/embed.hpp"
#include "cvxdp/convex_dual/enumerate.hpp"
#include "cvxdp/convex_dual/model.hpp"
#include "cvxdp/convex_dual/young.hpp"
#include "gtest/gtest.h"

namespace cvxdp::convex_dual {
namespace {

Eigen::VectorXd RandomVector(std::mt19937_64& g, Eigen::Index n, double scale = 1.0) {
  std::normal_distribution<double> nd(0.0, scale);
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = nd(g);
  return v;
}

DualModel RandomModel(std::mt19937_64& g, Eigen::Index d, Eigen::Index P, Eigen::Index k,
                      double lambda) {
  DualModel m = MakeDualModel(d, P, k, lambda, /*bias=*/false, g());
  m.V = RandomVector(g, m.NumParams(), 0.5);
  return m;
}

std::vector<std::uint8_t> RandomBits(std::mt19937_64& g, Eigen::Index P) {
  std::vector<std::uint8_t> bits(static_cast<std::size_t>(P));
  for (auto& b : bits) b = static_cast<std::uint8_t>(g() & 1);
  return bits;
}

TEST(ArrangementTest, DeterministicForSeed) {
  const auto a = SampleArrangement(3, 7, 42);
  const auto b = SampleArrangement(3, 7, 42);
  EXPECT_EQ(a.gates, b.gates);
  EXPECT_NE(a.gates, SampleArrangement(3, 7, 43).gates);
}

TEST(ArrangementTest, GateMeansWithinCltBound) {
  const Eigen::Index P = 10000;
  const auto a = SampleArrangement(2, P, 7);
  const Eigen::RowVectorXd means = a.gates.colwise().mean();
  for (Eigen::Index c = 0; c < 2; ++c) EXPECT_LT(std::abs(means(c)), 4.0 / std::sqrt(P));
}

TEST(ArrangementTest, SingleScalarGate) {
  const auto a = SampleArrangement(1, 1, 3);
  EXPECT_EQ(a.gates.rows(), 1);
  EXPECT_EQ(a.gates.cols(), 1);
  EXPECT_THROW(SampleArrangement(0, 1, 3), Error);
}

TEST(MaskTest, SignsAndTieConvention) {
  Arrangement a;
  a.gates.resize(3, 2);
  a.gates << 1, 0, 0, 1, 1, 1;
  RowMatrix X(1, 2);
  X << 1, -1;
  const MaskTable m = ComputeMasks(X, a);
  EXPECT_EQ(m(0, 0), 1);
  EXPECT_EQ(m(0, 1), 0);
  EXPECT_EQ(m(0, 2), 1);  // x.u == 0
  const auto bits = GateBits(a, X.row(0).transpose());
  EXPECT_EQ(std::vector<std::uint8_t>(m.row(0).begin(), m.row(0).end()), bits);
}

TEST(MaskTest, DimensionMismatch) {
  const auto a = SampleArrangement(3, 2, 1);
  RowMatrix X = RowMatrix::Ones(2, 2);
  EXPECT_THROW(ComputeMasks(X, a), Error);
}

TEST(ForwardTest, ScalarCase) {
  DualModel m = MakeDualModel(1, 1, 1, 0.0, false, 0);
  m.V << 3.0;
  Eigen::VectorXd x(1);
  x << 2.0;
  const std::vector<std::uint8_t> on{1}, off{0};
  EXPECT_DOUBLE_EQ(Forward(m, x, on)(0), 6.0);
  EXPECT_DOUBLE_EQ(Forward(m, x, off)(0), 0.0);
}

TEST(ForwardTest, LinearInGatesAndWeights) {
  std::mt19937_64 g(5);
  DualModel m = MakeDualModel(3, 2, 2, 0.0, false, 0);
  const Eigen::VectorXd slice = RandomVector(g, 6);
  m.V << slice, slice;
  const Eigen::VectorXd x = RandomVector(g, 3);
  const Eigen::VectorXd one = Forward(m, x, std::vector<std::uint8_t>{1, 0});
  const Eigen::VectorXd both = Forward(m, x, std::vector<std::uint8_t>{1, 1});
  EXPECT_LT((both - 2.0 * one).norm(), 1e-12);

  DualModel a = RandomModel(g, 4, 5, 3, 0.0), b = a;
  b.V = RandomVector(g, a.NumParams());
  DualModel mix = a;
  mix.V = 0.3 * a.V - 1.7 * b.V;
  const Eigen::VectorXd xx = RandomVector(g, 4);
  const auto bits = RandomBits(g, 5);
  const Eigen::VectorXd lhs = Forward(mix, xx, bits);
  const Eigen::VectorXd rhs = 0.3 * Forward(a, xx, bits) - 1.7 * Forward(b, xx, bits);
  EXPECT_LT((lhs - rhs).norm(), 1e-12);
}

TEST(ForwardTest, ShapeErrors) {
  DualModel m = MakeDualModel(2, 3, 1, 0.0, false, 0);
  EXPECT_THROW(Forward(m, Eigen::VectorXd::Ones(3), std::vector<std::uint8_t>(3, 1)), Error);
  EXPECT_THROW(Forward(m, Eigen::VectorXd::Ones(2), std::vector<std::uint8_t>(2, 1)), Error);
}

TEST(ForwardTest, BiasFeatureAppended) {
  DualModel m = MakeDualModel(2, 4, 1, 0.0, true, 9);
  EXPECT_EQ(m.d(), 3);
  const Eigen::VectorXd x = AugmentInput(m, Eigen::Vector2d(0.5, -1.0));
  EXPECT_DOUBLE_EQ(x(2), 1.0);
}

TEST(MseLossTest, ScalarCase) {
  DualModel m = MakeDualModel(1, 1, 1, 0.0, false, 0);
  m.V << 3.0;
  Eigen::VectorXd x(1), y(1);
  x << 2.0;
  y << 1.0;
  const auto r = SampleLossMse(m, x, y, std::vector<std::uint8_t>{1});
  EXPECT_DOUBLE_EQ(r.loss, 12.5);
  EXPECT_DOUBLE_EQ(r.gradient(0), 10.0);
  const auto off = SampleLossMse(m, x, y, std::vector<std::uint8_t>{0});
  EXPECT_DOUBLE_EQ(off.loss, 0.5);
  EXPECT_DOUBLE_EQ(off.gradient(0), 0.0);
}

TEST(MseLossTest, RegularizationKeptOutOfDataGradient) {
  std::mt19937_64 g(11);
  const DualModel m = RandomModel(g, 3, 4, 2, 0.25);
  const auto bits = RandomBits(g, 4);
  const auto r = SampleLossMse(m, RandomVector(g, 3), RandomVector(g, 2), bits);
  EXPECT_LT((r.gradient - r.data_term_gradient - 0.25 * m.V).norm(), 1e-14);
}

template <typename LossFn>
double MaxFiniteDifferenceError(DualModel m, LossFn loss) {
  const Eigen::VectorXd analytic = loss(m).gradient;
  double worst = 0.0;
  for (Eigen::Index p = 0; p < m.NumParams(); ++p) {
    const double h = 1e-6 * std::max(1.0, std::abs(m.V(p)));
    const double keep = m.V(p);
    m.V(p) = keep + h;
    const double up = loss(m).loss;
    m.V(p) = keep - h;
    const double down = loss(m).loss;
    m.V(p) = keep;
    const double numeric = (up - down) / (2 * h);
    const double scale = std::max(1.0, std::abs(analytic(p)));
    worst = std::max(worst, std::abs(numeric - analytic(p)) / scale);
  }
  return worst;
}

TEST(MseLossTest, GradientMatchesFiniteDifferences) {
  std::mt19937_64 g(12);
  for (int trial = 0; trial < 5; ++trial) {
    const DualModel m = RandomModel(g, 3, 4, 2, 0.1);
    const Eigen::VectorXd x = RandomVector(g, 3);
    const Eigen::VectorXd y = RandomVector(g, 2);
    const auto bits = RandomBits(g, 4);
    EXPECT_LE(MaxFiniteDifferenceError(m, [&](const DualModel& mm) {
                return SampleLossMse(mm, x, y, bits);
              }),
              1e-5);
  }
}

TEST(CrossEntropyTest, EqualLogitsGiveLogK) {
  DualModel m = MakeDualModel(2, 3, 4, 0.0, false, 0);
  const auto r = SampleLossCrossEntropy(m, Eigen::Vector2d(1, 2), 2,
                                        std::vector<std::uint8_t>{1, 1, 0});
  EXPECT_NEAR(r.loss, std::log(4.0), 1e-15);
}

TEST(CrossEntropyTest, GradientMatchesFiniteDifferences) {
  std::mt19937_64 g(13);
  for (int trial = 0; trial < 5; ++trial) {
    const DualModel m = RandomModel(g, 3, 4, 3, 0.05);
    const Eigen::VectorXd x = RandomVector(g, 3);
    const auto bits = RandomBits(g, 4);
    const int label = static_cast<int>(g() % 3);
    EXPECT_LE(MaxFiniteDifferenceError(m, [&](const DualModel& mm) {
                return SampleLossCrossEntropy(mm, x, label, bits);
              }),
              1e-5);
  }
}

TEST(CrossEntropyTest, DeterministicAndValidated) {
  std::mt19937_64 g(14);
  const DualModel m = RandomModel(g, 2, 3, 3, 0.0);
  const Eigen::VectorXd x = RandomVector(g, 2);
  const std::vector<std::uint8_t> bits{1, 0, 1};
  EXPECT_EQ(SampleLossCrossEntropy(m, x, 1, bits).gradient,
            SampleLossCrossEntropy(m, x, 1, bits).gradient);
  EXPECT_THROW(SampleLossCrossEntropy(m, x, 3, bits), Error);
  EXPECT_THROW(SampleLossCrossEntropy(m, x, -1, bits), Error);
  const DualModel k1 = RandomModel(g, 2, 3, 1, 0.0);
  EXPECT_THROW(SampleLossCrossEntropy(k1, x, 0, bits), Error);
}

TEST(ConvexityTest, StrongConvexityAlongSegments) {
  std::mt19937_64 g(15);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    const double lambda = trial % 2 ? 0.3 : 0.0;
    DualModel a = RandomModel(g, 3, 5, 2, lambda), b = a, mid = a;
    b.V = RandomVector(g, a.NumParams());
    const double t = unif(g);
    mid.V = t * a.V + (1 - t) * b.V;
    const Eigen::VectorXd x = RandomVector(g, 3), y = RandomVector(g, 2);
    const auto bits = RandomBits(g, 5);
    const int label = static_cast<int>(g() % 2);
    auto mse = [&](const DualModel& m) { return SampleLossMse(m, x, y, bits).loss; };
    auto ce = [&](const DualModel& m) { return SampleLossCrossEntropy(m, x, label, bits).loss; };
    const double gap = 0.5 * lambda * t * (1 - t) * (a.V - b.V).squaredNorm();
    EXPECT_LE(mse(mid), t * mse(a) + (1 - t) * mse(b) - gap + 1e-9);
    EXPECT_LE(ce(mid), t * ce(a) + (1 - t) * ce(b) - gap + 1e-9);
  }
}

TEST(SmoothnessTest, StatedConstantValues) {
  EXPECT_DOUBLE_EQ(LipschitzBeta(Eigen::Vector3d(1, 1, 1), 0.5), 3.5);
  EXPECT_DOUBLE_EQ(LipschitzBeta(Eigen::Vector3d::Zero(), 0.0), 0.0);
}

struct LipschitzCounts {
  int stated_violations = 0;
  int active_violations = 0;
};

LipschitzCounts CheckGradientLipschitz(std::mt19937_64& g, int draws,
                                       const std::vector<std::uint8_t>& bits) {
  LipschitzCounts counts;
  const double lambda = 0.1;
  for (int i = 0; i < draws; ++i) {
    DualModel a = RandomModel(g, 3, static_cast<Eigen::Index>(bits.size()), 2, lambda), b = a;
    b.V = RandomVector(g, a.NumParams());
    const Eigen::VectorXd x = RandomVector(g, 3), y = RandomVector(g, 2);
    const double diff = (SampleLossMse(a, x, y, bits).gradient -
                         SampleLossMse(b, x, y, bits).gradient).norm();
    const double dist = (a.V - b.V).norm();
    if (diff > LipschitzBeta(x, lambda) * dist * (1 + 1e-12)) ++counts.stated_violations;
    if (diff > ActiveGateSmoothness(x, bits, lambda) * dist * (1 + 1e-12)) {
      ++counts.active_violations;
    }
  }
  return counts;
}

TEST(SmoothnessTest, StatedConstantHoldsWithOneActiveGate) {
  std::mt19937_64 g(16);
  const auto c = CheckGradientLipschitz(g, 1000, {0, 1, 0, 0});
  EXPECT_EQ(c.stated_violations, 0);
  EXPECT_EQ(c.active_violations, 0);
}

TEST(SmoothnessTest, StatedConstantUnderestimatesWithSeveralActiveGates) {
  std::mt19937_64 g(17);
  const auto c = CheckGradientLipschitz(g, 1000, {1, 1, 1, 0});
  EXPECT_GT(c.stated_violations, 0);
  EXPECT_EQ(c.active_violations, 0);
}

TEST(SmoothnessTest, ActiveGateConstantIsTight) {
  // Moving V along the masked feature direction attains the bound.
  std::mt19937_64 g(18);
  DualModel a = RandomModel(g, 3, 4, 1, 0.2), b = a;
  const std::vector<std::uint8_t> bits{1, 1, 0, 1};
  const Eigen::VectorXd x = RandomVector(g, 3);
  Eigen::VectorXd dir = Eigen::VectorXd::Zero(a.NumParams());
  for (int i = 0; i < 4; ++i) {
    if (bits[i]) dir.segment(i * 3, 3) = x;
  }
  b.V = a.V + dir;
  const Eigen::VectorXd y = RandomVector(g, 1);
  const double diff = (SampleLossMse(a, x, y, bits).gradient -
                       SampleLossMse(b, x, y, bits).gradient).norm();
  EXPECT_NEAR(diff / dir.norm(), ActiveGateSmoothness(x, bits, 0.2), 1e-10);
}

TEST(EnumerationTest, SinglePointHasTwoPatterns) {
  Eigen::MatrixXd X(1, 2);
  X << 0.3, -1.2;
  const auto e = EnumerateArrangementsTiny(X);
  EXPECT_EQ(e.patterns, (std::set<Pattern>{{0}, {1}}));
}

TEST(EnumerationTest, IdentityGivesFourQuadrants) {
  const auto e = EnumerateArrangementsTiny(Eigen::MatrixXd::Identity(2, 2));
  EXPECT_EQ(e.patterns.size(), 4u);
  EXPECT_EQ(e.random_only_count, 0u);
}

TEST(EnumerationTest, PlanarArrangementMatchesAngleSweep) {
  // Reference count from a dense angular sweep plus the tie directions.
  Eigen::MatrixXd X(5, 2);
  X << 1, 0, 0, 1, 1, 1, 1, -1, -2, 1;
  const auto e = EnumerateArrangementsTiny(X);
  EXPECT_EQ(e.patterns.size(), 11u);
  EXPECT_EQ(e.random_only_count, 0u);
  EXPECT_TRUE(e.patterns.count(Pattern{1, 1, 1, 1, 0}));
  EXPECT_TRUE(e.patterns.count(Pattern{1, 1, 1, 1, 1}));
}

TEST(EnumerationTest, GenericRegionsCountInThreeDimensions) {
  // n generic central planes in R^3 cut 2 (1 + (n-1) + C(n-1, 2)) regions;
  // the all-ones pattern at u = 0 adds at most one more.
  std::mt19937_64 g(19);
  Eigen::MatrixXd X(8, 3);
  for (Eigen::Index j = 0; j < 8; ++j) X.row(j) = RandomVector(g, 3).transpose();
  const auto e = EnumerateArrangementsTiny(X);
  EXPECT_GE(e.patterns.size(), 58u);
  EXPECT_LE(e.patterns.size(), 59u);
  EXPECT_EQ(e.random_only_count, 0u);
  EXPECT_LE(static_cast<double>(e.patterns.size()), e.bound);
}

TEST(EnumerationTest, RankDeficientAndDuplicateRows) {
  Eigen::MatrixXd X(4, 3);
  X << 1, 2, 0, 2, 4, 0, -1, 1, 0, 0, 1, 0;
  const auto e = EnumerateArrangementsTiny(X);
  EXPECT_EQ(e.rank, 2);
  EXPECT_EQ(e.random_only_count, 0u);
  EXPECT_LE(static_cast<double>(e.patterns.size()), e.bound);
}

TEST(EnumerationTest, BoundAndLimits) {
  EXPECT_TRUE(std::isinf(ArrangementCountBound(1, 1)));
  EXPECT_NEAR(ArrangementCountBound(3, 1), 2 * std::numbers::e * 2, 1e-12);
  EXPECT_THROW(EnumerateArrangementsTiny(Eigen::MatrixXd::Ones(13, 2)), Error);
  EXPECT_THROW(EnumerateArrangementsTiny(Eigen::MatrixXd::Ones(3, 5)), Error);
}

Eigen::MatrixXd RandomMatrix(std::mt19937_64& g, Eigen::Index r, Eigen::Index c) {
  Eigen::MatrixXd M(r, c);
  for (Eigen::Index i = 0; i < r; ++i) M.row(i) = RandomVector(g, c).transpose();
  return M;
}

TEST(EmbeddingTest, SingleBalancedNeuronWithoutPenalty) {
  std::mt19937_64 g(20);
  const Eigen::MatrixXd X = RandomMatrix(g, 6, 2);
  const Eigen::VectorXd y = RandomVector(g, 6);
  ReluNetSpec net{Eigen::RowVector2d(0.6, 0.8), Eigen::VectorXd::Constant(1, -1.0), 0.0};
  const auto r = EmbedReluIntoDual(net, X, y);
  EXPECT_EQ(r.relu_objective, r.dual_objective);
  EXPECT_GE(r.min_cone_slack, -1e-12);
}

TEST(EmbeddingTest, DistinctPatternsGiveEqualObjectives) {
  std::mt19937_64 g(21);
  int checked = 0;
  while (checked < 20) {
    const Eigen::MatrixXd X = RandomMatrix(g, 6, 2);
    const Eigen::VectorXd y = RandomVector(g, 6);
    ReluNetSpec net{RandomMatrix(g, 3, 2), RandomVector(g, 3), 0.1};
    std::set<Pattern> distinct;
    for (int j = 0; j < 3; ++j) distinct.insert(NeuronPattern(X, net.U.row(j).transpose()));
    if (distinct.size() < 3) continue;
    const auto r = EmbedReluIntoDual(net, X, y);
    EXPECT_FALSE(r.patterns_shared);
    EXPECT_NEAR(r.dual_objective, r.relu_objective, 1e-8);
    EXPECT_GE(r.min_cone_slack, -1e-10);
    // Balancing leaves the data fit untouched.
    EXPECT_NEAR(ReluObjective({net.U, net.alphas, 0.0}, X, y),
                ReluObjective({r.balanced.U, r.balanced.alphas, 0.0}, X, y), 1e-12);
    ++checked;
  }
}

TEST(EmbeddingTest, SharedPatternNeverIncreasesObjective) {
  std::mt19937_64 g(22);
  const Eigen::MatrixXd X = RandomMatrix(g, 6, 2);
  const Eigen::VectorXd y = RandomVector(g, 6);
  const Eigen::Vector2d u = RandomVector(g, 2);
  Eigen::MatrixXd U(2, 2);
  U.row(0) = u.transpose();
  U.row(1) = (u + 1e-3 * RandomVector(g, 2)).transpose() * 2.0;
  ASSERT_EQ(NeuronPattern(X, U.row(0).transpose()), NeuronPattern(X, U.row(1).transpose()));
  ReluNetSpec net{U, Eigen::Vector2d(0.7, 1.9), 0.5};
  const auto r = EmbedReluIntoDual(net, X, y);
  EXPECT_TRUE(r.patterns_shared);
  EXPECT_LE(r.dual_objective, r.relu_objective + 1e-12);
  EXPECT_GE(r.min_cone_slack, -1e-10);
}

TEST(EmbeddingTest, ZeroNeuronsSkipped) {
  Eigen::MatrixXd X = Eigen::MatrixXd::Identity(2, 2);
  ReluNetSpec net{Eigen::MatrixXd::Zero(2, 2), Eigen::Vector2d(1.0, 0.0), 0.1};
  net.U(1, 0) = 1.0;
  const auto r = EmbedReluIntoDual(net, X, Eigen::Vector2d(1, 0));
  EXPECT_EQ(r.skipped, (std::vector<int>{0, 1}));
  EXPECT_TRUE(r.point.patterns.empty());
}

TEST(YoungTest, UnitCase) {
  const auto r = YoungScalingGap(Eigen::Vector2d(1, 0), 1.0, 2.0);
  EXPECT_NEAR(r.numeric_min, 2.0, 1e-12);
  EXPECT_DOUBLE_EQ(r.closed_form, 2.0);
  EXPECT_NEAR(r.numeric_argmin, 1.0, 1e-8);
}

TEST(YoungTest, NormTwo) {
  const auto r = YoungScalingGap(Eigen::Vector2d(0, 2), 1.0, 1.0);
  EXPECT_DOUBLE_EQ(r.closed_form, 4.0);
  EXPECT_NEAR(r.numeric_min, 4.0, 1e-8);
  EXPECT_NEAR(r.numeric_argmin, std::sqrt(0.5), 1e-8);
}

TEST(YoungTest, RescalingInvariance) {
  const Eigen::Vector3d u(0.3, -1.1, 2.0);
  const auto a = YoungScalingGap(u, 0.7, 0.9);
  const auto b = YoungScalingGap(5.0 * u, 0.7 / 5.0, 0.9);
  EXPECT_NEAR(a.closed_form, b.closed_form, 1e-14);
  EXPECT_NEAR(a.numeric_min, b.numeric_min, 1e-10);
}

TEST(YoungTest, DegenerateInputs) {
  EXPECT_THROW(YoungScalingGap(Eigen::Vector2d::Zero(), 1.0, 1.0), Error);
  EXPECT_THROW(YoungScalingGap(Eigen::Vector2d(1, 0), 0.0, 1.0), Error);
  EXPECT_THROW(YoungScalingGap(Eigen::Vector2d(1, 0), 1.0, -1.0), Error);
}

TEST(CheckpointTest, RoundTripPreservesEverythingAndBytes) {
  std::mt19937_64 g(23);
  DualModel m = MakeDualModel(3, 5, 2, 0.125, true, 99);
  m.V = RandomVector(g, m.NumParams());
  const auto dir = std::filesystem::temp_directory_path() / "cvxdp_checkpoint_test";
  const auto first = dir / "a.json", second = dir / "b.json";
  SaveModel(first, m);
  const DualModel back = LoadModel(first);
  EXPECT_EQ(back.arrangement.gates, m.arrangement.gates);
  EXPECT_EQ(back.V, m.V);
  EXPECT_EQ(back.k, 2);
  EXPECT_EQ(back.lambda, 0.125);
  EXPECT_TRUE(back.bias);
  EXPECT_EQ(back.arrangement.seed, 99u);
  SaveModel(second, back);
  EXPECT_EQ(ReadTextFile(first), ReadTextFile(second));
  std::filesystem::remove_all(dir);
}

TEST(CheckpointTest, RejectsMalformedInput) {
  EXPECT_THROW(ModelFromJson(Json::parse(R"({"format":"other"})")), Error);
  Json j = ModelToJson(MakeDualModel(1, 1, 1, 0.0, false, 0));
  j["V"] = std::vector<double>{1.0, 2.0};
  EXPECT_THROW(ModelFromJson(j), Error);
  EXPECT_THROW(LoadModel("/nonexistent/dir/model.json"), Error);
}

}  // namespace
}  // namespace cvxdp::convex_dual
