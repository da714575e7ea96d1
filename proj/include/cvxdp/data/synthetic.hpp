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
#include <optional>
#include <string>

#include "cvxdp/core/error.hpp"
#include "cvxdp/core/rng.hpp"
#include "cvxdp/data/dataset.hpp"

namespace cvxdp::data {

enum class TargetRule {
  kRandomLabels,   // uniform class labels, independent of X
  kLinearTeacher,  // argmax of X W (classes) or X w (regression)
  kReluTeacher,    // argmax of a planted two-layer ReLU network
  kGivenTargets,   // caller-supplied real targets
};

struct SyntheticSpec {
  Eigen::Index n = 1;
  Eigen::Index d = 1;
  TargetRule rule = TargetRule::kRandomLabels;
  // 0 requests a regression set (linear teacher or given targets only).
  int num_classes = 2;
  Eigen::Index teacher_width = 0;  // 0 means 4 * num_classes
  std::optional<Eigen::VectorXd> targets;
  std::uint64_t seed = 0;
};

// X_ij ~ N(0, 1) i.i.d. from the data stream; the teacher uses a separate
// stream so that the features do not depend on the target rule.
inline Dataset SyntheticGaussian(const SyntheticSpec& spec) {
  Require(spec.n >= 1 && spec.d >= 1, ErrorKind::kDomain, "synthetic data needs n, d >= 1");
  Require(spec.num_classes >= 0, ErrorKind::kDomain, "num_classes must be >= 0");
  Engine data = MakeEngine(spec.seed, kDataStream);
  Engine teacher = MakeEngine(spec.seed, kDataStream + 1);
  auto gaussian = [](Engine& e, Eigen::Index r, Eigen::Index c) {
    RowMatrix M(r, c);
    for (Eigen::Index i = 0; i < M.size(); ++i) M.data()[i] = StandardNormal(e);
    return M;
  };

  Dataset ds;
  ds.name = "synthetic_gaussian";
  ds.X = gaussian(data, spec.n, spec.d);
  const int k = spec.num_classes;

  switch (spec.rule) {
    case TargetRule::kGivenTargets:
      Require(spec.targets.has_value() && spec.targets->size() == spec.n, ErrorKind::kShape,
              "given targets must have exactly n entries");
      ds.targets = *spec.targets;
      break;
    case TargetRule::kRandomLabels: {
      Require(k >= 1, ErrorKind::kDomain, "random labels need num_classes >= 1");
      std::uniform_int_distribution<int> pick(0, k - 1);
      ds.num_classes = k;
      ds.labels.resize(static_cast<std::size_t>(spec.n));
      for (auto& l : ds.labels) l = pick(teacher);
      break;
    }
    case TargetRule::kLinearTeacher: {
      if (k == 0) {
        const RowMatrix w = gaussian(teacher, spec.d, 1);
        ds.targets = ds.X * w.col(0);
      } else {
        const Eigen::MatrixXd scores = ds.X * gaussian(teacher, spec.d, k);
        ds.num_classes = k;
        ds.labels.resize(static_cast<std::size_t>(spec.n));
        for (Eigen::Index i = 0; i < spec.n; ++i) scores.row(i).maxCoeff(&ds.labels[static_cast<std::size_t>(i)]);
      }
      break;
    }
    case TargetRule::kReluTeacher: {
      Require(k >= 2, ErrorKind::kDomain, "a ReLU teacher needs num_classes >= 2");
      const Eigen::Index m = spec.teacher_width > 0 ? spec.teacher_width : 4 * k;
      const RowMatrix U = gaussian(teacher, m, spec.d);
      const RowMatrix A = gaussian(teacher, m, k);
      const Eigen::MatrixXd scores = (ds.X * U.transpose()).cwiseMax(0.0) * A;
      ds.num_classes = k;
      ds.labels.resize(static_cast<std::size_t>(spec.n));
      for (Eigen::Index i = 0; i < spec.n; ++i) scores.row(i).maxCoeff(&ds.labels[static_cast<std::size_t>(i)]);
      break;
    }
  }
  ds.Validate();
  return ds;
}

}  // namespace cvxdp::data
