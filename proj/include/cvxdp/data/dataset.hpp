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

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "cvxdp/core/error.hpp"
#include "cvxdp/core/rng.hpp"

namespace cvxdp::data {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Either a classification set (labels in [0, num_classes)) or a regression
// set (num_classes == 0, real targets).
struct Dataset {
  std::string name;
  RowMatrix X;
  std::vector<int> labels;
  Eigen::VectorXd targets;
  int num_classes = 0;
  std::string normalization = "none";

  Eigen::Index n() const { return X.rows(); }
  Eigen::Index d() const { return X.cols(); }
  bool IsClassification() const { return num_classes > 0; }

  void Validate() const {
    Require(X.allFinite(), ErrorKind::kNumeric, "dataset '" + name + "' has non-finite features");
    if (IsClassification()) {
      Require(static_cast<Eigen::Index>(labels.size()) == n(), ErrorKind::kShape,
              "dataset '" + name + "': label count differs from row count");
      for (int l : labels) {
        Require(l >= 0 && l < num_classes, ErrorKind::kDomain,
                "dataset '" + name + "': label " + std::to_string(l) + " outside [0, " +
                    std::to_string(num_classes) + ")");
      }
    } else {
      Require(targets.size() == n(), ErrorKind::kShape,
              "dataset '" + name + "': target count differs from row count");
      Require(targets.allFinite(), ErrorKind::kNumeric,
              "dataset '" + name + "' has non-finite targets");
    }
  }
};

// Rows `idx` of `ds`, in that order.
inline Dataset SelectRows(const Dataset& ds, const std::vector<Eigen::Index>& idx) {
  Dataset out;
  out.name = ds.name;
  out.num_classes = ds.num_classes;
  out.normalization = ds.normalization;
  out.X.resize(static_cast<Eigen::Index>(idx.size()), ds.d());
  if (ds.IsClassification()) {
    out.labels.resize(idx.size());
  } else {
    out.targets.resize(static_cast<Eigen::Index>(idx.size()));
  }
  for (std::size_t a = 0; a < idx.size(); ++a) {
    const auto r = static_cast<Eigen::Index>(a);
    out.X.row(r) = ds.X.row(idx[a]);
    if (ds.IsClassification()) {
      out.labels[a] = ds.labels[static_cast<std::size_t>(idx[a])];
    } else {
      out.targets(r) = ds.targets(idx[a]);
    }
  }
  return out;
}

inline std::vector<Eigen::Index> SeededPermutation(Eigen::Index n, std::uint64_t seed,
                                                   std::uint64_t stream = kDataStream) {
  std::vector<Eigen::Index> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), Eigen::Index{0});
  Engine engine = MakeEngine(seed, stream);
  std::shuffle(perm.begin(), perm.end(), engine);
  return perm;
}

// n / b disjoint batches covering 0..n-1, from one seeded permutation.
inline std::vector<std::vector<Eigen::Index>> PartitionDisjoint(Eigen::Index n, Eigen::Index b,
                                                                std::uint64_t seed) {
  Require(n >= 1 && b >= 1, ErrorKind::kDomain, "partition needs n >= 1 and b >= 1");
  Require(n % b == 0, ErrorKind::kDomain,
          "batch size " + std::to_string(b) + " does not divide n = " + std::to_string(n));
  const auto perm = SeededPermutation(n, seed, kBatchStream);
  std::vector<std::vector<Eigen::Index>> batches(static_cast<std::size_t>(n / b));
  for (std::size_t t = 0; t < batches.size(); ++t) {
    const auto first = perm.begin() + static_cast<std::ptrdiff_t>(t) * b;
    batches[t].assign(first, first + b);
  }
  return batches;
}

// Uniform subset without replacement. Classification sets are stratified:
// classes receive as equal a share as their sizes allow.
inline Dataset Subset(const Dataset& ds, Eigen::Index n_sub, std::uint64_t seed) {
  Require(n_sub >= 1 && n_sub <= ds.n(), ErrorKind::kDomain,
          "subset size " + std::to_string(n_sub) + " outside [1, " + std::to_string(ds.n()) + "]");
  const auto perm = SeededPermutation(ds.n(), seed);
  std::vector<Eigen::Index> chosen;
  if (!ds.IsClassification()) {
    chosen.assign(perm.begin(), perm.begin() + n_sub);
  } else {
    const auto k = static_cast<std::size_t>(ds.num_classes);
    std::vector<std::vector<Eigen::Index>> by_class(k);
    for (Eigen::Index i : perm) by_class[static_cast<std::size_t>(ds.labels[static_cast<std::size_t>(i)])].push_back(i);
    // Water-filling: hand out one slot per class per round.
    std::vector<std::size_t> quota(k, 0);
    Eigen::Index left = n_sub;
    while (left > 0) {
      for (std::size_t c = 0; c < k && left > 0; ++c) {
        if (quota[c] < by_class[c].size()) {
          ++quota[c];
          --left;
        }
      }
    }
    for (std::size_t c = 0; c < k; ++c) {
      chosen.insert(chosen.end(), by_class[c].begin(),
                    by_class[c].begin() + static_cast<std::ptrdiff_t>(quota[c]));
    }
    std::vector<std::size_t> position(perm.size());
    for (std::size_t a = 0; a < perm.size(); ++a) position[static_cast<std::size_t>(perm[a])] = a;
    std::sort(chosen.begin(), chosen.end(), [&](Eigen::Index a, Eigen::Index b) {
      return position[static_cast<std::size_t>(a)] < position[static_cast<std::size_t>(b)];
    });
  }
  return SelectRows(ds, chosen);
}

// Per-feature standardization fitted on `fit` and applied to both sets.
// Constant features are centred only.
inline void Standardize(Dataset& fit, Dataset& other) {
  const Eigen::RowVectorXd mean = fit.X.colwise().mean();
  Eigen::RowVectorXd sd =
      ((fit.X.rowwise() - mean).array().square().colwise().sum() / static_cast<double>(fit.n()))
          .sqrt();
  sd = sd.unaryExpr([](double s) { return s > 0.0 ? s : 1.0; });
  for (Dataset* ds : {&fit, &other}) {
    ds->X = (ds->X.rowwise() - mean).array().rowwise() / sd.array();
    ds->normalization = "standardized";
  }
}

}  // namespace cvxdp::data
