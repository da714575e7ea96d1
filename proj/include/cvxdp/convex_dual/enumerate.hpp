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
#include <cmath>
#include <cstdint>
#include <map>
#include <numbers>
#include <set>
#include <string>
#include <vector>

#include "cvxdp/convex_dual/arrangement.hpp"
#include "cvxdp/core/error.hpp"
#include "cvxdp/core/rng.hpp"

namespace cvxdp::convex_dual {

using Pattern = std::vector<std::uint8_t>;

struct ArrangementEnumeration {
  std::set<Pattern> patterns;
  // Patterns found by the face walk, and extra ones only random sampling hit
  // (the latter should stay zero; a nonzero value flags a tolerance issue).
  std::size_t exact_count = 0;
  std::size_t random_only_count = 0;
  std::size_t random_draws = 0;
  Eigen::Index rank = 0;
  // Upper bound on the pattern count, or +inf when it does not apply.
  double bound = 0.0;
};

struct EnumerationOptions {
  std::size_t max_rows = 12;
  Eigen::Index max_cols = 4;
  std::size_t saturation_draws = 100000;
  std::uint64_t seed = 0;
  double tolerance = 1e-9;
};

// 2r (e(n-1)/r)^r for n >= 2 and r >= 1; +inf otherwise, since the formula
// vanishes at n = 1 although two patterns always exist there.
inline double ArrangementCountBound(std::size_t n, Eigen::Index r) {
  if (n < 2 || r < 1) return std::numeric_limits<double>::infinity();
  const double rr = static_cast<double>(r);
  return 2.0 * rr * std::pow(std::numbers::e * static_cast<double>(n - 1) / rr, rr);
}

namespace internal {

using SignVector = std::vector<std::int8_t>;
using RowSet = std::vector<int>;

// Walks every face of the central hyperplane arrangement {x_j . u = 0}
// restricted to `rows`. A face is identified by its sign vector; each face
// of positive dimension is reached through a ray of its closure, where the
// local arrangement is the one formed by the rows through that ray.
class FaceWalker {
 public:
  FaceWalker(const Eigen::MatrixXd& X, double tol) : X_(X), tol_(tol) {}

  // Sign vectors indexed like `rows`.
  const std::set<SignVector>& Faces(const RowSet& rows) {
    auto it = memo_.find(rows);
    if (it != memo_.end()) return it->second;
    std::set<SignVector> faces;
    faces.insert(SignVector(rows.size(), 0));
    if (rows.empty()) return memo_.emplace(rows, std::move(faces)).first->second;
    const Eigen::MatrixXd XR = Gather(rows);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(XR, Eigen::ComputeFullV);
    svd.setThreshold(tol_);
    const Eigen::Index r = svd.rank();
    if (r > 0) {
      const Eigen::MatrixXd basis = svd.matrixV().leftCols(r);  // row space of XR
      std::set<RowSet> seen_supports;
      std::vector<int> chosen;
      ForEachSubset(rows, static_cast<std::size_t>(r - 1), 0, chosen, [&](const RowSet& sub) {
        Eigen::VectorXd w;
        if (!RayThrough(sub, basis, r, w)) return;
        RowSet through;
        for (int j : rows) {
          if (std::abs(X_.row(j).dot(w)) <= tol_ * std::max(1.0, X_.row(j).norm())) {
            through.push_back(j);
          }
        }
        if (!seen_supports.insert(through).second) return;
        const std::set<SignVector> local = Faces(through);
        for (double s : {1.0, -1.0}) {
          SignVector base(rows.size(), 0);
          for (std::size_t a = 0; a < rows.size(); ++a) {
            const double v = s * X_.row(rows[a]).dot(w);
            if (std::abs(v) > tol_ * std::max(1.0, X_.row(rows[a]).norm())) {
              base[a] = v > 0 ? 1 : -1;
            }
          }
          for (const SignVector& sub_signs : local) {
            SignVector face = base;
            std::size_t b = 0;
            for (std::size_t a = 0; a < rows.size() && b < through.size(); ++a) {
              if (rows[a] == through[b]) face[a] = sub_signs[b++];
            }
            faces.insert(std::move(face));
          }
        }
      });
    }
    return memo_.emplace(rows, std::move(faces)).first->second;
  }

 private:
  Eigen::MatrixXd Gather(const RowSet& rows) const {
    Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), X_.cols());
    for (std::size_t a = 0; a < rows.size(); ++a) out.row(static_cast<Eigen::Index>(a)) = X_.row(rows[a]);
    return out;
  }

  // Direction in the row space orthogonal to `sub`, when that is a line.
  bool RayThrough(const RowSet& sub, const Eigen::MatrixXd& basis, Eigen::Index r,
                  Eigen::VectorXd& w) const {
    Eigen::VectorXd z;
    if (sub.empty()) {
      if (r != 1) return false;
      z = Eigen::VectorXd::Ones(1);
    } else {
      const Eigen::MatrixXd reduced = Gather(sub) * basis;  // |sub| x r
      Eigen::JacobiSVD<Eigen::MatrixXd> svd(reduced, Eigen::ComputeFullV);
      svd.setThreshold(tol_);
      if (svd.rank() != r - 1) return false;
      z = svd.matrixV().col(r - 1);
    }
    w = basis * z;
    w.normalize();
    return true;
  }

  template <typename F>
  static void ForEachSubset(const RowSet& rows, std::size_t size, std::size_t start,
                            std::vector<int>& chosen, F&& f) {
    if (chosen.size() == size) {
      f(chosen);
      return;
    }
    for (std::size_t a = start; a + (size - chosen.size()) <= rows.size(); ++a) {
      chosen.push_back(rows[a]);
      ForEachSubset(rows, size, a + 1, chosen, f);
      chosen.pop_back();
    }
  }

  const Eigen::MatrixXd& X_;
  double tol_;
  std::map<RowSet, std::set<SignVector>> memo_;
};

}  // namespace internal

// All realizable activation patterns 1(Xu >= 0) of a small data matrix.
inline ArrangementEnumeration EnumerateArrangementsTiny(const Eigen::MatrixXd& X,
                                                        const EnumerationOptions& opts = {}) {
  const auto n = static_cast<std::size_t>(X.rows());
  Require(n >= 1 && X.cols() >= 1, ErrorKind::kShape, "enumeration needs a non-empty matrix");
  Require(n <= opts.max_rows && X.cols() <= opts.max_cols, ErrorKind::kDomain,
          "enumeration is limited to n <= " + std::to_string(opts.max_rows) + " and d <= " +
              std::to_string(opts.max_cols) + ", got " + std::to_string(n) + " x " +
              std::to_string(X.cols()));
  Require(X.allFinite(), ErrorKind::kNumeric, "enumeration input has non-finite entries");

  ArrangementEnumeration out;
  out.rank = Eigen::FullPivLU<Eigen::MatrixXd>(X).rank();
  out.bound = ArrangementCountBound(n, out.rank);

  internal::FaceWalker walker(X, opts.tolerance);
  internal::RowSet all(n);
  for (std::size_t j = 0; j < n; ++j) all[j] = static_cast<int>(j);
  for (const auto& signs : walker.Faces(all)) {
    Pattern p(n);
    for (std::size_t j = 0; j < n; ++j) p[j] = signs[j] >= 0 ? 1 : 0;
    out.patterns.insert(std::move(p));
  }
  out.exact_count = out.patterns.size();

  Engine engine = MakeEngine(opts.seed, kGateStream);
  std::size_t quiet = 0;
  Eigen::VectorXd u(X.cols());
  while (quiet < opts.saturation_draws) {
    for (Eigen::Index c = 0; c < u.size(); ++c) u(c) = StandardNormal(engine);
    const Eigen::VectorXd s = X * u;
    Pattern p(n);
    for (std::size_t j = 0; j < n; ++j) p[j] = s(static_cast<Eigen::Index>(j)) >= 0.0 ? 1 : 0;
    ++out.random_draws;
    if (out.patterns.insert(std::move(p)).second) {
      ++out.random_only_count;
      quiet = 0;
    } else {
      ++quiet;
    }
  }

  Require(static_cast<double>(out.patterns.size()) <= out.bound, ErrorKind::kNumeric,
          "pattern count " + std::to_string(out.patterns.size()) +
              " exceeds the arrangement bound " + std::to_string(out.bound));
  return out;
}

}  // namespace cvxdp::convex_dual
