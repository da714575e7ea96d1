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

#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <string>
#include <utility>

#include "cvxdp/accountant/gaussian.hpp"
#include "cvxdp/accountant/pld.hpp"
#include "cvxdp/accountant/subsampled.hpp"
#include "cvxdp/core/error.hpp"

namespace cvxdp::accountant {

enum class ProfileKind { kGaussian, kSubsampledMixture, kDiscretePld };

inline const char* ToString(ProfileKind kind) {
  switch (kind) {
    case ProfileKind::kGaussian: return "gaussian";
    case ProfileKind::kSubsampledMixture: return "subsampled-mixture";
    case ProfileKind::kDiscretePld: return "discrete-pld-derived";
  }
  return "unknown";
}

// eps -> delta(eps). The evaluator accepts any real eps; negative values
// correspond to hockey-stick orders alpha = e^eps < 1, which the
// connect-the-dots discretization needs.
class PrivacyProfile {
 public:
  using Evaluator = std::function<double(double)>;

  PrivacyProfile(ProfileKind kind, Evaluator evaluator)
      : kind_(kind), evaluator_(std::move(evaluator)) {}

  // `excess` must return delta(eps) - max(0, 1 - e^eps); profiles that can
  // evaluate it without cancellation for eps < 0 should supply it.
  PrivacyProfile(ProfileKind kind, Evaluator evaluator, Evaluator excess)
      : kind_(kind),
        evaluator_(std::move(evaluator)),
        excess_(std::move(excess)) {}

  static PrivacyProfile Gaussian(double mu) {
    internal::CheckMu(mu);
    return PrivacyProfile(
        ProfileKind::kGaussian,
        [mu](double eps) { return internal::GaussianHockeyStickLog(eps, mu); },
        [mu](double eps) { return internal::GaussianExcessLog(eps, mu); });
  }

  static PrivacyProfile Subsampled(const SubsampledSpec& spec) {
    spec.Validate();
    return PrivacyProfile(
        ProfileKind::kSubsampledMixture,
        [spec](double eps) { return SubsampledProfileLog(spec, eps); },
        [spec](double eps) { return SubsampledExcessLog(spec, eps); });
  }

  static PrivacyProfile FromPld(DiscretePLD pld) {
    auto shared = std::make_shared<const DiscretePLD>(std::move(pld));
    PrivacyProfile profile(ProfileKind::kDiscretePld,
                           [shared](double eps) { return PldDelta(*shared, eps); });
    profile.pld_ = shared;
    return profile;
  }

  double Delta(double eps) const { return evaluator_(eps); }

  double Excess(double eps) const {
    if (excess_) return excess_(eps);
    const double d = evaluator_(eps);
    return eps >= 0.0 ? d : d + std::expm1(eps);
  }
  double operator()(double eps) const { return evaluator_(eps); }
  ProfileKind kind() const { return kind_; }

  // Backing distribution for PLD-derived profiles, null otherwise.
  const DiscretePLD* pld() const { return pld_.get(); }

 private:
  ProfileKind kind_;
  Evaluator evaluator_;
  Evaluator excess_;
  std::shared_ptr<const DiscretePLD> pld_;
};

inline constexpr double kDefaultEpsMax = 32.0;

// Smallest eps (to a bracket width of 1e-9) with delta(eps) <= target.
// Returns 0 when delta(0) already meets the target and +inf when even
// eps_max does not.
inline double FindEpsilon(const PrivacyProfile& profile, double delta_target,
                          double eps_max = kDefaultEpsMax) {
  Require(delta_target > 0.0 && delta_target < 1.0, ErrorKind::kDomain,
          "delta target must lie in (0, 1)");
  if (profile.Delta(0.0) <= delta_target) return 0.0;
  if (profile.Delta(eps_max) > delta_target) {
    return std::numeric_limits<double>::infinity();
  }
  double lo = 0.0;
  double hi = eps_max;
  while (hi - lo > 1e-9) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (profile.Delta(mid) > delta_target) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return hi;
}

}  // namespace cvxdp::accountant
