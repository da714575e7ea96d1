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
#include <cstdint>

#include "cvxdp/accountant/connect_the_dots.hpp"
#include "cvxdp/accountant/pld.hpp"
#include "cvxdp/accountant/profile.hpp"
#include "cvxdp/accountant/subsampled.hpp"
#include "cvxdp/core/error.hpp"

namespace cvxdp::accountant {

struct DpsgdAccountingOptions {
  PldGridOptions grid;
  ComposeOptions compose;
};

// One DP-SGD step under the substitute relation. Scaling the released mean
// by b/C makes each clipped summand norm <= 1, so replacing one example moves
// the sum by at most 2 while the noise becomes N(0, sigma^2 I).
inline SubsampledSpec DpsgdStepSpec(double sigma, double q) {
  Require(std::isfinite(sigma) && sigma > 0.0, ErrorKind::kDomain,
          "noise multiplier must be positive");
  SubsampledSpec spec{GaussianPairSpec{2.0 / sigma}, q};
  spec.Validate();
  return spec;
}

// Discrete dominating pair for a single subsampled step.
inline DiscretePLD DpsgdStepPld(double sigma, double q,
                                const DpsgdAccountingOptions& options = {}) {
  const auto profile = PrivacyProfile::Subsampled(DpsgdStepSpec(sigma, q));
  return ConnectTheDots(profile, AdaptiveEpsGrid(profile, options.grid));
}

inline PrivacyProfile AccountDpsgd(const DiscretePLD& step_pld,
                                   std::int64_t steps,
                                   const DpsgdAccountingOptions& options = {}) {
  return PrivacyProfile::FromPld(ComposePld(step_pld, steps, options.compose));
}

// Privacy profile of `steps` DP-SGD iterations with without-replacement
// batches of ratio q and noise multiplier sigma.
inline PrivacyProfile AccountDpsgd(double sigma, double q, std::int64_t steps,
                                   const DpsgdAccountingOptions& options = {}) {
  Require(steps >= 1, ErrorKind::kDomain, "step count must be positive");
  return AccountDpsgd(DpsgdStepPld(sigma, q, options), steps, options);
}

}  // namespace cvxdp::accountant
