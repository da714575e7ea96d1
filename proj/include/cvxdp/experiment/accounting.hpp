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
#include <limits>
#include <optional>

#include "cvxdp/accountant/dpsgd.hpp"
#include "cvxdp/accountant/gaussian.hpp"
#include "cvxdp/accountant/noisycgd.hpp"
#include "cvxdp/accountant/profile.hpp"
#include "cvxdp/accountant/record.hpp"
#include "cvxdp/core/error.hpp"

// Epsilon queries shared by training runs and the standalone `account`
// command, so both report the same numbers from the same code.
namespace cvxdp::experiment {

using accountant::AccountantRecord;

struct AccountingSettings {
  double delta = 1e-5;
  double grid_step = 1e-3;
  double eps_max = accountant::kDefaultEpsMax;

  accountant::DpsgdAccountingOptions Options() const {
    accountant::DpsgdAccountingOptions o;
    o.grid.step = grid_step;
    o.grid.eps_max = eps_max;
    return o;
  }

  void Validate() const {
    Require(delta > 0.0 && delta < 1.0, ErrorKind::kConfig, "delta must lie in (0, 1)");
    Require(grid_step > 0.0 && grid_step <= 0.1, ErrorKind::kConfig, "grid_step must lie in (0, 0.1]");
    Require(eps_max > 0.0 && std::isfinite(eps_max), ErrorKind::kConfig, "eps_max must be positive");
  }
};

// Discretizes one subsampled step once and composes it on demand. With
// sigma == 0 every query reports epsilon = +inf.
class DpsgdAccountant {
 public:
  DpsgdAccountant(double sigma, double q, AccountingSettings settings)
      : sigma_(sigma), q_(q), settings_(settings) {
    settings_.Validate();
    Require(q > 0.0 && q <= 1.0, ErrorKind::kConfig, "sampling ratio q must lie in (0, 1]");
    Require(sigma >= 0.0 && std::isfinite(sigma), ErrorKind::kConfig, "sigma must be >= 0");
    if (sigma > 0.0) step_ = accountant::DpsgdStepPld(sigma, q, settings_.Options());
  }

  AccountantRecord Query(std::int64_t steps, std::optional<double> delta = std::nullopt) const {
    Require(steps >= 1, ErrorKind::kConfig, "step count must be positive");
    AccountantRecord r;
    r.method = "dpsgd";
    r.sigma = sigma_;
    r.q = q_;
    r.T = steps;
    r.delta = delta.value_or(settings_.delta);
    r.grid_step = settings_.grid_step;
    r.eps_max = settings_.eps_max;
    if (!step_) {
      r.epsilon = std::numeric_limits<double>::infinity();
      r.truncation_mass = 0.0;
      return r;
    }
    const auto profile = accountant::AccountDpsgd(*step_, steps, settings_.Options());
    r.truncation_mass = profile.pld()->trimmed_mass;
    r.epsilon = accountant::FindEpsilon(profile, r.delta, settings_.eps_max);
    return r;
  }

  // Composed loss distribution, for inspection.
  accountant::DiscretePLD Compose(std::int64_t steps) const {
    Require(step_.has_value(), ErrorKind::kConfig, "no loss distribution without noise");
    return accountant::ComposePld(*step_, steps, settings_.Options().compose);
  }

 private:
  double sigma_;
  double q_;
  AccountingSettings settings_;
  std::optional<accountant::DiscretePLD> step_;
};

// epsilon of a mu-GDP mechanism at delta.
inline double GaussianEpsilon(double mu, double delta, double eps_max) {
  if (std::isinf(mu)) return std::numeric_limits<double>::infinity();
  return accountant::FindEpsilon(accountant::PrivacyProfile::Gaussian(mu), delta, eps_max);
}

inline AccountantRecord NoisyCgdQuery(const accountant::NoisyCGDSpec& spec,
                                      const AccountingSettings& settings) {
  settings.Validate();
  AccountantRecord r;
  r.method = "noisycgd";
  r.noisycgd = spec;
  r.delta = settings.delta;
  r.eps_max = settings.eps_max;
  r.mu = accountant::NoisyCgdMu(spec);
  r.epsilon = GaussianEpsilon(*r.mu, settings.delta, settings.eps_max);
  return r;
}

// T full-batch Gaussian steps with noise multiplier sigma compose to
// sqrt(T) * 2 / sigma GDP.
inline AccountantRecord DpgdQuery(double sigma, std::int64_t T, const AccountingSettings& settings) {
  settings.Validate();
  AccountantRecord r;
  r.method = "gaussian";
  r.sigma = sigma;
  r.T = T;
  r.delta = settings.delta;
  r.eps_max = settings.eps_max;
  r.mu = sigma > 0.0 ? std::sqrt(static_cast<double>(T)) * 2.0 / sigma
                     : std::numeric_limits<double>::infinity();
  r.epsilon = GaussianEpsilon(*r.mu, settings.delta, settings.eps_max);
  return r;
}

}  // namespace cvxdp::experiment
