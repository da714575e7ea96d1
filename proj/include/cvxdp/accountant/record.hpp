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
#include <optional>
#include <sstream>
#include <string>

#include "cvxdp/accountant/noisycgd.hpp"
#include "cvxdp/accountant/pld.hpp"
#include "json.hpp"

namespace cvxdp::accountant {

// One (eps, delta) statement together with every accountant input needed to
// recompute it.
struct AccountantRecord {
  std::string method;  // "dpsgd", "noisycgd", "gaussian", "convert-rdp"
  std::optional<double> sigma;
  std::optional<double> q;
  std::optional<std::int64_t> T;
  std::optional<NoisyCGDSpec> noisycgd;
  std::optional<double> mu;
  double delta = 0.0;
  double epsilon = 0.0;
  std::optional<double> grid_step;
  std::optional<double> eps_max;
  std::optional<double> truncation_mass;
};

inline std::string FormatEpsilon(double epsilon, double eps_max) {
  if (std::isinf(epsilon)) {
    std::ostringstream os;
    os << "> " << eps_max;
    return os.str();
  }
  std::ostringstream os;
  os.precision(17);
  os << epsilon;
  return os.str();
}

inline nlohmann::ordered_json ToJson(const AccountantRecord& r) {
  nlohmann::ordered_json j;
  j["method"] = r.method;
  if (r.sigma) j["sigma"] = *r.sigma;
  if (r.q) j["q"] = *r.q;
  if (r.T) j["T"] = *r.T;
  if (r.noisycgd) {
    const auto& s = *r.noisycgd;
    j["L"] = s.L;
    j["b"] = s.b;
    j["sigma"] = s.sigma;
    j["eta"] = s.eta;
    j["lambda"] = s.lambda_sc;
    j["beta"] = s.beta_sm;
    j["k"] = s.k;
    j["E"] = s.E;
  }
  if (r.mu) j["mu"] = *r.mu;
  j["delta"] = r.delta;
  if (std::isinf(r.epsilon)) {
    j["epsilon"] = nullptr;
    j["epsilon_note"] = FormatEpsilon(r.epsilon, r.eps_max.value_or(32.0));
  } else {
    j["epsilon"] = r.epsilon;
  }
  if (r.grid_step) j["grid_step"] = *r.grid_step;
  if (r.eps_max) j["eps_max"] = *r.eps_max;
  if (r.truncation_mass) j["truncation_mass"] = *r.truncation_mass;
  return j;
}

// Metadata of a discretized loss distribution.
inline nlohmann::ordered_json PldSummary(const DiscretePLD& pld) {
  nlohmann::ordered_json j;
  j["loss_grid_origin"] = pld.origin();
  j["loss_grid_step"] = pld.loss_step;
  j["grid_points"] = pld.masses.size();
  j["loss_max"] = pld.masses.empty() ? pld.origin() : pld.Loss(pld.masses.size() - 1);
  j["finite_mass"] = pld.FiniteMass();
  j["infinity_mass"] = pld.infinity_mass;
  j["trimmed_mass"] = pld.trimmed_mass;
  j["clamped_negative_mass"] = pld.clamped_negative_mass;
  j["renormalizations"] = pld.renormalizations;
  return j;
}

}  // namespace cvxdp::accountant
