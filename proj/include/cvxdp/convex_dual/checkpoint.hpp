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

#include <filesystem>
#include <vector>

#include "cvxdp/convex_dual/model.hpp"
#include "cvxdp/core/json_io.hpp"

namespace cvxdp::convex_dual {

inline Json ModelToJson(const DualModel& model) {
  model.Validate();
  Json j;
  j["format"] = "cvxdp-dual-model";
  j["version"] = 1;
  j["d"] = model.d();
  j["P"] = model.P();
  j["k"] = model.k;
  j["seed"] = model.arrangement.seed;
  j["lambda"] = model.lambda;
  j["bias_flag"] = model.bias;
  j["U"] = std::vector<double>(model.arrangement.gates.data(),
                               model.arrangement.gates.data() + model.arrangement.gates.size());
  j["V"] = std::vector<double>(model.V.data(), model.V.data() + model.V.size());
  return j;
}

// Restores exactly what was saved; gates are taken from U, not resampled.
inline DualModel ModelFromJson(const Json& j) {
  Require(JsonField<std::string>(j, "format") == "cvxdp-dual-model", ErrorKind::kFormat,
          "not a dual model checkpoint");
  const auto d = JsonField<Eigen::Index>(j, "d");
  const auto P = JsonField<Eigen::Index>(j, "P");
  const auto k = JsonField<Eigen::Index>(j, "k");
  Require(d >= 1 && P >= 1 && k >= 1, ErrorKind::kFormat, "checkpoint has invalid sizes");
  const auto U = JsonField<std::vector<double>>(j, "U");
  const auto V = JsonField<std::vector<double>>(j, "V");
  Require(static_cast<Eigen::Index>(U.size()) == P * d, ErrorKind::kFormat,
          "checkpoint U has the wrong length");
  Require(static_cast<Eigen::Index>(V.size()) == P * d * k, ErrorKind::kFormat,
          "checkpoint V has the wrong length");
  DualModel m;
  m.arrangement.seed = JsonField<std::uint64_t>(j, "seed");
  m.arrangement.gates = Eigen::Map<const RowMatrix>(U.data(), P, d);
  m.k = k;
  m.lambda = JsonField<double>(j, "lambda");
  m.bias = JsonField<bool>(j, "bias_flag");
  m.V = Eigen::Map<const Eigen::VectorXd>(V.data(), static_cast<Eigen::Index>(V.size()));
  return m;
}

inline void SaveModel(const std::filesystem::path& path, const DualModel& model) {
  WriteJsonFile(path, ModelToJson(model));
}

inline DualModel LoadModel(const std::filesystem::path& path) {
  return ModelFromJson(ReadJsonFile(path));
}

}  // namespace cvxdp::convex_dual
