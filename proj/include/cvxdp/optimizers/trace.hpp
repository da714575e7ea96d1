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

#include <charconv>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "cvxdp/core/json_io.hpp"
#include "cvxdp/core/rng.hpp"

namespace cvxdp::optimizers {

struct EpochRecord {
  int epoch = 0;
  double train_loss = 0.0;
  std::optional<double> test_accuracy;
  std::optional<double> epsilon;
  std::string rng_state_digest;
};

// Shortest round-trip decimal form, so identical doubles give identical text.
inline std::string ExactDouble(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return "nan";
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

struct TrainTrace {
  std::vector<EpochRecord> epochs;
  std::vector<std::string> warnings;

  std::string ToCsv() const {
    std::string out = "epoch,train_loss,test_acc,epsilon\n";
    for (const auto& r : epochs) {
      out += std::to_string(r.epoch) + "," + ExactDouble(r.train_loss) + ",";
      if (r.test_accuracy) out += ExactDouble(*r.test_accuracy);
      out += ",";
      if (r.epsilon) out += ExactDouble(*r.epsilon);
      out += "\n";
    }
    return out;
  }

  Json ToJson() const {
    Json j = Json::array();
    for (const auto& r : epochs) {
      Json e;
      e["epoch"] = r.epoch;
      e["train_loss"] = r.train_loss;
      e["test_acc"] = r.test_accuracy ? Json(*r.test_accuracy) : Json(nullptr);
      if (!r.epsilon) {
        e["epsilon"] = nullptr;
      } else if (std::isinf(*r.epsilon)) {
        e["epsilon"] = "inf";
      } else {
        e["epsilon"] = *r.epsilon;
      }
      e["rng_state_digest"] = r.rng_state_digest;
      j.push_back(std::move(e));
    }
    return j;
  }

  std::string Digest() const { return HexDigest(Fnv1a64(ToCsv() + ToJson().dump())); }
};

}  // namespace cvxdp::optimizers
