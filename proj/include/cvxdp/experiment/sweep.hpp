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
#include <string>
#include <vector>

#include "cvxdp/core/error.hpp"
#include "cvxdp/core/json_io.hpp"
#include "cvxdp/experiment/config.hpp"
#include "cvxdp/experiment/run.hpp"
#include "cvxdp/optimizers/trace.hpp"

namespace cvxdp::experiment {

struct SweepPoint {
  Json assignment;  // grid key -> value
  std::string name;
  double train_loss = 0.0;
  std::optional<double> test_accuracy;
  std::optional<double> epsilon;
};

struct SweepResult {
  std::vector<SweepPoint> points;
  std::size_t best = 0;
  std::string table_csv;
  Json summary;
};

// Cartesian product of the grid; the first key varies slowest and each
// key keeps its listed value order.
inline std::vector<Json> ExpandGrid(const Json& grid) {
  Require(grid.is_object() && !grid.empty(), ErrorKind::kConfig, "grid: must be a non-empty object");
  std::vector<Json> points{Json::object()};
  for (const auto& [key, values] : grid.items()) {
    Require(values.is_array() && !values.empty(), ErrorKind::kConfig,
            "grid." + key + ": must be a non-empty array");
    std::vector<Json> next;
    for (const auto& p : points) {
      for (const auto& v : values) {
        Json q = p;
        q[key] = v;
        next.push_back(std::move(q));
      }
    }
    points = std::move(next);
  }
  return points;
}

// Runs every grid point of `base` (a run config JSON) and picks the highest
// final test accuracy, or the lowest training loss without labels. Ties go
// to the earlier point.
inline SweepResult Sweep(const Json& base, const Json& grid) {
  const RunConfig base_cfg = ConfigFromJson(base);
  const auto assignments = ExpandGrid(grid);
  SweepResult out;
  for (std::size_t i = 0; i < assignments.size(); ++i) {
    Json cfg_json = base;
    for (const auto& [key, value] : assignments[i].items()) {
      ApplyOverride(cfg_json, key + "=" + value.dump());
    }
    cfg_json["name"] = base_cfg.name + "_" + std::to_string(i);
    const RunResult r = Run(ConfigFromJson(cfg_json));
    const auto& last = r.trace.epochs.back();
    out.points.push_back({assignments[i], r.config.name, last.train_loss, last.test_accuracy, last.epsilon});
  }
  for (std::size_t i = 1; i < out.points.size(); ++i) {
    const auto& a = out.points[i];
    const auto& b = out.points[out.best];
    const bool better = a.test_accuracy ? (*a.test_accuracy > b.test_accuracy.value_or(-1.0))
                                        : (a.train_loss < b.train_loss);
    if (better) out.best = i;
  }

  std::string csv = "index,name";
  for (const auto& [key, v] : grid.items()) csv += "," + key;
  csv += ",train_loss,test_acc,epsilon\n";
  Json rows = Json::array();
  for (std::size_t i = 0; i < out.points.size(); ++i) {
    const auto& p = out.points[i];
    csv += std::to_string(i) + "," + p.name;
    for (const auto& [key, v] : p.assignment.items()) csv += "," + v.dump();
    csv += "," + optimizers::ExactDouble(p.train_loss) + ",";
    if (p.test_accuracy) csv += optimizers::ExactDouble(*p.test_accuracy);
    csv += ",";
    if (p.epsilon) csv += optimizers::ExactDouble(*p.epsilon);
    csv += "\n";
    Json row;
    row["index"] = i;
    row["name"] = p.name;
    row["params"] = p.assignment;
    row["train_loss"] = p.train_loss;
    row["test_acc"] = p.test_accuracy ? Json(*p.test_accuracy) : Json(nullptr);
    row["epsilon"] = !p.epsilon ? Json(nullptr)
                     : std::isinf(*p.epsilon) ? Json("inf")
                                              : Json(*p.epsilon);
    rows.push_back(std::move(row));
  }
  out.table_csv = csv;
  out.summary["base"] = ConfigToJson(base_cfg);
  out.summary["grid"] = grid;
  out.summary["best_index"] = out.best;
  out.summary["best"] = rows[out.best];
  out.summary["table"] = rows;

  const std::filesystem::path dir = OutputDir(base_cfg);
  WriteTextFile(dir / (base_cfg.name + "_sweep.csv"), out.table_csv);
  WriteJsonFile(dir / (base_cfg.name + "_sweep.json"), out.summary);
  return out;
}

}  // namespace cvxdp::experiment
