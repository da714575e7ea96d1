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
#include <set>
#include <string>
#include <vector>

#include "cvxdp/core/error.hpp"
#include "cvxdp/core/json_io.hpp"

namespace cvxdp::experiment {

inline const std::vector<std::string>& KnownMethods() {
  static const std::vector<std::string> methods = {"dual-dpsgd", "dual-noisycgd", "relu-dpsgd",
                                                   "linear-dpsgd", "dpgd"};
  return methods;
}

struct DatasetConfig {
  std::string kind = "synthetic";  // synthetic | idx | csv
  // synthetic
  std::int64_t n_train = 1000;
  std::int64_t n_test = 500;
  std::int64_t d = 20;
  int num_classes = 10;
  std::string rule = "relu_teacher";  // random_labels | linear_teacher | relu_teacher
  std::int64_t teacher_width = 0;
  std::uint64_t seed = 0;
  // idx
  std::string train_images, train_labels, test_images, test_labels;
  // csv
  std::string train_csv, test_csv;
  // 0 keeps everything; otherwise a stratified subset of that size
  std::int64_t train_subset = 0;
  std::int64_t test_subset = 0;
  bool standardize = false;
};

struct SeedConfig {
  std::uint64_t gates = 1;
  std::uint64_t init = 2;
  std::uint64_t batches = 3;
  std::uint64_t noise = 4;
};

struct RunConfig {
  std::string method = "dual-dpsgd";
  DatasetConfig dataset;
  std::int64_t P = 32;
  std::int64_t hidden_width = 200;
  bool bias = true;
  std::string loss = "cross_entropy";  // cross_entropy | mse
  double C = 1.0;
  double sigma = 1.0;
  std::int64_t b = 100;
  double eta = 0.1;
  std::optional<double> lambda;  // unset: eta_lambda / eta for NoisyCGD, 0 otherwise
  double eta_lambda = 2e-4;
  int epochs = 20;
  bool account = true;
  double delta = 1e-5;
  double grid_step = 1e-3;
  double eps_max = 32.0;
  SeedConfig seeds;
  std::string output_dir = "cvxdp_out";
  std::string name = "run";
  bool save_model = true;

  double ResolvedLambda() const {
    if (lambda) return *lambda;
    return method == "dual-noisycgd" ? eta_lambda / eta : 0.0;
  }
};

namespace internal {

// Reads typed fields from a JSON object, remembering which keys were used
// so that misspelled keys can be reported with their full path.
class FieldReader {
 public:
  FieldReader(const Json& j, std::string path) : j_(j), path_(std::move(path)) {
    Require(j.is_object(), ErrorKind::kConfig, Where("") + " must be a JSON object");
  }

  template <typename T>
  void Read(const std::string& key, T& out) {
    used_.insert(key);
    if (!j_.contains(key)) return;
    try {
      out = j_.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
      Fail(ErrorKind::kConfig, Where(key) + ": wrong type");
    }
  }

  template <typename T>
  void ReadOptional(const std::string& key, std::optional<T>& out) {
    used_.insert(key);
    if (!j_.contains(key) || j_.at(key).is_null()) return;
    T v{};
    Read(key, v);
    out = v;
  }

  const Json* Child(const std::string& key) {
    used_.insert(key);
    return j_.contains(key) ? &j_.at(key) : nullptr;
  }

  std::string Where(const std::string& key) const {
    if (key.empty()) return path_.empty() ? "config" : path_;
    return path_.empty() ? key : path_ + "." + key;
  }

  void RejectUnknown() const {
    for (const auto& [key, value] : j_.items()) {
      Require(used_.count(key) > 0, ErrorKind::kConfig, Where(key) + ": unknown field");
    }
  }

 private:
  const Json& j_;
  std::string path_;
  std::set<std::string> used_;
};

}  // namespace internal

inline DatasetConfig DatasetFromJson(const Json& j) {
  DatasetConfig c;
  internal::FieldReader r(j, "dataset");
  r.Read("kind", c.kind);
  r.Read("n_train", c.n_train);
  r.Read("n_test", c.n_test);
  r.Read("d", c.d);
  r.Read("num_classes", c.num_classes);
  r.Read("rule", c.rule);
  r.Read("teacher_width", c.teacher_width);
  r.Read("seed", c.seed);
  r.Read("train_images", c.train_images);
  r.Read("train_labels", c.train_labels);
  r.Read("test_images", c.test_images);
  r.Read("test_labels", c.test_labels);
  r.Read("train_csv", c.train_csv);
  r.Read("test_csv", c.test_csv);
  r.Read("train_subset", c.train_subset);
  r.Read("test_subset", c.test_subset);
  r.Read("standardize", c.standardize);
  r.RejectUnknown();
  return c;
}

inline Json DatasetToJson(const DatasetConfig& c) {
  Json j;
  j["kind"] = c.kind;
  if (c.kind == "synthetic") {
    j["n_train"] = c.n_train;
    j["n_test"] = c.n_test;
    j["d"] = c.d;
    j["num_classes"] = c.num_classes;
    j["rule"] = c.rule;
    j["teacher_width"] = c.teacher_width;
    j["seed"] = c.seed;
  } else if (c.kind == "idx") {
    j["train_images"] = c.train_images;
    j["train_labels"] = c.train_labels;
    j["test_images"] = c.test_images;
    j["test_labels"] = c.test_labels;
    j["seed"] = c.seed;
  } else {
    j["train_csv"] = c.train_csv;
    j["test_csv"] = c.test_csv;
    j["seed"] = c.seed;
  }
  j["train_subset"] = c.train_subset;
  j["test_subset"] = c.test_subset;
  j["standardize"] = c.standardize;
  return j;
}

inline void ValidateConfig(const RunConfig& c) {
  auto need = [](bool ok, const std::string& field, const std::string& msg) {
    Require(ok, ErrorKind::kConfig, field + ": " + msg);
  };
  bool known = false;
  for (const auto& m : KnownMethods()) known = known || m == c.method;
  need(known, "method", "unknown method '" + c.method + "'");
  const auto& d = c.dataset;
  need(d.kind == "synthetic" || d.kind == "idx" || d.kind == "csv", "dataset.kind",
       "must be synthetic, idx or csv");
  if (d.kind == "synthetic") {
    need(d.n_train >= 1, "dataset.n_train", "must be >= 1");
    need(d.n_test >= 1, "dataset.n_test", "must be >= 1");
    need(d.d >= 1, "dataset.d", "must be >= 1");
    need(d.num_classes >= 0, "dataset.num_classes", "must be >= 0");
    need(d.rule == "random_labels" || d.rule == "linear_teacher" || d.rule == "relu_teacher",
         "dataset.rule", "must be random_labels, linear_teacher or relu_teacher");
  } else if (d.kind == "idx") {
    need(!d.train_images.empty() && !d.train_labels.empty() && !d.test_images.empty() &&
             !d.test_labels.empty(),
         "dataset", "idx datasets need train_images, train_labels, test_images, test_labels");
  } else {
    need(!d.train_csv.empty() && !d.test_csv.empty(), "dataset",
         "csv datasets need train_csv and test_csv");
  }
  need(d.train_subset >= 0, "dataset.train_subset", "must be >= 0");
  need(d.test_subset >= 0, "dataset.test_subset", "must be >= 0");
  need(c.P >= 1, "P", "must be >= 1");
  need(c.hidden_width >= 1, "hidden_width", "must be >= 1");
  need(c.loss == "cross_entropy" || c.loss == "mse", "loss", "must be cross_entropy or mse");
  need(c.C > 0.0, "C", "must be positive");
  need(c.sigma >= 0.0 && std::isfinite(c.sigma), "sigma", "must be finite and >= 0");
  need(c.b >= 1, "b", "must be >= 1");
  need(c.eta > 0.0 && std::isfinite(c.eta), "eta", "must be positive");
  need(!c.lambda || *c.lambda >= 0.0, "lambda", "must be >= 0");
  need(c.eta_lambda > 0.0, "eta_lambda", "must be positive");
  need(c.epochs >= 1, "epochs", "must be >= 1");
  need(c.delta > 0.0 && c.delta < 1.0, "delta", "must lie in (0, 1)");
  need(c.grid_step > 0.0 && c.grid_step <= 0.1, "grid_step", "must lie in (0, 0.1]");
  need(c.eps_max > 0.0, "eps_max", "must be positive");
  need(!c.name.empty() && c.name.find('/') == std::string::npos, "name",
       "must be a non-empty file stem");
  if (c.method == "dual-noisycgd") need(c.ResolvedLambda() > 0.0, "lambda", "NoisyCGD needs lambda > 0");
}

inline RunConfig ConfigFromJson(const Json& j) {
  RunConfig c;
  internal::FieldReader r(j, "");
  r.Read("method", c.method);
  if (const Json* ds = r.Child("dataset")) c.dataset = DatasetFromJson(*ds);
  r.Read("P", c.P);
  r.Read("hidden_width", c.hidden_width);
  r.Read("bias", c.bias);
  r.Read("loss", c.loss);
  r.Read("C", c.C);
  r.Read("sigma", c.sigma);
  r.Read("b", c.b);
  r.Read("eta", c.eta);
  r.ReadOptional("lambda", c.lambda);
  r.Read("eta_lambda", c.eta_lambda);
  r.Read("epochs", c.epochs);
  r.Read("account", c.account);
  r.Read("delta", c.delta);
  r.Read("grid_step", c.grid_step);
  r.Read("eps_max", c.eps_max);
  if (const Json* s = r.Child("seeds")) {
    internal::FieldReader sr(*s, "seeds");
    sr.Read("gates", c.seeds.gates);
    sr.Read("init", c.seeds.init);
    sr.Read("batches", c.seeds.batches);
    sr.Read("noise", c.seeds.noise);
    sr.RejectUnknown();
  }
  r.Read("output_dir", c.output_dir);
  r.Read("name", c.name);
  r.Read("save_model", c.save_model);
  r.RejectUnknown();
  ValidateConfig(c);
  return c;
}

// Fully resolved configuration, including defaulted fields.
inline Json ConfigToJson(const RunConfig& c) {
  Json j;
  j["method"] = c.method;
  j["dataset"] = DatasetToJson(c.dataset);
  j["P"] = c.P;
  j["hidden_width"] = c.hidden_width;
  j["bias"] = c.bias;
  j["loss"] = c.loss;
  j["C"] = c.C;
  j["sigma"] = c.sigma;
  j["b"] = c.b;
  j["eta"] = c.eta;
  j["lambda"] = c.ResolvedLambda();
  j["eta_lambda"] = c.eta_lambda;
  j["epochs"] = c.epochs;
  j["account"] = c.account;
  j["delta"] = c.delta;
  j["grid_step"] = c.grid_step;
  j["eps_max"] = c.eps_max;
  j["seeds"] = {{"gates", c.seeds.gates}, {"init", c.seeds.init}, {"batches", c.seeds.batches},
                {"noise", c.seeds.noise}};
  j["output_dir"] = c.output_dir;
  j["name"] = c.name;
  j["save_model"] = c.save_model;
  return j;
}

// Sets a dotted path ("dataset.n_train") inside a JSON object. The value is
// parsed as JSON when possible and taken as a string otherwise.
inline void ApplyOverride(Json& j, const std::string& assignment) {
  const auto eq = assignment.find('=');
  Require(eq != std::string::npos && eq > 0, ErrorKind::kConfig,
          "override '" + assignment + "' is not of the form key=value");
  const std::string path = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);
  Json value;
  try {
    value = Json::parse(text);
  } catch (const nlohmann::json::exception&) {
    value = text;
  }
  Json* node = &j;
  std::size_t start = 0;
  while (true) {
    const auto dot = path.find('.', start);
    const std::string key = path.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    Require(!key.empty(), ErrorKind::kConfig, "override path '" + path + "' has an empty component");
    if (!node->is_object()) *node = Json::object();
    if (dot == std::string::npos) {
      (*node)[key] = value;
      return;
    }
    node = &(*node)[key];
    start = dot + 1;
  }
}

}  // namespace cvxdp::experiment
