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

#include <cstdlib>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "cvxdp/baseline/mlp.hpp"
#include "cvxdp/convex_dual/checkpoint.hpp"
#include "cvxdp/convex_dual/model.hpp"
#include "cvxdp/core/error.hpp"
#include "cvxdp/core/json_io.hpp"
#include "cvxdp/data/dataset.hpp"
#include "cvxdp/data/io.hpp"
#include "cvxdp/data/synthetic.hpp"
#include "cvxdp/experiment/accounting.hpp"
#include "cvxdp/experiment/config.hpp"
#include "cvxdp/optimizers/dpgd.hpp"
#include "cvxdp/optimizers/objectives.hpp"
#include "cvxdp/optimizers/private_sgd.hpp"

namespace cvxdp::experiment {

inline constexpr const char* kOutputDirEnv = "CVXDP_OUTPUT_DIR";

// The configured output directory unless the environment overrides it.
inline std::filesystem::path OutputDir(const RunConfig& cfg) {
  if (const char* env = std::getenv(kOutputDirEnv); env != nullptr && *env != '\0') return env;
  return cfg.output_dir;
}

struct DataSplit {
  data::Dataset train;
  data::Dataset test;
};

inline DataSplit LoadData(const DatasetConfig& c) {
  DataSplit s;
  if (c.kind == "synthetic") {
    data::SyntheticSpec spec;
    spec.n = c.n_train + c.n_test;
    spec.d = c.d;
    spec.num_classes = c.num_classes;
    spec.teacher_width = c.teacher_width;
    spec.seed = c.seed;
    if (c.rule == "random_labels") {
      spec.rule = data::TargetRule::kRandomLabels;
    } else if (c.rule == "linear_teacher") {
      spec.rule = data::TargetRule::kLinearTeacher;
    } else {
      spec.rule = data::TargetRule::kReluTeacher;
    }
    const data::Dataset all = data::SyntheticGaussian(spec);
    std::vector<Eigen::Index> head(static_cast<std::size_t>(c.n_train)), tail(static_cast<std::size_t>(c.n_test));
    for (std::size_t i = 0; i < head.size(); ++i) head[i] = static_cast<Eigen::Index>(i);
    for (std::size_t i = 0; i < tail.size(); ++i) tail[i] = c.n_train + static_cast<Eigen::Index>(i);
    s.train = data::SelectRows(all, head);
    s.test = data::SelectRows(all, tail);
    s.train.name = "synthetic_train";
    s.test.name = "synthetic_test";
  } else if (c.kind == "idx") {
    s.train = data::LoadIdx(c.train_images, c.train_labels);
    s.test = data::LoadIdx(c.test_images, c.test_labels);
  } else {
    s.train = data::LoadCsv(c.train_csv);
    s.test = data::LoadCsv(c.test_csv);
  }
  Require(s.train.n() >= 1 && s.test.n() >= 1, ErrorKind::kConfig, "dataset: empty train or test set");
  Require(s.train.d() == s.test.d(), ErrorKind::kConfig, "dataset: train and test dimensions differ");
  if (s.train.IsClassification() || s.test.IsClassification()) {
    Require(s.train.IsClassification() && s.test.IsClassification(), ErrorKind::kConfig,
            "dataset: train and test disagree on classification vs regression");
    const int k = std::max(s.train.num_classes, s.test.num_classes);
    s.train.num_classes = s.test.num_classes = k;
  }
  if (c.train_subset > 0) s.train = data::Subset(s.train, c.train_subset, c.seed);
  if (c.test_subset > 0) s.test = data::Subset(s.test, c.test_subset, c.seed + 1);
  if (c.standardize) data::Standardize(s.train, s.test);
  s.train.Validate();
  s.test.Validate();
  return s;
}

struct RunResult {
  RunConfig config;
  optimizers::TrainTrace trace;
  Json report;
  std::filesystem::path csv_path;
  std::filesystem::path report_path;
  std::optional<std::filesystem::path> model_path;
};

namespace internal {

inline double Accuracy(const data::Dataset& ds, const std::function<Eigen::VectorXd(Eigen::Index)>& predict) {
  Eigen::Index correct = 0;
  for (Eigen::Index i = 0; i < ds.n(); ++i) {
    Eigen::Index arg = 0;
    predict(i).maxCoeff(&arg);
    if (arg == ds.labels[static_cast<std::size_t>(i)]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(ds.n());
}

inline std::function<Eigen::VectorXd(Eigen::Index)> DualPredictor(const convex_dual::DualModel& model,
                                                                  const data::Dataset& ds) {
  auto X = std::make_shared<convex_dual::RowMatrix>(convex_dual::AugmentData(model.bias, ds.X));
  auto masks = std::make_shared<convex_dual::MaskTable>(convex_dual::ComputeMasks(*X, model.arrangement));
  return [&model, X, masks](Eigen::Index i) {
    return convex_dual::Forward(model, X->row(i).transpose(), masks->row(static_cast<std::size_t>(i)));
  };
}

}  // namespace internal

// Trains one configuration and writes <name>.csv, <name>.json and, when
// requested, the model checkpoint <name>.model.json.
inline RunResult Run(const RunConfig& cfg) {
  ValidateConfig(cfg);
  DataSplit split = LoadData(cfg.dataset);
  const data::Dataset& train = split.train;
  const data::Dataset& test = split.test;
  const bool classify = train.IsClassification();
  const auto kind = cfg.loss == "mse" ? baseline::LossKind::kMse : baseline::LossKind::kCrossEntropy;
  Require(classify || kind == baseline::LossKind::kMse, ErrorKind::kConfig,
          "loss: regression data needs mse");
  const Eigen::Index k = classify ? train.num_classes : 1;
  Require(kind == baseline::LossKind::kMse || k >= 2, ErrorKind::kConfig,
          "loss: cross_entropy needs at least two classes");
  const double lambda = cfg.ResolvedLambda();
  const Eigen::Index n = train.n();
  Require(cfg.b <= n, ErrorKind::kConfig,
          "b: batch size " + std::to_string(cfg.b) + " exceeds n = " + std::to_string(n));

  AccountingSettings acct{cfg.delta, cfg.grid_step, cfg.eps_max};
  RunResult result;
  result.config = cfg;
  Json accountant_inputs = nullptr;

  std::optional<convex_dual::DualModel> dual;
  std::optional<baseline::Mlp> mlp;
  std::function<Eigen::VectorXd(Eigen::Index)> predict;

  if (cfg.method == "relu-dpsgd") {
    mlp = baseline::MakeMlp(train.d() + (cfg.bias ? 1 : 0), cfg.hidden_width, k, cfg.seeds.init);
    auto Xt = std::make_shared<convex_dual::RowMatrix>(convex_dual::AugmentData(cfg.bias, test.X));
    predict = [&mlp, Xt](Eigen::Index i) { return baseline::MlpForward(*mlp, Xt->row(i).transpose()); };
  } else if (cfg.method == "linear-dpsgd") {
    dual = optimizers::MakeLinearModel(train.d(), k, lambda, cfg.bias);
  } else {
    dual = convex_dual::MakeDualModel(train.d(), cfg.P, k, lambda, cfg.bias, cfg.seeds.gates);
  }
  if (dual) predict = internal::DualPredictor(*dual, test);

  // Epsilon after a given number of epochs (iterations for DP-GD).
  std::function<std::optional<AccountantRecord>(std::int64_t)> epsilon_at;
  const bool noisy = cfg.sigma > 0.0;
  std::optional<DpsgdAccountant> dpsgd_acct;
  std::optional<accountant::NoisyCGDSpec> cgd_spec;

  if (cfg.account) {
    if (cfg.method == "dual-noisycgd") {
      Require(n % cfg.b == 0, ErrorKind::kConfig, "b: NoisyCGD needs b to divide n");
      double max_sq = 0.0;
      const auto X = convex_dual::AugmentData(cfg.bias, train.X);
      for (Eigen::Index i = 0; i < n; ++i) max_sq = std::max(max_sq, X.row(i).squaredNorm());
      accountant::NoisyCGDSpec spec;
      spec.L = 2.0 * cfg.C;
      spec.b = cfg.b;
      spec.sigma = cfg.C * cfg.sigma / static_cast<double>(cfg.b);
      spec.eta = cfg.eta;
      spec.lambda_sc = lambda;
      spec.beta_sm = max_sq + lambda;
      spec.k = n / cfg.b;
      if (noisy) {
        spec.E = 1;
        Require(accountant::ForgettingConstant(spec) < 1.0, ErrorKind::kConfig,
                "eta: the final-iterate bound needs eta * (max ||x||^2 + lambda) < 2 (got " +
                    optimizers::ExactDouble(cfg.eta * spec.beta_sm) + ")");
      }
      cgd_spec = spec;
      epsilon_at = [&, noisy](std::int64_t epoch) {
        accountant::NoisyCGDSpec s = *cgd_spec;
        s.E = epoch;
        if (!noisy) {
          AccountantRecord r;
          r.method = "noisycgd";
          r.delta = acct.delta;
          r.eps_max = acct.eps_max;
          r.epsilon = std::numeric_limits<double>::infinity();
          return std::optional<AccountantRecord>(r);
        }
        return std::optional<AccountantRecord>(NoisyCgdQuery(s, acct));
      };
    } else if (cfg.method == "dpgd") {
      epsilon_at = [&](std::int64_t t) { return std::optional<AccountantRecord>(DpgdQuery(cfg.sigma, t, acct)); };
    } else {
      dpsgd_acct.emplace(cfg.sigma, static_cast<double>(cfg.b) / static_cast<double>(n), acct);
      const std::int64_t per_epoch = n / cfg.b;
      epsilon_at = [&, per_epoch](std::int64_t epoch) {
        return std::optional<AccountantRecord>(dpsgd_acct->Query(epoch * per_epoch));
      };
    }
  }

  std::optional<AccountantRecord> last_record;
  auto hook = [&](optimizers::EpochRecord& rec) {
    if (classify) rec.test_accuracy = internal::Accuracy(test, predict);
    if (epsilon_at) {
      last_record = epsilon_at(rec.epoch);
      if (last_record) rec.epsilon = last_record->epsilon;
    }
  };

  if (cfg.method == "dual-noisycgd") {
    optimizers::DualObjective obj(*dual, train, kind);
    optimizers::NoisyCgdConfig oc{cfg.C, cfg.sigma, cfg.b, cfg.eta, cfg.epochs, cfg.seeds.batches,
                                  cfg.seeds.noise};
    result.trace = optimizers::NoisyCgdRun(obj, oc, hook);
  } else if (cfg.method == "dpgd") {
    optimizers::DualObjective obj(*dual, train, kind);
    const Eigen::Index p = dual->NumParams();
    const optimizers::GradientOracle grad = [&](const Eigen::VectorXd& theta, Eigen::Index i) {
      dual->V = theta;
      Eigen::VectorXd g = Eigen::VectorXd::Zero(p);
      obj.AccumulateClipped(i, std::numeric_limits<double>::infinity(), g);
      return Eigen::VectorXd(g + lambda * theta);
    };
    optimizers::DpgdConfig dc;
    dc.L = cfg.C;
    dc.T = cfg.epochs;
    dc.sigma = cfg.C * cfg.sigma / static_cast<double>(n);
    dc.eta = cfg.eta;
    dc.seed = cfg.seeds.noise;
    const Eigen::VectorXd avg = optimizers::DpgdRun(
        n, p, grad, optimizers::AllSpace{}, dc, [&](std::int64_t t, const Eigen::VectorXd& average, const Engine& noise) {
          const Eigen::VectorXd current = dual->V;
          dual->V = average;
          optimizers::EpochRecord rec;
          rec.epoch = static_cast<int>(t);
          rec.train_loss = optimizers::TrainingLoss(obj);
          rec.rng_state_digest = EngineDigest(noise);
          hook(rec);
          result.trace.epochs.push_back(std::move(rec));
          dual->V = current;
        });
    dual->V = avg;
  } else {
    optimizers::DpsgdConfig oc;
    oc.C = cfg.C;
    oc.sigma = cfg.sigma;
    oc.b = cfg.b;
    oc.eta = cfg.eta;
    oc.epochs = cfg.epochs;
    oc.batch_seed = cfg.seeds.batches;
    oc.noise_seed = cfg.seeds.noise;
    if (mlp) {
      optimizers::MlpObjective obj(*mlp, train, kind, lambda, cfg.bias);
      result.trace = optimizers::DpsgdRun(obj, oc, hook);
    } else {
      optimizers::DualObjective obj(*dual, train, kind);
      result.trace = optimizers::DpsgdRun(obj, oc, hook);
    }
  }

  const std::filesystem::path dir = OutputDir(cfg);
  result.csv_path = dir / (cfg.name + ".csv");
  result.report_path = dir / (cfg.name + ".json");
  WriteTextFile(result.csv_path, result.trace.ToCsv());
  if (cfg.save_model) {
    result.model_path = dir / (cfg.name + ".model.json");
    if (mlp) {
      baseline::SaveMlp(*result.model_path, *mlp);
    } else {
      convex_dual::SaveModel(*result.model_path, *dual);
    }
  }

  Json report;
  report["config"] = ConfigToJson(cfg);
  report["data"] = {{"n_train", train.n()}, {"n_test", test.n()}, {"d", train.d()}, {"k", k},
                    {"classification", classify}};
  const auto& last = result.trace.epochs.back();
  Json final_j;
  final_j["epoch"] = last.epoch;
  final_j["train_loss"] = last.train_loss;
  final_j["test_acc"] = last.test_accuracy ? Json(*last.test_accuracy) : Json(nullptr);
  if (last.epsilon && std::isinf(*last.epsilon)) {
    final_j["epsilon"] = "inf";
  } else {
    final_j["epsilon"] = last.epsilon ? Json(*last.epsilon) : Json(nullptr);
  }
  report["final"] = final_j;
  report["accountant"] = last_record ? accountant::ToJson(*last_record) : Json(nullptr);
  report["warnings"] = result.trace.warnings;
  report["trace"] = result.trace.ToJson();
  report["trace_digest"] = result.trace.Digest();
  report["outputs"] = {{"csv", result.csv_path.string()},
                       {"model", result.model_path ? Json(result.model_path->string()) : Json(nullptr)}};
  result.report = report;
  WriteJsonFile(result.report_path, report);
  return result;
}

}  // namespace cvxdp::experiment
