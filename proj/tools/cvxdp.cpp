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

// Command-line front end: training runs, sweeps and privacy accounting.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <new>
#include <string>
#include <vector>

#include "cvxdp/accountant/rdp.hpp"
#include "cvxdp/accountant/record.hpp"
#include "cvxdp/core/error.hpp"
#include "cvxdp/core/json_io.hpp"
#include "cvxdp/experiment/accounting.hpp"
#include "cvxdp/experiment/config.hpp"
#include "cvxdp/experiment/run.hpp"
#include "cvxdp/experiment/sweep.hpp"
#include "cvxdp/optimizers/trace.hpp"

namespace {

using cvxdp::ErrorKind;
using cvxdp::Json;
using cvxdp::Require;
using cvxdp::optimizers::ExactDouble;
namespace fs = std::filesystem;

std::string EpsText(double eps) { return std::isinf(eps) ? "inf" : ExactDouble(eps); }

fs::path AccountOutputDir(const std::string& flag) {
  if (const char* env = std::getenv(cvxdp::experiment::kOutputDirEnv); env != nullptr && *env) return env;
  return flag;
}

Json LoadConfigJson(const std::string& path, const std::vector<std::string>& overrides) {
  Json j = path.empty() ? Json::object() : cvxdp::ReadJsonFile(path);
  Require(j.is_object(), ErrorKind::kConfig, path + ": config must be a JSON object");
  for (const auto& o : overrides) cvxdp::experiment::ApplyOverride(j, o);
  return j;
}

// Writes a table to stdout and to <dir>/<stem>.csv, plus a JSON record list.
void EmitTable(const fs::path& dir, const std::string& stem, const std::string& csv, const Json& records) {
  std::cout << csv;
  cvxdp::WriteTextFile(dir / (stem + ".csv"), csv);
  cvxdp::WriteJsonFile(dir / (stem + ".json"), records);
}

struct AccountCommon {
  std::vector<double> deltas{1e-5};
  double grid_step = 1e-3;
  double eps_max = cvxdp::accountant::kDefaultEpsMax;
  std::string output_dir = "cvxdp_out";

  void Attach(CLI::App* app) {
    app->add_option("--delta", deltas, "target delta values")->expected(1, -1);
    app->add_option("--grid-step", grid_step, "privacy-loss grid step");
    app->add_option("--eps-max", eps_max, "largest epsilon searched");
    app->add_option("--output-dir", output_dir, "where tables are written");
  }
};

int Main(int argc, char** argv) {
  CLI::App app{"Differentially private training of convexified two-layer ReLU networks"};
  app.require_subcommand(1);

  // run
  auto* run = app.add_subcommand("run", "train one configuration");
  std::string run_config;
  std::vector<std::string> run_sets;
  bool emit_config = false;
  run->add_option("-c,--config", run_config, "JSON run configuration");
  run->add_option("--set", run_sets, "override a field, e.g. --set eta=0.1 --set dataset.n_train=500");
  run->add_flag("--emit-config", emit_config, "print the resolved configuration and exit");

  // sweep
  auto* sweep = app.add_subcommand("sweep", "train a grid of configurations");
  std::string sweep_config, sweep_grid;
  std::vector<std::string> sweep_sets;
  sweep->add_option("-c,--config", sweep_config, "JSON run configuration used as template");
  sweep->add_option("--grid", sweep_grid, "grid as a JSON file or inline JSON object")->required();
  sweep->add_option("--set", sweep_sets, "override a template field");

  // account
  auto* account = app.add_subcommand("account", "epsilon/delta tables");
  account->require_subcommand(1);
  AccountCommon common;

  auto* acc_dpsgd = account->add_subcommand("dpsgd", "DP-SGD with without-replacement batches");
  double d_sigma = 1.0, d_q = 0.01;
  std::vector<std::int64_t> d_steps{1};
  acc_dpsgd->add_option("--sigma", d_sigma, "noise multiplier")->required();
  acc_dpsgd->add_option("--q", d_q, "sampling ratio b/n")->required();
  acc_dpsgd->add_option("--steps", d_steps, "iteration counts")->expected(1, -1)->required();
  common.Attach(acc_dpsgd);

  auto* acc_cgd = account->add_subcommand("noisycgd", "final iterate of noisy cyclic GD (GDP bound)");
  cvxdp::accountant::NoisyCGDSpec cgd;
  std::vector<std::int64_t> cgd_epochs{1};
  acc_cgd->add_option("--L", cgd.L, "gradient sensitivity")->required();
  acc_cgd->add_option("--b", cgd.b, "batch size")->required();
  acc_cgd->add_option("--sigma", cgd.sigma, "std of the noise added to the batch mean")->required();
  acc_cgd->add_option("--eta", cgd.eta, "step size")->required();
  acc_cgd->add_option("--lambda", cgd.lambda_sc, "strong convexity")->required();
  acc_cgd->add_option("--beta", cgd.beta_sm, "smoothness")->required();
  acc_cgd->add_option("--k", cgd.k, "batches per epoch")->required();
  acc_cgd->add_option("--epochs", cgd_epochs, "epoch counts")->expected(1, -1);
  common.Attach(acc_cgd);

  auto* acc_rdp = account->add_subcommand("convert-rdp", "Renyi DP to (epsilon, delta)");
  double r_alpha = 2.0, r_eps_rdp = 1.0;
  std::vector<double> r_eps{0.0, 0.5, 1.0, 2.0, 4.0};
  std::string rdp_output_dir = "cvxdp_out";
  acc_rdp->add_option("--alpha", r_alpha, "Renyi order")->required();
  acc_rdp->add_option("--eps-rdp", r_eps_rdp, "Renyi divergence bound")->required();
  acc_rdp->add_option("--eps", r_eps, "epsilon values")->expected(1, -1);
  acc_rdp->add_option("--output-dir", rdp_output_dir, "where tables are written");

  // inspect-pld
  auto* inspect = app.add_subcommand("inspect-pld", "describe a composed DP-SGD loss distribution");
  double i_sigma = 1.0, i_q = 0.01, i_grid = 1e-3, i_eps_max = cvxdp::accountant::kDefaultEpsMax;
  std::int64_t i_steps = 1;
  bool i_masses = false;
  inspect->add_option("--sigma", i_sigma, "noise multiplier")->required();
  inspect->add_option("--q", i_q, "sampling ratio")->required();
  inspect->add_option("--steps", i_steps, "iterations");
  inspect->add_option("--grid-step", i_grid, "privacy-loss grid step");
  inspect->add_option("--eps-max", i_eps_max, "grid cap");
  inspect->add_flag("--masses", i_masses, "include every grid mass");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : cvxdp::ExitCode(ErrorKind::kConfig);
  }

  if (run->parsed()) {
    const Json j = LoadConfigJson(run_config, run_sets);
    const auto cfg = cvxdp::experiment::ConfigFromJson(j);
    if (emit_config) {
      std::cout << cvxdp::experiment::ConfigToJson(cfg).dump(2) << "\n";
      return 0;
    }
    const auto result = cvxdp::experiment::Run(cfg);
    for (const auto& w : result.trace.warnings) std::cerr << "warning: " << w << "\n";
    std::cout << result.trace.ToCsv();
    std::cout << "report: " << result.report_path.string() << "\n";
    return 0;
  }

  if (sweep->parsed()) {
    const Json base = LoadConfigJson(sweep_config, sweep_sets);
    Json grid;
    if (!sweep_grid.empty() && sweep_grid.front() == '{') {
      grid = cvxdp::ParseJson(sweep_grid, "--grid");
    } else {
      grid = cvxdp::ReadJsonFile(sweep_grid);
    }
    const auto result = cvxdp::experiment::Sweep(base, grid);
    std::cout << result.table_csv;
    std::cout << "best: " << result.points[result.best].name << "\n";
    return 0;
  }

  if (acc_dpsgd->parsed()) {
    std::string csv = "sigma,q,steps,delta,epsilon\n";
    Json records = Json::array();
    Json pld_meta = Json::array();
    for (double delta : common.deltas) {
      cvxdp::experiment::DpsgdAccountant acct(d_sigma, d_q, {delta, common.grid_step, common.eps_max});
      for (std::int64_t steps : d_steps) {
        const auto r = acct.Query(steps);
        csv += ExactDouble(d_sigma) + "," + ExactDouble(d_q) + "," + std::to_string(steps) + "," +
               ExactDouble(delta) + "," + EpsText(r.epsilon) + "\n";
        records.push_back(cvxdp::accountant::ToJson(r));
        if (delta == common.deltas.front() && d_sigma > 0.0) {
          Json meta = cvxdp::accountant::PldSummary(acct.Compose(steps));
          meta["steps"] = steps;
          meta["eps_max"] = common.eps_max;
          pld_meta.push_back(std::move(meta));
        }
      }
    }
    const fs::path dir = AccountOutputDir(common.output_dir);
    EmitTable(dir, "account_dpsgd", csv, records);
    cvxdp::WriteJsonFile(dir / "account_dpsgd_pld.json", pld_meta);
    return 0;
  }

  if (acc_cgd->parsed()) {
    std::string csv = "E,mu,delta,epsilon\n";
    Json records = Json::array();
    for (double delta : common.deltas) {
      for (std::int64_t E : cgd_epochs) {
        auto spec = cgd;
        spec.E = E;
        const auto r = cvxdp::experiment::NoisyCgdQuery(spec, {delta, common.grid_step, common.eps_max});
        csv += std::to_string(E) + "," + ExactDouble(*r.mu) + "," + ExactDouble(delta) + "," +
               EpsText(r.epsilon) + "\n";
        records.push_back(cvxdp::accountant::ToJson(r));
      }
    }
    EmitTable(AccountOutputDir(common.output_dir), "account_noisycgd", csv, records);
    return 0;
  }

  if (acc_rdp->parsed()) {
    std::string csv = "alpha,eps_rdp,epsilon,delta\n";
    Json records = Json::array();
    for (double eps : r_eps) {
      const double delta = cvxdp::accountant::RdpToDp(r_alpha, r_eps_rdp, eps);
      csv += ExactDouble(r_alpha) + "," + ExactDouble(r_eps_rdp) + "," + ExactDouble(eps) + "," +
             ExactDouble(delta) + "\n";
      records.push_back({{"method", "convert-rdp"}, {"alpha", r_alpha}, {"eps_rdp", r_eps_rdp},
                         {"epsilon", eps}, {"delta", delta}});
    }
    EmitTable(AccountOutputDir(rdp_output_dir), "account_convert_rdp", csv, records);
    return 0;
  }

  if (inspect->parsed()) {
    Require(i_sigma > 0.0, ErrorKind::kConfig, "--sigma must be positive");
    cvxdp::experiment::DpsgdAccountant acct(i_sigma, i_q, {1e-5, i_grid, i_eps_max});
    const auto pld = acct.Compose(i_steps);
    Json j = cvxdp::accountant::PldSummary(pld);
    j["sigma"] = i_sigma;
    j["q"] = i_q;
    j["steps"] = i_steps;
    j["total_mass"] = pld.TotalMass();
    if (i_masses) j["masses"] = pld.masses;
    std::cout << j.dump(2) << "\n";
    return 0;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return Main(argc, argv);
  } catch (const cvxdp::Error& e) {
    std::cerr << "error [" << cvxdp::ToString(e.kind()) << "]: " << e.what() << "\n";
    return cvxdp::ExitCode(e.kind());
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error [io]: " << e.what() << "\n";
    return cvxdp::ExitCode(ErrorKind::kIo);
  } catch (const std::bad_alloc&) {
    std::cerr << "error [resource]: out of memory\n";
    return cvxdp::ExitCode(ErrorKind::kResource);
  } catch (const std::exception& e) {
    std::cerr << "error [numeric]: " << e.what() << "\n";
    return cvxdp::ExitCode(ErrorKind::kNumeric);
  }
}
