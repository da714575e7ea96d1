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

#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <string>

#include "cvxdp/accountant/gaussian.hpp"
#include "cvxdp/core/json_io.hpp"
#include "cvxdp/experiment/accounting.hpp"
#include "cvxdp/experiment/config.hpp"
#include "cvxdp/experiment/run.hpp"
#include "cvxdp/experiment/sweep.hpp"
#include "gtest/gtest.h"

namespace cvxdp::experiment {
namespace {

namespace fs = std::filesystem;

fs::path ScratchDir() {
  const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
  const fs::path dir = fs::temp_directory_path() / "cvxdp_experiment_test" /
                       (std::string(info->test_suite_name()) + "_" + info->name());
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

Json SmallConfig(const fs::path& dir) {
  Json j;
  j["dataset"] = {{"kind", "synthetic"}, {"n_train", 200}, {"n_test", 100}, {"d", 5},
                  {"num_classes", 3},    {"rule", "relu_teacher"},          {"seed", 7}};
  j["P"] = 8;
  j["b"] = 20;
  j["epochs"] = 3;
  j["sigma"] = 2.0;
  j["eta"] = 0.2;
  j["output_dir"] = dir.string();
  return j;
}

TEST(ConfigTest, DefaultsRoundTripAndEmit) {
  const RunConfig c = ConfigFromJson(Json::object());
  EXPECT_EQ(c.method, "dual-dpsgd");
  const Json emitted = ConfigToJson(c);
  EXPECT_EQ(ConfigToJson(ConfigFromJson(emitted)), emitted);
}

TEST(ConfigTest, NoisyCgdLambdaRule) {
  Json j;
  j["method"] = "dual-noisycgd";
  j["eta"] = 0.01;
  EXPECT_DOUBLE_EQ(ConfigFromJson(j).ResolvedLambda(), 2e-4 / 0.01);
  j["lambda"] = 0.5;
  EXPECT_DOUBLE_EQ(ConfigFromJson(j).ResolvedLambda(), 0.5);
  j["method"] = "dual-dpsgd";
  j.erase("lambda");
  EXPECT_DOUBLE_EQ(ConfigFromJson(j).ResolvedLambda(), 0.0);
}

TEST(ConfigTest, ErrorsNameTheField) {
  auto message = [](const Json& j) {
    try {
      ConfigFromJson(j);
    } catch (const Error& e) {
      EXPECT_EQ(e.kind(), ErrorKind::kConfig);
      return std::string(e.what());
    }
    return std::string();
  };
  EXPECT_NE(message({{"dataset", {{"n_trian", 5}}}}).find("dataset.n_trian"), std::string::npos);
  EXPECT_NE(message({{"sigma", -1.0}}).find("sigma"), std::string::npos);
  EXPECT_NE(message({{"b", "ten"}}).find("b"), std::string::npos);
  EXPECT_NE(message({{"seeds", {{"noize", 1}}}}).find("seeds.noize"), std::string::npos);
}

TEST(ConfigTest, DottedOverrides) {
  Json j = Json::object();
  ApplyOverride(j, "dataset.n_train=50");
  ApplyOverride(j, "method=dpgd");
  ApplyOverride(j, "lambda=null");
  EXPECT_EQ(j["dataset"]["n_train"], 50);
  EXPECT_EQ(j["method"], "dpgd");
  EXPECT_THROW(ApplyOverride(j, "novalue"), Error);
}

TEST(RunTest, RepeatedRunIsByteIdentical) {
  const fs::path dir = ScratchDir();
  Json j = SmallConfig(dir);
  j["name"] = "a";
  const auto a = experiment::Run(ConfigFromJson(j));
  j["name"] = "b";
  const auto b = experiment::Run(ConfigFromJson(j));
  EXPECT_EQ(ReadTextFile(a.csv_path), ReadTextFile(b.csv_path));
  EXPECT_EQ(ReadTextFile(*a.model_path), ReadTextFile(*b.model_path));
  EXPECT_EQ(a.trace.epochs.size(), 3u);
}

TEST(RunTest, DpsgdEpsilonMatchesStandaloneAccountant) {
  const fs::path dir = ScratchDir();
  const auto r = experiment::Run(ConfigFromJson(SmallConfig(dir)));
  const DpsgdAccountant acct(2.0, 20.0 / 200.0, {});
  for (const auto& e : r.trace.epochs) {
    ASSERT_TRUE(e.epsilon.has_value());
    EXPECT_NEAR(*e.epsilon, acct.Query(e.epoch * 10).epsilon, 1e-9);
  }
  EXPECT_EQ(r.report["accountant"]["T"], 30);
  EXPECT_DOUBLE_EQ(r.report["accountant"]["q"].get<double>(), 0.1);
}

TEST(RunTest, NoisyCgdEpsilonMatchesGdpConversion) {
  const fs::path dir = ScratchDir();
  Json j = SmallConfig(dir);
  j["method"] = "dual-noisycgd";
  j["eta"] = 0.02;
  const auto r = experiment::Run(ConfigFromJson(j));
  const Json& acc = r.report["accountant"];
  accountant::NoisyCGDSpec spec;
  spec.L = acc["L"];
  spec.b = acc["b"];
  spec.sigma = acc["sigma"];
  spec.eta = acc["eta"];
  spec.lambda_sc = acc["lambda"];
  spec.beta_sm = acc["beta"];
  spec.k = acc["k"];
  spec.E = acc["E"];
  EXPECT_DOUBLE_EQ(spec.L, 2.0);
  EXPECT_DOUBLE_EQ(spec.sigma, 2.0 / 20.0);
  const double mu = accountant::NoisyCgdMu(spec);
  EXPECT_NEAR(r.trace.epochs.back().epsilon.value(), GaussianEpsilon(mu, 1e-5, 32.0), 1e-9);
}

TEST(RunTest, NoisyCgdRejectsUnaccountableStep) {
  const fs::path dir = ScratchDir();
  Json j = SmallConfig(dir);
  j["method"] = "dual-noisycgd";
  j["eta"] = 5.0;
  EXPECT_THROW(experiment::Run(ConfigFromJson(j)), Error);
}

TEST(RunTest, ZeroNoiseReportsInfiniteEpsilon) {
  const fs::path dir = ScratchDir();
  Json j = SmallConfig(dir);
  j["sigma"] = 0.0;
  const auto r = experiment::Run(ConfigFromJson(j));
  EXPECT_TRUE(std::isinf(r.trace.epochs.back().epsilon.value()));
  EXPECT_NE(ReadTextFile(r.csv_path).find(",inf\n"), std::string::npos);
  EXPECT_EQ(r.report["final"]["epsilon"], "inf");
}

TEST(RunTest, OtherMethodsTrain) {
  const fs::path dir = ScratchDir();
  for (const std::string method : {"relu-dpsgd", "linear-dpsgd", "dpgd"}) {
    Json j = SmallConfig(dir);
    j["method"] = method;
    j["hidden_width"] = 16;
    j["name"] = method;
    if (method == "dpgd") j["sigma"] = 20.0;
    const auto r = experiment::Run(ConfigFromJson(j));
    EXPECT_EQ(r.trace.epochs.size(), 3u) << method;
    EXPECT_TRUE(std::isfinite(r.trace.epochs.back().train_loss)) << method;
    EXPECT_TRUE(r.trace.epochs.back().epsilon.has_value()) << method;
  }
}

TEST(RunTest, OutputDirEnvironmentOverride) {
  const fs::path dir = ScratchDir();
  Json j = SmallConfig(dir / "configured");
  ::setenv(kOutputDirEnv, (dir / "from_env").c_str(), 1);
  const auto r = experiment::Run(ConfigFromJson(j));
  ::unsetenv(kOutputDirEnv);
  EXPECT_TRUE(fs::exists(dir / "from_env" / "run.csv"));
  EXPECT_FALSE(fs::exists(dir / "configured" / "run.csv"));
}

TEST(RunTest, RegressionCsvDataset) {
  const fs::path dir = ScratchDir();
  WriteTextFile(dir / "train.csv", "a,b,y\n0.1,0.2,0.5\n-1,2,1.5\n0.3,0.3,-0.2\n1,1,0.25\n");
  WriteTextFile(dir / "test.csv", "a,b,y\n0.5,0.5,0.1\n");
  Json j;
  j["dataset"] = {{"kind", "csv"}, {"train_csv", (dir / "train.csv").string()},
                  {"test_csv", (dir / "test.csv").string()}};
  j["loss"] = "mse";
  j["b"] = 2;
  j["P"] = 4;
  j["epochs"] = 2;
  j["output_dir"] = dir.string();
  const auto r = experiment::Run(ConfigFromJson(j));
  EXPECT_FALSE(r.trace.epochs.back().test_accuracy.has_value());
  j["loss"] = "cross_entropy";
  EXPECT_THROW(experiment::Run(ConfigFromJson(j)), Error);
}

TEST(SweepTest, GridOrderAndSinglePointEqualsRun) {
  const fs::path dir = ScratchDir();
  Json base = SmallConfig(dir);
  base["name"] = "sw";
  const auto s = Sweep(base, Json::parse(R"({"eta": [0.3, 0.1]})"));
  ASSERT_EQ(s.points.size(), 2u);
  EXPECT_EQ(s.points[0].assignment["eta"], 0.3);
  EXPECT_EQ(s.points[1].assignment["eta"], 0.1);
  EXPECT_TRUE(fs::exists(dir / "sw_sweep.csv"));

  const auto one = Sweep(base, Json::parse(R"({"eta": [0.2]})"));
  base["name"] = "single";
  const auto r = experiment::Run(ConfigFromJson(base));
  EXPECT_EQ(ReadTextFile(dir / "sw_0.csv"), ReadTextFile(r.csv_path));
  EXPECT_EQ(one.points[0].test_accuracy, r.trace.epochs.back().test_accuracy);
}

TEST(SweepTest, EmptyGridIsConfigError) {
  const fs::path dir = ScratchDir();
  for (const char* g : {"{}", R"({"eta": []})", "[]"}) {
    try {
      Sweep(SmallConfig(dir), Json::parse(g));
      FAIL() << g;
    } catch (const Error& e) {
      EXPECT_EQ(e.kind(), ErrorKind::kConfig);
    }
  }
}

TEST(SweepTest, CartesianProduct) {
  const auto pts = ExpandGrid(Json::parse(R"({"P": [2, 4], "eta": [1, 2, 3]})"));
  ASSERT_EQ(pts.size(), 6u);
  EXPECT_EQ(pts[0], Json::parse(R"({"P": 2, "eta": 1})"));
  EXPECT_EQ(pts[5], Json::parse(R"({"P": 4, "eta": 3})"));
}

// The CLI binary, driven through the shell.
int RunCli(const std::string& args, const fs::path& out) {
  const std::string cmd = "CVXDP_OUTPUT_DIR='" + out.string() + "' '" CVXDP_CLI_PATH "' " + args +
                          " > '" + (out / "stdout.txt").string() + "' 2> '" +
                          (out / "stderr.txt").string() + "'";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

TEST(CliTest, ExitCodes) {
  const fs::path dir = ScratchDir();
  EXPECT_EQ(RunCli("account convert-rdp --alpha 2 --eps-rdp 1", dir), 0);
  EXPECT_EQ(RunCli("run --set method=nope", dir), 2);
  EXPECT_EQ(RunCli("run --no-such-flag", dir), 2);
  EXPECT_EQ(RunCli("account dpsgd --sigma 1 --q 2 --steps 1", dir), 2);
  EXPECT_EQ(RunCli("run --config /nonexistent/config.json", dir), 4);
  EXPECT_EQ(RunCli("account noisycgd --L 1 --b 1 --sigma 1 --eta 3 --lambda 1 --beta 1 --k 1 --epochs 2",
                   dir),
            2);
  EXPECT_EQ(RunCli("inspect-pld --sigma 1 --q 0.5 --steps 40000000000", dir), 3);
}

TEST(CliTest, AccountTables) {
  const fs::path dir = ScratchDir();
  ASSERT_EQ(RunCli("account convert-rdp --alpha 2 --eps-rdp 1 --eps 0 1", dir), 0);
  EXPECT_EQ(ReadTextFile(dir / "account_convert_rdp.csv"),
            "alpha,eps_rdp,epsilon,delta\n2,1,0,0.6795704571147614\n2,1,1,0.25\n");
  ASSERT_EQ(RunCli("account dpsgd --sigma 1 --q 1 --steps 1", dir), 0);
  const Json rec = ReadJsonFile(dir / "account_dpsgd.json")[0];
  // Gaussian mechanism with mu = 2 at delta = 1e-5.
  EXPECT_NEAR(rec["epsilon"].get<double>(), 9.997256146434356, 1e-4);
  const Json meta = ReadJsonFile(dir / "account_dpsgd_pld.json")[0];
  EXPECT_DOUBLE_EQ(meta["loss_grid_step"].get<double>(), 1e-3);
  EXPECT_TRUE(meta.contains("trimmed_mass"));
  ASSERT_EQ(RunCli("account noisycgd --L 1 --b 10 --sigma 2 --eta 1 --lambda 0.5 --beta 1.5 --k 2 --epochs 1",
                   dir),
            0);
  const Json cgd = ReadJsonFile(dir / "account_noisycgd.json")[0];
  EXPECT_DOUBLE_EQ(cgd["mu"].get<double>(), 0.05);
}

TEST(CliTest, RunEmitConfigAndRerun) {
  const fs::path dir = ScratchDir();
  WriteJsonFile(dir / "cfg.json", SmallConfig(dir));
  ASSERT_EQ(RunCli("run --config '" + (dir / "cfg.json").string() + "' --emit-config", dir), 0);
  const Json emitted = ParseJson(ReadTextFile(dir / "stdout.txt"), "emitted");
  EXPECT_EQ(emitted["P"], 8);
  WriteJsonFile(dir / "resolved.json", emitted);
  ASSERT_EQ(RunCli("run --config '" + (dir / "resolved.json").string() + "' --set name=first", dir), 0);
  ASSERT_EQ(RunCli("run --config '" + (dir / "resolved.json").string() + "' --set name=second", dir), 0);
  EXPECT_EQ(ReadTextFile(dir / "first.csv"), ReadTextFile(dir / "second.csv"));
}

}  // namespace
}  // namespace cvxdp::experiment
