#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "novograd/cli/commands.hpp"

using namespace novograd;
using namespace novograd::cli;
namespace fs = std::filesystem;

namespace {

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("novograd_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string write_config(const std::string& text, const std::string& name = "config.json") {
    const auto path = dir_ / name;
    std::ofstream(path) << text;
    return path.string();
  }

  CliOptions options(const std::string& text, const std::string& out = "out") {
    CliOptions o;
    o.config_path = write_config(text);
    o.out_dir = (dir_ / out).string();
    return o;
  }

  static std::string read(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
  }

  fs::path dir_;
  std::ostringstream out_, err_;
};

const char* kQuadratic = R"({
  "problem": {"kind": "quadratic", "diag": [2, 4], "init": [5, 5]},
  "optimizer": {"kind": "novograd"},
  "schedule": {"family": "cosine", "base_lr": 0.1},
  "total_steps": 50
})";

const char* kLogregCompare = R"({
  "problem": {"kind": "logreg", "dataset": {"seed": 1, "size": 64, "dim": 3, "separation": 2}},
  "schedule": {"family": "cosine", "base_lr": 0.05},
  "total_steps": 20,
  "batch_size": 16,
  "optimizers": [{"kind": "sgd"}, {"kind": "adam", "base_lr": 0.1}, {"kind": "novograd"}],
  "compare": {"threshold": 0.6}
})";

}  // namespace

TEST_F(CliTest, RunWritesCsv) {
  EXPECT_EQ(cmd_run(options(kQuadratic), out_, err_), kExitOk) << err_.str();
  const auto csv = read(dir_ / "out" / "trajectory.csv");
  EXPECT_EQ(csv.rfind("# config: {", 0), 0u);
  EXPECT_NE(csv.find("\nstep,lr,loss,grad_norm:w,second_moment:w\n"), std::string::npos);
}

TEST_F(CliTest, RunIsByteReproducible) {
  ASSERT_EQ(cmd_run(options(kQuadratic, "a"), out_, err_), kExitOk);
  ASSERT_EQ(cmd_run(options(kQuadratic, "b"), out_, err_), kExitOk);
  EXPECT_EQ(read(dir_ / "a" / "trajectory.csv"), read(dir_ / "b" / "trajectory.csv"));
}

TEST_F(CliTest, UnknownKeyFailsClosed) {
  const std::string bad = R"({"problem":{"kind":"rosenbrock"},"optimizer":{"kind":"novograd","beta3":0.5}})";
  EXPECT_EQ(cmd_run(options(bad), out_, err_), kExitUsage);
  EXPECT_NE(err_.str().find("beta3"), std::string::npos);
  EXPECT_FALSE(fs::exists(dir_ / "out" / "trajectory.csv"));
}

TEST_F(CliTest, MalformedJsonReportsLine) {
  EXPECT_EQ(cmd_run(options("{\n  \"problem\": {\"kind\": \"rosenbrock\"},\n  oops\n}"), out_, err_), kExitUsage);
  EXPECT_NE(err_.str().find("line 3"), std::string::npos) << err_.str();
}

TEST_F(CliTest, MissingConfigFile) {
  CliOptions o;
  o.config_path = (dir_ / "nope.json").string();
  EXPECT_EQ(cmd_run(o, out_, err_), kExitUsage);
}

TEST_F(CliTest, DivergenceExitCode) {
  auto o = options(kQuadratic);
  o.sets = {"optimizer={\"kind\":\"sgd\"}", "schedule.base_lr=1e10", "schedule.family=constant"};
  EXPECT_EQ(cmd_run(o, out_, err_), kExitDiverged);
  EXPECT_NE(err_.str().find("diverged"), std::string::npos);
  EXPECT_NE(read(dir_ / "out" / "trajectory.csv").find("# termination: diverged"), std::string::npos);
}

TEST_F(CliTest, OverridesTakePrecedenceAndAreEchoed) {
  auto o = options(kQuadratic);
  o.sets = {"total_steps=7", "optimizer.beta1=0.9", "schedule.family=polynomial"};
  o.seed = 99;
  o.format = "jsonl";
  ASSERT_EQ(cmd_run(o, out_, err_), kExitOk) << err_.str();
  std::istringstream in(read(dir_ / "out" / "trajectory.jsonl"));
  std::string first;
  std::getline(in, first);
  const auto header = json::parse(first);
  EXPECT_EQ(header["config"]["total_steps"], 7);
  EXPECT_EQ(header["config"]["seed"], 99);
  EXPECT_EQ(header["config"]["optimizer"]["beta1"], 0.9);
  EXPECT_EQ(header["config"]["optimizer"]["beta2"], 0.25);  // default made explicit
  EXPECT_EQ(header["config"]["schedule"]["family"], "polynomial");
}

TEST_F(CliTest, OverrideParsing) {
  json doc = {{"a", {{"b", 1}}}, {"list", json::array({json::object(), json::object()})}};
  apply_override(doc, "a.b=2.5");
  apply_override(doc, "a.c=hello");
  apply_override(doc, "list.1.kind=adam");
  apply_override(doc, "new.deep=true");
  EXPECT_EQ(doc["a"]["b"], 2.5);
  EXPECT_EQ(doc["a"]["c"], "hello");
  EXPECT_EQ(doc["list"][1]["kind"], "adam");
  EXPECT_EQ(doc["new"]["deep"], true);
  EXPECT_THROW(apply_override(doc, "novalue"), Error);
  EXPECT_THROW(apply_override(doc, "list.x=1"), Error);
  EXPECT_THROW(apply_override(doc, "list.9=1"), Error);
  EXPECT_THROW(apply_override(doc, "a.b.c=1"), Error);
}

TEST_F(CliTest, BadOutputFormat) {
  auto o = options(kQuadratic);
  o.format = "xml";
  EXPECT_EQ(cmd_run(o, out_, err_), kExitUsage);
}

TEST_F(CliTest, CompareThreeOptimizers) {
  ASSERT_EQ(cmd_compare(options(kLogregCompare), out_, err_), kExitOk) << err_.str();
  const auto table = read(dir_ / "out" / "comparison.csv");
  std::istringstream in(table);
  std::string line;
  int rows = 0;
  while (std::getline(in, line))
    if (!line.empty() && line[0] != '#' && line.rfind("label,", 0) != 0) ++rows;
  EXPECT_EQ(rows, 3);
  EXPECT_TRUE(fs::exists(dir_ / "out" / "sgd.csv"));
  EXPECT_TRUE(fs::exists(dir_ / "out" / "adam.csv"));
  EXPECT_TRUE(fs::exists(dir_ / "out" / "novograd.csv"));
  EXPECT_NE(read(dir_ / "out" / "adam.csv").find("\"base_lr\":0.1"), std::string::npos);
}

TEST_F(CliTest, CompareDuplicateTags) {
  auto o = options(kLogregCompare);
  o.sets = {R"(optimizers=[{"kind":"adam"},{"kind":"adam","beta1":0.8}])"};
  ASSERT_EQ(cmd_compare(o, out_, err_), kExitOk) << err_.str();
  const auto table = read(dir_ / "out" / "comparison.csv");
  EXPECT_NE(table.find("\nadam,adam,"), std::string::npos);
  EXPECT_NE(table.find("\nadam-2,adam,"), std::string::npos);
  EXPECT_TRUE(fs::exists(dir_ / "out" / "adam-2.csv"));
}

TEST_F(CliTest, CompareEmptyListFails) {
  auto o = options(kLogregCompare);
  o.sets = {"optimizers=[]"};
  EXPECT_EQ(cmd_compare(o, out_, err_), kExitUsage);
}

TEST_F(CliTest, CompareRejectsSingleOptimizerKey) {
  EXPECT_EQ(cmd_compare(options(kQuadratic), out_, err_), kExitUsage);
}

TEST_F(CliTest, SweepSevenPoints) {
  auto o = options(kQuadratic);
  o.sets = {R"(sweep={"lr_min":1e-4,"lr_max":1,"points":7})"};
  ASSERT_EQ(cmd_sweep(o, out_, err_), kExitOk) << err_.str();
  std::istringstream in(read(dir_ / "out" / "sweep.csv"));
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line.rfind("# config: ", 0), 0u);
  std::getline(in, line);
  EXPECT_EQ(line, "lr,final_loss,diverged,stable");
  int rows = 0;
  while (std::getline(in, line)) ++rows;
  EXPECT_EQ(rows, 7);
}

TEST_F(CliTest, SweepAllDivergentStillSucceeds) {
  auto o = options(kQuadratic);
  o.sets = {R"(optimizer={"kind":"sgd"})", R"(sweep={"lr_grid":[10,100,1000]})"};
  ASSERT_EQ(cmd_sweep(o, out_, err_), kExitOk) << err_.str();
  std::istringstream in(read(dir_ / "out" / "sweep.csv"));
  std::string line;
  std::getline(in, line);
  std::getline(in, line);
  int diverged = 0;
  while (std::getline(in, line)) diverged += line.find(",1,0") != std::string::npos;
  EXPECT_EQ(diverged, 3);
}

TEST_F(CliTest, SweepEmptyGridFails) {
  auto o = options(kQuadratic);
  o.sets = {R"(sweep={"lr_grid":[]})"};
  EXPECT_EQ(cmd_sweep(o, out_, err_), kExitUsage);
  EXPECT_EQ(cmd_sweep(options(kQuadratic), out_, err_), kExitUsage);
}

TEST_F(CliTest, GradCheck) {
  EXPECT_EQ(cmd_gradcheck("quadratic", 0, 100, out_, err_), kExitOk);
  EXPECT_EQ(cmd_gradcheck("mlp", 0, 100, out_, err_), kExitOk);
  EXPECT_NE(out_.str().find("W1: max relative error"), std::string::npos);
  EXPECT_EQ(cmd_gradcheck("nosuch", 0, 100, out_, err_), kExitUsage);
  EXPECT_NE(err_.str().find("nosuch"), std::string::npos);
}

TEST_F(CliTest, DatasetExport) {
  auto o = options(kLogregCompare);
  o.sets = {"output.write_dataset=true"};
  ASSERT_EQ(cmd_compare(o, out_, err_), kExitOk);
  const auto csv = read(dir_ / "out" / "dataset.csv");
  EXPECT_EQ(csv.rfind("x0,x1,x2,label\n", 0), 0u);
}
