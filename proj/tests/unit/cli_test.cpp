#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "alr/curve_io.hpp"
#include "alr/dataset.hpp"

namespace {

namespace fs = std::filesystem;

struct Result {
  int code = -1;
  std::string output;
};

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("alr_cli_test_" + std::to_string(std::random_device{}()));
    fs::create_directories(dir_);
    data_ = path("data.csv");
    ASSERT_EQ(run("synth --n 150 --d 4 --p 3 --noise 0.1 --seed 3 --out " + data_).code, 0);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  Result run(const std::string& args) const {
    const std::string log = path("log.txt");
    const std::string cmd = std::string(ALR_CLI_PATH) + " " + args + " > " + log + " 2>&1";
    const int status = std::system(cmd.c_str());
    Result r;
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.output = read(log);
    return r;
  }

  static std::string read(const std::string& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
  }

  fs::path dir_;
  std::string data_;
};

TEST_F(CliTest, RunWritesCurves) {
  const auto out = path("curves.csv");
  const auto r = run("run --data " + data_ + " --tasks 3 --strategy random --strategy mt_igs " +
                     "--runs 3 --k-max 12 --threads 1 --out " + out + " --json " + path("c.json"));
  ASSERT_EQ(r.code, 0) << r.output;
  const auto curves = alr::read_curves_csv(out);
  ASSERT_EQ(curves.size(), 2u);
  EXPECT_EQ(curves[0].strategy, "random");
  EXPECT_EQ(curves[1].strategy, "mt_igs");
  EXPECT_EQ(curves[0].ks.front(), 4u);
  EXPECT_EQ(curves[0].ks.back(), 12u);
  EXPECT_TRUE(fs::exists(path("c.json")));
}

TEST_F(CliTest, SingleTaskStrategyNeedsFocus) {
  const auto r = run("run --data " + data_ + " --tasks 3 --strategy gsy --runs 1 --out " +
                     path("x.csv"));
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.output.find("--focus-task"), std::string::npos) << r.output;
}

TEST_F(CliTest, BadArgumentsExitWithUsageError) {
  EXPECT_EQ(run("run --data " + data_ + " --strategy nope --out " + path("x.csv")).code, 2);
  EXPECT_EQ(run("run --data " + data_ + " --tasks 3 --strategy random --solver svm --out " +
                path("x.csv")).code,
            2);
  EXPECT_EQ(run("frobnicate").code, 2);
  EXPECT_EQ(run("run --data " + path("missing.csv") + " --tasks 3 --strategy random --out " +
                path("x.csv")).code,
            1);
}

TEST_F(CliTest, RepeatedRunsAreByteIdenticalAcrossThreadCounts) {
  const std::string base = "run --data " + data_ +
                           " --tasks 3 --strategy mt_gsy --strategy qbc --focus-task 1 --runs 6 "
                           "--k-max 10 --seed 4 ";
  ASSERT_EQ(run(base + "--threads 1 --out " + path("a.csv")).code, 0);
  ASSERT_EQ(run(base + "--threads 3 --out " + path("b.csv")).code, 0);
  EXPECT_EQ(read(path("a.csv")), read(path("b.csv")));
}

TEST_F(CliTest, CompareAndSavedQueries) {
  const auto curves = path("curves.csv");
  ASSERT_EQ(run("run --data " + data_ + " --tasks 3 --strategy random --strategy mt_igs --runs 4 " +
                "--out " + curves)
                .code,
            0);
  const auto r = run("compare --curves " + curves + " --k 10,20 --out " + path("cmp.csv"));
  ASSERT_EQ(r.code, 0) << r.output;
  const auto cmp = read(path("cmp.csv"));
  EXPECT_EQ(cmp.substr(0, cmp.find('\n')),
            "task,measure,K,baseline,baseline_value,strategy,value,improvement_pct");
  EXPECT_NE(cmp.find("mt_igs"), std::string::npos);
  EXPECT_EQ(run("compare --curves " + curves + " --k 9999 --out " + path("cmp2.csv")).code, 1);

  const auto s = run("saved-queries --curves " + curves + " --alpha 5 --out " + path("sq.csv"));
  ASSERT_EQ(s.code, 0) << s.output;
  const auto sq = read(path("sq.csv"));
  EXPECT_EQ(sq.substr(0, sq.find('\n')),
            "task,measure,alpha,reference,reference_k,strategy,strategy_k,saving_pct");
}

TEST_F(CliTest, UniqueQueries) {
  const auto r = run("unique-queries --data " + data_ + " --tasks 3 --k 10 --out " + path("u.csv"));
  ASSERT_EQ(r.code, 0) << r.output;
  const auto u = read(path("u.csv"));
  EXPECT_EQ(u.substr(0, u.find('\n')), "K,mt,st_union_mean,st_union_std,n_runs");
  EXPECT_NE(u.find("\n10,10,"), std::string::npos) << u;
}

TEST_F(CliTest, NormalizeWritesParams) {
  const auto r = run("normalize --data " + data_ + " --tasks 3 --out " + path("n.csv") +
                     " --params " + path("p.json"));
  ASSERT_EQ(r.code, 0) << r.output;
  const auto normalized = alr::load_csv(path("n.csv"), 3);
  EXPECT_LT(normalized.features().colwise().mean().cwiseAbs().maxCoeff(), 1e-12);
  const auto params = alr::NormalizationParams::from_json(read(path("p.json")));
  EXPECT_EQ(params.names.size(), 4u);
}

}  // namespace
