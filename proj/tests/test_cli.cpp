#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "secperc_cli.hpp"

namespace secperc::cli {
namespace {

namespace fs = std::filesystem;

struct CallResult {
  int code = 0;
  std::string out, err;
  nlohmann::json summary() const { return nlohmann::json::parse(out); }
};

CallResult call(std::vector<std::string> args) {
  args.insert(args.begin(), "secperc");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  CallResult r;
  r.code = run(static_cast<int>(argv.size()), argv.data(), out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("secperc_cli_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) +
                                        "_" + ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::create_directories(dir_);
    unsetenv("SECPERC_SEED");
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  static std::string slurp(const std::string& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }

  fs::path dir_;
};

TEST_F(CliTest, AnalyticBoundMatchesTableOne) {
  const auto r = call({"bound", "analytic", "--variant", "B", "--lambda", "0.0005"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = r.summary();
  EXPECT_LE(j.at("p").get<double>(), 0.0680 + 0.002);
  EXPECT_EQ(j.at("variant"), "B");
}

TEST_F(CliTest, LatticeBound) {
  const auto r = call({"bound", "lattice", "--out", path("lattice.json")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NEAR(r.summary().at("lambda_u_upper").get<double>(), 40.9, 0.05);
  const auto j = nlohmann::json::parse(slurp(path("lattice.json")));
  EXPECT_EQ(j.at("config").at("command"), "bound");
}

TEST_F(CliTest, DryDegreesGiveCompleteDigraph) {
  const auto r = call({"degrees", "--lambda", "1", "--side", "out", "--dry", "--window", "8x8", "--seed", "3"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = r.summary();
  EXPECT_EQ(j.at("mode_k").get<std::size_t>(), j.at("vertices").get<std::size_t>() - 1);
  EXPECT_DOUBLE_EQ(j.at("variance").get<double>(), 0.0);
}

TEST_F(CliTest, DegreesReportGoodnessOfFit) {
  const auto r = call({"degrees", "--lambda", "1", "--window", "40x40", "--margin", "5", "--seed", "1"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_GT(r.summary().at("gof").at("p_value").get<double>(), 1e-3);
}

TEST_F(CliTest, ExitCodes) {
  EXPECT_EQ(call({"graph", "--bogus"}).code, 2);
  EXPECT_EQ(call({}).code, 2);
  EXPECT_EQ(call({"bound", "analytic", "--variant", "X"}).code, 2);
  EXPECT_EQ(call({"bound", "analytic", "--lambda", "0"}).code, 2);
  EXPECT_EQ(call({"graph", "--window", "4xq"}).code, 2);
  EXPECT_EQ(call({"graph", "--dim", "3", "--window", "4x4"}).code, 2);
  EXPECT_EQ(call({"components", "--window", "10x10", "--margin", "6", "--seed", "1"}).code, 2);
  EXPECT_EQ(call({"bound", "analytic", "--lambda", "0.1", "--r", "1"}).code, 2);
  EXPECT_EQ(call({"bound", "analytic", "--lambda", "0.1", "--r", "1.6", "--s", "3", "--tol", "1e-30"}).code, 3);
}

TEST_F(CliTest, HelpDocumentsFlags) {
  const auto top = call({"--help"});
  EXPECT_EQ(top.code, 0);
  EXPECT_NE(top.out.find("reproduce"), std::string::npos);
  const auto mc = call({"mc", "--help"});
  EXPECT_EQ(mc.code, 0);
  for (const char* flag : {"--variant", "--bound", "--lambda", "--r", "--s", "--trials", "--seed", "--threads",
                           "--keep-trials", "--out", "--format", "--config"})
    EXPECT_NE(mc.out.find(flag), std::string::npos) << flag;
}

TEST_F(CliTest, ConfigFileWithFlagOverride) {
  {
    std::ofstream cfg(path("cfg.json"));
    cfg << R"({"lambda": 0.5, "window": "12x12", "seed": 9, "format": "csv"})";
  }
  const auto r = call({"graph", "--config", path("cfg.json"), "--lambda", "0.7", "--out", path("g.csv")});
  ASSERT_EQ(r.code, 0) << r.err;
  const std::string text = slurp(path("g.csv"));
  const auto header = nlohmann::json::parse(text.substr(9, text.find('\n') - 9));
  EXPECT_DOUBLE_EQ(header.at("lambda").get<double>(), 0.7);
  EXPECT_EQ(header.at("window"), "12x12");
  EXPECT_EQ(header.at("seed"), 9);
  EXPECT_EQ(text.substr(text.find('\n') + 1, 13), "src,dst,dist\n");

  std::ofstream bad(path("bad.json"));
  bad << R"({"lambda": 0.5, "colour": "red"})";
  bad.close();
  EXPECT_EQ(call({"graph", "--config", path("bad.json")}).code, 2);
  EXPECT_EQ(call({"graph", "--config", path("missing.json")}).code, 2);
}

TEST_F(CliTest, SeedFromEnvironmentOrGenerated) {
  setenv("SECPERC_SEED", "42", 1);
  const auto r = call({"sample", "--window", "5x5"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.summary().at("seed"), 42);
  unsetenv("SECPERC_SEED");
  const auto g = call({"sample", "--window", "5x5", "--out", path("s.json")});
  ASSERT_EQ(g.code, 0);
  const auto j = nlohmann::json::parse(slurp(path("s.json")));
  EXPECT_TRUE(j.at("config").at("seed_generated").get<bool>());
  EXPECT_EQ(j.at("config").at("seed"), g.summary().at("seed"));
}

// Identical configurations give byte-identical artifacts.
TEST_F(CliTest, OutputsAreReproducible) {
  const std::vector<std::vector<std::string>> commands = {
      {"sample", "--lambda", "0.3", "--window", "10x10", "--seed", "5"},
      {"sample", "--lambda", "0.3", "--dim", "3", "--window", "5x5x5", "--seed", "5"},
      {"graph", "--lambda", "0.3", "--window", "10x10", "--seed", "5"},
      {"components", "--lambda", "0.3", "--window", "10x10", "--seed", "5", "--mode", "O"},
      {"degrees", "--lambda", "0.3", "--window", "10x10", "--seed", "5", "--side", "in"},
      {"branching", "--lambda", "0.7", "--trials", "50", "--seed", "5"},
      {"bound", "analytic", "--lambda", "0.002", "--variant", "U", "--r", "1.659", "--s", "3.15"},
      {"mc", "--lambda", "0.5", "--r", "3", "--trials", "4", "--seed", "5", "--keep-trials"},
  };
  for (const char* fmt : {"csv", "json"}) {
    for (std::size_t i = 0; i < commands.size(); ++i) {
      std::string a = path("a" + std::to_string(i)), b = path("b" + std::to_string(i));
      auto args = commands[i];
      args.insert(args.end(), {"--format", fmt, "--out", a});
      ASSERT_EQ(call(args).code, 0) << commands[i][0];
      args.back() = b;
      if (commands[i][0] == "mc") args.insert(args.end(), {"--threads", "2"});
      ASSERT_EQ(call(args).code, 0) << commands[i][0];
      EXPECT_EQ(slurp(a), slurp(b)) << commands[i][0] << ' ' << fmt;
      EXPECT_FALSE(slurp(a).empty());
    }
  }
}

TEST_F(CliTest, BranchingMatchesExtinctionProbability) {
  const auto r = call({"branching", "--lambda", "2", "--trials", "2000", "--seed", "1"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_DOUBLE_EQ(r.summary().at("extinct_frac").get<double>(), 1.0);
  EXPECT_DOUBLE_EQ(r.summary().at("extinction_probability").get<double>(), 1.0);
}

TEST_F(CliTest, ReproduceTableOne) {
  const auto r = call({"reproduce", "--table", "1", "--format", "csv", "--out", path("t1.csv")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.summary().at("passed"), 3);
  const std::string text = slurp(path("t1.csv"));
  EXPECT_NE(text.find("variant,lambda,published_r,published_s,published_p,r,s,p,tolerance,pass"), std::string::npos);
  EXPECT_EQ(text.find("fail"), std::string::npos);
}

TEST_F(CliTest, TrialBatchCsv) {
  const auto r = call({"mc", "--variant", "U", "--bound", "upper", "--lambda", "0.6", "--r", "6", "--trials", "3",
                       "--seed", "2", "--format", "csv", "--out", path("mc.csv")});
  ASSERT_EQ(r.code, 0) << r.err;
  const std::string text = slurp(path("mc.csv"));
  EXPECT_NE(text.find("variant,bound,lambda,r,s,successes,trials,log10_confidence\nU,upper,0.6,6,0,"), std::string::npos);
}

}  // namespace
}  // namespace secperc::cli
