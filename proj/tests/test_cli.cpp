#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "cnls/cli.hpp"

namespace fs = std::filesystem;
using namespace cnls;

namespace {

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    dir_ = fs::temp_directory_path() / ("cnls_cli_" + std::string(info->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string spec(const std::string& name, const std::string& body) {
    const auto p = dir_ / name;
    std::ofstream(p) << body;
    return p.string();
  }

  // Runs the binary; stdout and stderr land in files under the test directory.
  int exec(const std::string& args, const std::string& tag = "run") {
    const auto cmd = std::string(CNLS_CLI_PATH) + " " + args + " >" + (dir_ / (tag + ".out")).string() + " 2>" +
                     (dir_ / (tag + ".err")).string();
    const int rc = std::system(cmd.c_str());
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
  }

  std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }

  nlohmann::json report(const std::string& sub) { return nlohmann::json::parse(slurp(dir_ / sub / "report.json")); }

  double entry(const nlohmann::json& rep, const std::string& name) {
    for (const auto& e : rep["entries"])
      if (e["name"] == name) return e["value"].get<double>();
    ADD_FAILURE() << "no entry " << name;
    return 0.0;
  }

  fs::path dir_;
};

const char* kScalar = R"({"dimension": 5, "components": 1, "lambda": [-1], "mu": [1], "radius": 1})";
const char* kPair = R"({"dimension": 5, "components": 2, "lambda": [-1, -1], "mu": [1, 1], "beta": [1], "radius": 1})";
const char* kTriple =
    R"({"dimension": 5, "components": 3, "lambda": [-1, -1, -1], "mu": [1, 2, 3], "beta": [0.5, 0.5, 0.5], "radius": 1})";

}  // namespace

TEST(CliNames, EveryCommandIsListed) {
  const auto& n = cli::command_names();
  EXPECT_EQ(n.size(), 9u);
  EXPECT_NE(std::find(n.begin(), n.end(), "full-report"), n.end());
}

TEST_F(Cli, AmplitudesWritesAReport) {
  const auto s = spec("k2.json", kPair);
  ASSERT_EQ(exec("amplitudes --spec " + s + " --out " + (dir_ / "a").string()), 0) << slurp(dir_ / "run.err");
  const auto rep = report("a");
  EXPECT_EQ(rep["command"], "amplitudes");
  EXPECT_NEAR(entry(rep, "d_k"), std::pow(2.0, -0.5) / 5.0, 1e-12);
  EXPECT_NEAR(entry(rep, "d_k_brute_force"), entry(rep, "d_k"), 1e-3);
  // amplitudes is a pure algebra command: no profiles
  EXPECT_FALSE(fs::exists(dir_ / "a" / "profiles.csv"));
  EXPECT_NE(slurp(dir_ / "run.out").find("amplitudes:"), std::string::npos);
}

TEST_F(Cli, QuietPrintsNothing) {
  const auto s = spec("k1.json", kScalar);
  ASSERT_EQ(exec("dk-ladder --quiet --spec " + s + " --out " + (dir_ / "q").string()), 0);
  EXPECT_TRUE(slurp(dir_ / "run.out").empty());
}

TEST_F(Cli, DkLadderOnTheTriple) {
  const auto s = spec("k3.json", kTriple);
  ASSERT_EQ(exec("dk-ladder --spec " + s + " --out " + (dir_ / "d").string()), 0) << slurp(dir_ / "run.err");
  const auto rep = report("d");
  EXPECT_NEAR(entry(rep, "d_1"), 0.2 * std::pow(3.0, -1.5), 1e-12);
  EXPECT_NEAR(entry(rep, "d_3"), 0.03848919183, 1e-10);
  for (const auto& v : rep["verdicts"]) EXPECT_EQ(v["result"], "PASS");
}

TEST_F(Cli, InstantonOutputs) {
  const auto s = spec("k1.json", kScalar);
  ASSERT_EQ(exec("instanton --spec " + s + " --out " + (dir_ / "i").string()), 0) << slurp(dir_ / "run.err");
  const auto rep = report("i");
  EXPECT_NEAR(entry(rep, "S"), 14.8119117200059, 1e-8);
  const auto csv = slurp(dir_ / "i" / "profiles.csv");
  EXPECT_EQ(csv.rfind("r,u_1\n", 0), 0u);
  EXPECT_EQ(slurp(dir_ / "i" / "plot.svg").rfind("<svg", 0), 0u);
}

TEST_F(Cli, PohozaevOnASavedField) {
  const auto s = spec("k1.json", kScalar);
  ASSERT_EQ(exec("bn-solve --spec " + s + " --out " + (dir_ / "b").string()), 0) << slurp(dir_ / "run.err");
  const double b = entry(report("b"), "B_mu_1");
  EXPECT_LT(b, entry(report("b"), "bound_1"));
  const auto field = (dir_ / "b" / "profiles.csv").string();
  ASSERT_EQ(exec("pohozaev --spec " + s + " --field " + field + " --out " + (dir_ / "p").string()), 0);
  EXPECT_LE(entry(report("p"), "relative_residual"), 1e-3);
  // the same field against lambda = +1 is ruled out by the identity
  ASSERT_EQ(exec("pohozaev --spec " + s + " --set lambda=[1] --field " + field + " --out " + (dir_ / "q").string()), 2);
  const auto k2 = spec("k2.json", kPair);
  EXPECT_EQ(exec("pohozaev --spec " + k2 + " --field " + field + " --out " + (dir_ / "r").string()), 2);
  EXPECT_NE(slurp(dir_ / "run.err").find("components"), std::string::npos);
}

TEST_F(Cli, ValidationFailuresExitTwo) {
  const auto bad = spec("bad.json", R"({"dimension": 5, "components": 1, "lambda": [0], "mu": [1], "radius": 1})");
  EXPECT_EQ(exec("bn-solve --spec " + bad + " --out " + (dir_ / "x").string()), 2);
  const auto err = nlohmann::json::parse(slurp(dir_ / "run.err"));
  EXPECT_EQ(err["error"], "validation");
  EXPECT_EQ(err["exit"], 2);
  EXPECT_FALSE(fs::exists(dir_ / "x" / "report.json"));

  const auto nobeta = spec("nobeta.json", R"({"dimension": 5, "components": 2, "lambda": [-1, -1], "mu": [1, 1], "radius": 1})");
  EXPECT_EQ(exec("amplitudes --spec " + nobeta), 2);
  EXPECT_EQ(nlohmann::json::parse(slurp(dir_ / "run.err"))["field"], "beta");

  EXPECT_EQ(exec("frobnicate --spec " + nobeta), 2);
  EXPECT_EQ(exec("amplitudes"), 2);  // missing --spec
  EXPECT_EQ(exec("amplitudes --spec " + (dir_ / "missing.json").string()), 2);
}

TEST_F(Cli, LostBranchExitsThree) {
  const auto s = spec("k3.json", kTriple);
  EXPECT_EQ(exec("beta-branch --spec " + s + " --beta-grid 0,0.1,0.2,0.5 --out " + (dir_ / "bb").string()), 3);
  const auto err = nlohmann::json::parse(slurp(dir_ / "run.err"));
  EXPECT_EQ(err["error"], "nonconvergence");
  EXPECT_NEAR(err["branch_lost_at"].get<double>(), 0.378, 0.005);
  // the points reached are still written
  const auto rep = report("bb");
  EXPECT_NEAR(entry(rep, "sum_sq[beta=0.2]"), 1.19363, 1e-5);
  EXPECT_TRUE(fs::exists(dir_ / "bb" / "plot.svg"));

  const auto k2 = spec("k2.json", kPair);
  EXPECT_EQ(exec("beta-branch --spec " + k2 + " --beta-grid 0,0.5,1,2 --out " + (dir_ / "ok").string()), 0);
  EXPECT_EQ(entry(report("ok"), "collapse"), 1.0);
}

TEST_F(Cli, UnresolvedStrictInequalityExitsFour) {
  // a strictness margin larger than any gap in the problem
  const auto s = spec("k2.json", kPair);
  EXPECT_EQ(exec("bn-solve --spec " + s + " --set tolerances.strict=1000 --out " + (dir_ / "s").string()), 4);
  const auto err = nlohmann::json::parse(slurp(dir_ / "run.err"));
  EXPECT_EQ(err["exit"], 4);
  EXPECT_TRUE(err.contains("margin"));
  EXPECT_TRUE(err.contains("lower"));
}

TEST_F(Cli, EpsSweepHonoursTheGrid) {
  const auto s = spec("k1.json", kScalar);
  const int rc = exec("eps-sweep --spec " + s + " --eps 0.2,0.1 --out " + (dir_ / "e").string());
  EXPECT_EQ(rc, 0);
  const auto rep = report("e");
  EXPECT_GT(entry(rep, "A_eps[eps=0.2]"), entry(rep, "A_eps[eps=0.1]"));
  EXPECT_GT(entry(rep, "A_eps[eps=0.1]"), entry(rep, "A"));
}

TEST_F(Cli, FullReportIsDeterministic) {
  const auto s = spec("k2.json", kPair);
  ASSERT_EQ(exec("full-report --spec " + s + " --seed 5 --out " + (dir_ / "f1").string(), "one"), 0)
      << slurp(dir_ / "one.err");
  ASSERT_EQ(exec("full-report --spec " + s + " --seed 5 --out " + (dir_ / "f2").string(), "two"), 0);
  for (const char* f : {"report.json", "ladder.csv"}) {
    const auto a = slurp(dir_ / "f1" / f);
    EXPECT_FALSE(a.empty()) << f;
    EXPECT_EQ(a, slurp(dir_ / "f2" / f)) << f;
  }
  EXPECT_EQ(slurp(dir_ / "one.out"), slurp(dir_ / "two.out"));
  const auto rep = report("f1");
  EXPECT_EQ(rep["tolerances"]["seed"], 5);
}

TEST_F(Cli, InProcessRunMatchesTheBinary) {
  const auto s = spec("k1.json", kScalar);
  cli::Command cmd;
  cmd.name = "dk-ladder";
  cmd.spec_path = s;
  cmd.output_dir = (dir_ / "in").string();
  std::ostringstream out, err;
  EXPECT_EQ(cli::run(cmd, out, err), 0);
  ASSERT_EQ(exec("dk-ladder --spec " + s + " --out " + (dir_ / "ex").string()), 0);
  EXPECT_EQ(slurp(dir_ / "in" / "report.json"), slurp(dir_ / "ex" / "report.json"));
  EXPECT_EQ(out.str(), slurp(dir_ / "run.out"));
}

TEST(Plot, DeterministicAndRejectsEmptyInput) {
  const Series s{"u", {0.0, 0.5, 1.0}, {1.0, 0.5, 0.0}};
  const PlotOptions opt{"t", "x", "y", {{"ref", 0.25}}, true};
  const auto a = emit_plot({s}, PlotKind::profile, opt);
  EXPECT_EQ(a, emit_plot({s}, PlotKind::profile, opt));
  EXPECT_NE(a.find("</svg>"), std::string::npos);
  EXPECT_THROW(emit_plot({}, PlotKind::profile, opt), DomainError);
  EXPECT_THROW(emit_plot({Series{"e", {}, {}}}, PlotKind::branch, opt), DomainError);
}
