#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "carbonplace/app_model.hpp"
#include "json.hpp"

namespace {

namespace fs = std::filesystem;
const std::string kFixtures = std::string(CP_SOURCE_DIR) + "/fixtures";
const std::string kDeathStar = kFixtures + "/deathstar/scenario.json";
const std::string kEu = kFixtures + "/scenarios/eu4day.json";

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    dir_ = fs::temp_directory_path() / (std::string("cp_cli_") + info->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  // Runs the CLI with --out <dir>/<out>; returns the process exit code.
  int run(const std::string& out, const std::string& args) {
    std::string cmd = std::string(CP_CLI_PATH) + " --out " + (dir_ / out).string() + " " + args + " > " +
                      (dir_ / (out + ".stdout")).string() + " 2> " + (dir_ / (out + ".stderr")).string();
    int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  }

  std::string read(const std::string& rel) const {
    std::ifstream in(dir_ / rel, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }

  std::vector<std::vector<std::string>> csv(const std::string& rel) const {
    std::vector<std::vector<std::string>> rows;
    std::istringstream in(read(rel));
    std::string line;
    while (std::getline(in, line)) {
      std::vector<std::string> cells;
      std::stringstream ls(line);
      std::string cell;
      while (std::getline(ls, cell, ',')) cells.push_back(cell);
      if (!line.empty() && line.back() == ',') cells.emplace_back();
      rows.push_back(cells);
    }
    return rows;
  }

  std::size_t column(const std::vector<std::vector<std::string>>& t, const std::string& name) const {
    auto it = std::find(t[0].begin(), t[0].end(), name);
    EXPECT_NE(it, t[0].end()) << name;
    return static_cast<std::size_t>(it - t[0].begin());
  }

  fs::path dir_;
};

TEST_F(Cli, RunWritesArtifacts) {
  ASSERT_EQ(run("a", "--seed 7 run --scenario " + kEu + " --strategy aceso"), 0) << read("a.stderr");
  for (const char* f : {"metrics.csv", "events.jsonl", "summary.json"}) EXPECT_TRUE(fs::exists(dir_ / "a" / f)) << f;
  auto summary = nlohmann::json::parse(read("a/summary.json"));
  EXPECT_EQ(summary["seed"], 7);
  EXPECT_EQ(summary["strategy"], "aceso");
  EXPECT_LT(summary["carbon_norm"].get<double>(), 1.0);
  EXPECT_EQ(csv("a/metrics.csv").size(), 1u + 4 * 288);
}

TEST_F(Cli, RunIsReproducible) {
  ASSERT_EQ(run("a", "--seed 3 run --scenario " + kDeathStar), 0) << read("a.stderr");
  ASSERT_EQ(run("b", "--seed 3 run --scenario " + kDeathStar), 0);
  EXPECT_EQ(read("a/summary.json"), read("b/summary.json"));
  EXPECT_EQ(read("a/metrics.csv"), read("b/metrics.csv"));
  ASSERT_EQ(run("c", "--seed 4 run --scenario " + kDeathStar + " --set jitter_sigma=0.3"), 0) << read("c.stderr");
  EXPECT_NE(read("a/metrics.csv"), read("c/metrics.csv"));
}

TEST_F(Cli, ExitCodes) {
  EXPECT_EQ(run("u1", "run --scenario " + kDeathStar + " --strategy nautilus"), 2);
  EXPECT_NE(read("u1.stderr").find("nautilus"), std::string::npos);
  EXPECT_EQ(run("u2", ""), 2);
  EXPECT_EQ(run("u3", "run --scenario " + kFixtures + "/missing.json"), 2);
  EXPECT_EQ(run("u4", "teleport"), 2);
  EXPECT_EQ(run("h", "--help"), 0);

  EXPECT_EQ(run("v1", "run --scenario " + kDeathStar + " --set slo_ms=-5"), 3);
  EXPECT_EQ(run("v2", "run --scenario " + kDeathStar + " --set w_carbon=-1"), 3);
  std::ofstream(dir_ / "broken.json") << "{\"slo_ms\": ";
  EXPECT_EQ(run("v3", "--config " + (dir_ / "broken.json").string() + " run --scenario " + kDeathStar), 3);
  std::ofstream(dir_ / "scenario.json") << "{\"id\": \"x\"}";
  EXPECT_EQ(run("v4", "run --scenario " + (dir_ / "scenario.json").string()), 3);

  EXPECT_EQ(run("i1", "run --scenario " + kDeathStar + " --set slo_ms=20"), 4);
  EXPECT_NE(read("i1.stderr").find("infeasible"), std::string::npos);
  EXPECT_EQ(run("i2", "compare --scenario " + kDeathStar + " --set slo_ms=20"), 4);
}

TEST_F(Cli, CompareStaticOnlyNormalizesToOne) {
  ASSERT_EQ(run("s", "compare --scenario " + kDeathStar + " --strategies static --seeds 1,2"), 0) << read("s.stderr");
  auto t = csv("s/compare.csv");
  ASSERT_EQ(t.size(), 3u);
  for (const char* col : {"carbon_norm", "cost_norm", "latency_norm"})
    for (std::size_t r = 1; r < t.size(); ++r) EXPECT_EQ(std::stod(t[r][column(t, col)]), 1.0) << col;
  EXPECT_TRUE(fs::exists(dir_ / "s" / "regions.csv"));
}

TEST_F(Cli, CompareRowsAndOrdering) {
  ASSERT_EQ(run("c", "--seed 5 compare --scenario " + kEu + " --strategies aceso,static --n-seeds 2"), 0)
      << read("c.stderr");
  auto t = csv("c/compare.csv");
  ASSERT_EQ(t.size(), 1u + 2 * 2);
  for (std::size_t r = 1; r < t.size(); ++r) {
    double carbon = std::stod(t[r][column(t, "carbon_norm")]);
    if (t[r][column(t, "strategy")] == "aceso")
      EXPECT_LT(carbon, 1.0);
    else
      EXPECT_EQ(carbon, 1.0);
  }
  EXPECT_EQ(csv("c/regions.csv").size(), 1u + 2 * 2);
}

TEST_F(Cli, CompareDefaultStrategiesAndStableTables) {
  ASSERT_EQ(run("a", "compare --scenario " + kDeathStar), 0) << read("a.stderr");
  ASSERT_EQ(run("b", "compare --scenario " + kDeathStar), 0);
  auto a = csv("a/compare.csv"), b = csv("b/compare.csv");
  ASSERT_EQ(a.size(), 5u);
  EXPECT_EQ(read("a/regions.csv"), read("b/regions.csv"));
  // Everything except the wall-clock solve time columns is reproducible.
  std::size_t st = column(a, "solve_time_s"), stn = column(a, "solve_time_norm");
  for (std::size_t r = 0; r < a.size(); ++r)
    for (std::size_t c = 0; c < a[r].size(); ++c)
      if (c != st && c != stn) EXPECT_EQ(a[r][c], b[r][c]) << "row " << r << " col " << a[0][c];
}

TEST_F(Cli, AblateEmitsFourVariants) {
  ASSERT_EQ(run("a", "ablate --scenario " + kFixtures + "/scenarios/eu100_ablation.json"), 0) << read("a.stderr");
  auto t = csv("a/ablation.csv");
  ASSERT_EQ(t.size(), 5u);
  std::size_t name = column(t, "variant"), space = column(t, "search_space_log10");
  std::vector<std::string> names;
  double neither = 0, widest = 0;
  for (std::size_t r = 1; r < t.size(); ++r) {
    names.push_back(t[r][name]);
    widest = std::max(widest, std::stod(t[r][space]));
    if (t[r][name] == "neither") neither = std::stod(t[r][space]);
  }
  EXPECT_EQ(names, (std::vector<std::string>{"both", "no-filtering", "no-pinning", "neither"}));
  EXPECT_EQ(neither, widest);
}

TEST_F(Cli, ScaleSingleRow) {
  ASSERT_EQ(run("s", "scale --counts 100 --regions eu --slo relaxed --infra-dir " + kFixtures + "/infra"), 0)
      << read("s.stderr");
  auto t = csv("s/scale.csv");
  ASSERT_EQ(t.size(), 2u);
  EXPECT_EQ(t[1][column(t, "services")], "100");
}

TEST_F(Cli, ForecastEval) {
  std::ofstream out(dir_ / "flat.csv");
  out << "timestamp,requests_per_sec\n";
  for (int i = 0; i < 600; ++i) {
    long t = 1690848000L + 300L * i;
    char buf[32];
    std::time_t tt = t;
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&tt));
    out << buf << ",42\n";
  }
  out.close();
  ASSERT_EQ(run("f", "forecast-eval --trace " + (dir_ / "flat.csv").string()), 0) << read("f.stderr");
  auto t = csv("f/forecast.csv");
  ASSERT_EQ(t.size(), 4u);
  bool gbdt = false;
  for (std::size_t r = 1; r < t.size(); ++r) {
    EXPECT_NEAR(std::stod(t[r][column(t, "mae")]), 0.0, 1e-9) << t[r][0];
    gbdt = gbdt || t[r][column(t, "model")] == "gbdt";
  }
  EXPECT_TRUE(gbdt);
  EXPECT_EQ(run("g", "forecast-eval --trace " + (dir_ / "flat.csv").string() + " --split 1.5"), 2);
}

TEST_F(Cli, GenDag) {
  ASSERT_EQ(run("g", "--seed 9 gen --dag 30"), 0) << read("g.stderr");
  auto dag = carbonplace::parse_app(nlohmann::json::parse(read("g/app.json")));
  EXPECT_GE(dag.size(), 31u);
}

}  // namespace
