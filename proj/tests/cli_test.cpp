#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace {

namespace fs = std::filesystem;

struct RunResult {
  int code;
  std::string out;
};

class Cli : public ::testing::Test {
 protected:
  fs::path dir;

  void SetUp() override {
    dir = fs::temp_directory_path() / ("apm_cli_test_" + std::to_string(::getpid()));
    fs::create_directories(dir);
    write("chain.txt", "0 1 1.0\n1 2 0.9\n2 3 0.1\n");
    write("friends.txt", "1\n");
    write("select.txt", "2\n3\n");
  }
  void TearDown() override { fs::remove_all(dir); }

  std::string path(const std::string& name) const { return (dir / name).string(); }

  void write(const std::string& name, const std::string& text) const { std::ofstream(path(name)) << text; }

  RunResult run(const std::string& args) const {
    const std::string out = path("stdout.txt");
    const std::string cmd = std::string(APM_CLI_PATH) + " " + args + " > " + out + " 2> " + path("stderr.txt");
    const int status = std::system(cmd.c_str());
    std::stringstream ss;
    ss << std::ifstream(out).rdbuf();
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, ss.str()};
  }

  std::string chain_args() const {
    return "--graph " + path("chain.txt") + " --source 0 --target 3 --friends " + path("friends.txt");
  }
};

TEST_F(Cli, PlanJson) {
  const RunResult r = run("plan " + chain_args() + " --budget 2 --algorithm sitina --output json");
  ASSERT_EQ(r.code, 0);
  const auto doc = nlohmann::json::parse(r.out);
  EXPECT_EQ(doc["algorithm"], "sitina");
  EXPECT_EQ(doc["budget"], 2);
  EXPECT_NEAR(doc["objective"].get<double>(), 0.09, 1e-12);
  ASSERT_EQ(doc["selected"].size(), 2u);
  for (const auto& e : doc["selected"]) {
    EXPECT_TRUE(e.contains("node"));
    EXPECT_TRUE(e.contains("subtree_budget"));
    EXPECT_TRUE(e.contains("ap"));
  }
  EXPECT_EQ(doc["tree_size"], 3);
  EXPECT_TRUE(doc.contains("runtime_ms"));
}

TEST_F(Cli, PlanTableForEveryAlgorithm) {
  for (const char* algo : {"rg", "sita", "sitina"}) {
    const RunResult r = run("plan " + chain_args() + " --budget 2 --algorithm " + algo);
    EXPECT_EQ(r.code, 0) << algo;
    EXPECT_NE(r.out.find("objective 0.09"), std::string::npos) << r.out;
  }
}

TEST_F(Cli, EvalMiiaSimulate) {
  RunResult r = run("eval " + chain_args() + " --select " + path("select.txt"));
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("0.09"), std::string::npos);
  r = run("miia " + chain_args());
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(r.out.rfind("3 ROOT - 2\n", 0), 0u) << r.out;
  r = run("simulate " + chain_args() + " --select " + path("select.txt") + " --trials 2000 --seed 5");
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("estimate"), std::string::npos);
}

TEST_F(Cli, Counterexample) {
  const RunResult r = run("counterexample");
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("non-submodular: 0 < 0.819"), std::string::npos) << r.out;
}

TEST_F(Cli, GenRoundTrips) {
  const RunResult r = run("gen --nodes 50 --avg-degree 4 --seed 2 --output " + path("g.txt"));
  EXPECT_EQ(r.code, 0);
  std::ifstream in(path("g.txt"));
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) ++n;
  EXPECT_GT(n, 50u);
}

TEST_F(Cli, ExitCodes) {
  EXPECT_EQ(run("--help").code, 0);
  EXPECT_EQ(run("plan --budget 2").code, 1);                      // missing required options
  EXPECT_EQ(run("plan " + chain_args() + " --budget 2 --algorithm nope").code, 1);
  EXPECT_EQ(run("plan " + chain_args() + " --budget 0").code, 2);
  write("bad.txt", "0 0 0.5\n");
  EXPECT_EQ(run("plan --graph " + path("bad.txt") + " --source 0 --target 3 --budget 1").code, 2);
  EXPECT_EQ(run("plan --graph " + path("chain.txt") + " --source 0 --target 42 --budget 1").code, 2);
}

TEST_F(Cli, SitaRefusesWideTree) {
  std::ostringstream g, f;
  for (int v = 1; v <= 30; ++v) {
    g << v << " 100 0.5\n" << v + 200 << ' ' << v << " 0.5\n";
    f << v + 200 << '\n';
  }
  g << "0 201 1\n";
  write("wide.txt", g.str());
  write("wide_friends.txt", f.str());
  const std::string args =
      "--graph " + path("wide.txt") + " --source 0 --target 100 --friends " + path("wide_friends.txt") + " --budget 7";
  EXPECT_EQ(run("plan " + args + " --algorithm sita").code, 2);
  EXPECT_EQ(run("plan " + args + " --algorithm sitina").code, 0);
}

}  // namespace
