#include <gtest/gtest.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

namespace fs = std::filesystem;

namespace {

struct RunResult {
  int status = -1;
  std::string out;
};

RunResult run_cli(const std::string& args, const std::string& env = {}) {
  const std::string cmd = env + (env.empty() ? "" : " ") + "'" WULFFKIT_CLI "' " + args + " 2>&1";
  RunResult r;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (pipe == nullptr) return r;
  char buf[4096];
  while (std::size_t n = std::fread(buf, 1, sizeof buf, pipe)) r.out.append(buf, n);
  const int raw = pclose(pipe);
  r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  return r;
}

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("wulffkit-cli-" + std::to_string(::getpid())) / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::map<std::string, std::string> read_dir(const fs::path& dir) {
  std::map<std::string, std::string> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    std::ifstream in(entry.path(), std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    files[entry.path().filename().string()] = ss.str();
  }
  return files;
}

fs::path write_config(const fs::path& dir, const std::string& body) {
  const fs::path p = dir / "config.json";
  std::ofstream(p) << body;
  return p;
}

const char* kLineConfig = R"({
  "name": "crafted",
  "norms": {"e2": {"family": "euclidean", "dim": 2},
            "q4": {"family": "quartic-regularized", "dim": 2, "eps": 0.1}},
  "surfaces": {"line": {"type": "line", "origin": [0.0, 0.5], "direction": [1.0, 0.0], "half_length": 3.0}},
  "checks": [
    {"kind": "monotonicity", "name": "offset", "norm": "e2", "surface": "line", "s": S_VALUE, "r": 1.0},
    {"kind": "condition-s", "name": "cs", "norm": "q4", "samples": 500, "expect": "EXPECT"}
  ]
})";

std::string line_config(const std::string& s, const std::string& expect) {
  std::string body = kLineConfig;
  body.replace(body.find("S_VALUE"), 7, s);
  body.replace(body.find("EXPECT"), 6, expect);
  return body;
}

class BundledScenario : public ::testing::TestWithParam<std::string> {};

}  // namespace

TEST_P(BundledScenario, ByteIdenticalAcrossRuns) {
  const std::string name = GetParam();
  const std::string config = std::string(WULFFKIT_SCENARIOS) + "/" + name + ".json";
  const auto a = fresh_dir(name + "-a"), b = fresh_dir(name + "-b");
  const auto ra = run_cli("run --config '" + config + "' --out '" + a.string() + "' --jobs 1");
  const auto rb = run_cli("run --config '" + config + "' --out '" + b.string() + "' --jobs 3");
  EXPECT_EQ(ra.status, 0) << ra.out;
  EXPECT_EQ(rb.status, 0) << rb.out;
  const auto fa = read_dir(a), fb = read_dir(b);
  EXPECT_FALSE(fa.empty());
  EXPECT_EQ(fa, fb);
}

INSTANTIATE_TEST_SUITE_P(Cli, BundledScenario,
                         ::testing::Values("hyperplane-equality", "catenoid-euclidean", "transformed-catenoid",
                                           "offset-line", "norms", "lemmas", "closed-surfaces", "enneper-strict"),
                         [](const auto& info) {
                           std::string n = info.param;
                           for (auto& c : n)
                             if (c == '-') c = '_';
                           return n;
                         });

TEST(Cli, HyperplaneNormalizedEnergyConstant) {
  const auto dir = fresh_dir("hyperplane-energy");
  const auto r = run_cli("run --config '" WULFFKIT_SCENARIOS "/hyperplane-equality.json' --out '" + dir.string() + "'");
  ASSERT_EQ(r.status, 0) << r.out;
  const auto files = read_dir(dir);
  const auto it = files.find("hyperplane-equality-plane-euclidean-energy.csv");
  ASSERT_NE(it, files.end());
  std::istringstream in(it->second);
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "r,energy,normalized,estimate");
  int rows = 0;
  while (std::getline(in, line)) {
    std::istringstream fields(line);
    std::string r_s, e_s, n_s;
    std::getline(fields, r_s, ',');
    std::getline(fields, e_s, ',');
    std::getline(fields, n_s, ',');
    EXPECT_NEAR(std::stod(n_s), 3.14159265358979, 1e-4) << line;
    ++rows;
  }
  EXPECT_EQ(rows, 8);
}

TEST(Cli, CatenoidNormalizedEnergyIncreases) {
  const auto dir = fresh_dir("catenoid-energy");
  const auto r = run_cli("run --config '" WULFFKIT_SCENARIOS "/catenoid-euclidean.json' --out '" + dir.string() + "'");
  ASSERT_EQ(r.status, 0) << r.out;
  const auto files = read_dir(dir);
  const auto it = files.find("catenoid-euclidean-area-ratio-energy.csv");
  ASSERT_NE(it, files.end());
  std::istringstream in(it->second);
  std::string line;
  std::getline(in, line);
  double prev = -1.0;
  while (std::getline(in, line)) {
    std::istringstream fields(line);
    std::string skip, n_s;
    std::getline(fields, skip, ',');
    std::getline(fields, skip, ',');
    std::getline(fields, n_s, ',');
    EXPECT_GT(std::stod(n_s), prev);
    prev = std::stod(n_s);
  }
}

TEST(Cli, PlotScriptsReferenceWrittenFiles) {
  const auto dir = fresh_dir("plots");
  const auto r = run_cli("run --config '" WULFFKIT_SCENARIOS "/offset-line.json' --out '" + dir.string() + "'");
  ASSERT_EQ(r.status, 0) << r.out;
  int scripts = 0;
  for (const auto& [name, content] : read_dir(dir)) {
    if (name.size() < 3 || name.substr(name.size() - 3) != ".gp") continue;
    ++scripts;
    const auto start = content.find("plot '");
    ASSERT_NE(start, std::string::npos);
    const auto end = content.find('\'', start + 6);
    EXPECT_TRUE(fs::exists(dir / content.substr(start + 6, end - start - 6))) << content;
  }
  EXPECT_GT(scripts, 0);
}

TEST(Cli, MalformedRadiiExitTwo) {
  const auto dir = fresh_dir("malformed");
  const auto cfg = write_config(dir, line_config("1.5", "violation"));
  const auto r = run_cli("run --config '" + cfg.string() + "' --out '" + dir.string() + "'");
  EXPECT_EQ(r.status, 2) << r.out;
  EXPECT_NE(r.out.find("offset"), std::string::npos) << r.out;
}

TEST(Cli, FailingCheckExitOne) {
  const auto dir = fresh_dir("failing");
  const auto cfg = write_config(dir, line_config("0.6", "pass"));
  const auto r = run_cli("run --config '" + cfg.string() + "' --out '" + dir.string() + "'");
  EXPECT_EQ(r.status, 1) << r.out;
  EXPECT_TRUE(fs::exists(dir / "crafted-condition-s.csv"));
}

TEST(Cli, PassingConfigExitZero) {
  const auto dir = fresh_dir("passing");
  const auto cfg = write_config(dir, line_config("0.6", "violation"));
  const auto r = run_cli("run --config '" + cfg.string() + "' --out '" + dir.string() + "'");
  EXPECT_EQ(r.status, 0) << r.out;
  EXPECT_TRUE(fs::exists(dir / "crafted-monotonicity.csv"));
}

TEST(Cli, EnvironmentOverridesOutputDirectory) {
  const auto dir = fresh_dir("env");
  const auto flag_dir = fresh_dir("env-flag");
  const auto cfg = write_config(dir, line_config("0.6", "violation"));
  const auto r = run_cli("run --config '" + cfg.string() + "' --out '" + flag_dir.string() + "'",
                         "WULFFKIT_OUT='" + (dir / "out").string() + "'");
  EXPECT_EQ(r.status, 0) << r.out;
  EXPECT_TRUE(fs::exists(dir / "out" / "crafted-monotonicity.csv"));
  EXPECT_TRUE(read_dir(flag_dir).empty());
}

TEST(Cli, MissingFileAndBadArguments) {
  EXPECT_EQ(run_cli("run --config /nonexistent/wulffkit.json").status, 2);
  EXPECT_EQ(run_cli("run").status, 2);
  EXPECT_EQ(run_cli("frobnicate").status, 2);
}

TEST(Cli, ListBuiltins) {
  const auto r = run_cli("list");
  EXPECT_EQ(r.status, 0);
  for (const char* name : {"quartic-regularized", "transformed-catenoid", "norm-identities", "minkowski"})
    EXPECT_NE(r.out.find(name), std::string::npos) << name;
}
