#include <gtest/gtest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "stlisa/results.hpp"
#include "stlisa/synthetic.hpp"

namespace fs = std::filesystem;
using namespace stlisa;

namespace {

struct Outcome {
  int code;
  std::string output;  // stdout and stderr interleaved
};

Outcome run_cli(const std::string& args) {
  const std::string cmd = std::string(STLISA_CLI_PATH) + " " + args + " 2>&1";
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return {-1, "popen failed"};
  std::string out;
  char buf[4096];
  while (const std::size_t n = fread(buf, 1, sizeof buf, pipe)) out.append(buf, n);
  const int status = pclose(pipe);
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("stlisa_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()) + "_" +
            std::to_string(::getpid()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
    synthetic::GridSeries series;
    for (std::uint64_t t = 0; t < 2; ++t) series.push_back(synthetic::noise_with_block(5, 5, t, 1, 1, 2, 3.0));
    std::ofstream(dir_ / "grid.geojson") << synthetic::grid_geojson(5, 5);
    std::ofstream(dir_ / "values.csv") << synthetic::series_csv(5, 5, {"2001", "2002"}, series);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string inputs() const {
    return "--geometry " + (dir_ / "grid.geojson").string() + " --data " + (dir_ / "values.csv").string() +
           " --id-col id --time-col time --value-col value";
  }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  fs::path dir_;
};

}  // namespace

TEST_F(CliTest, RunWritesResults) {
  const auto r = run_cli("run " + inputs() + " --permutations 99 --out " + path("out.json") + " --cache-dir " +
                         path("cache") + " --name-field name");
  ASSERT_EQ(r.code, 0) << r.output;
  ASSERT_TRUE(fs::exists(path("out.json")));
  const auto rs = read_results(path("out.json"));
  EXPECT_EQ(rs.locations.size(), 25u);
  EXPECT_EQ(rs.timesteps, (std::vector<std::string>{"2001", "2002"}));
  EXPECT_EQ(rs.locations[0].name, "cell 0,0");

  const auto again = run_cli("run " + inputs() + " --permutations 99 --out " + path("again.json") + " --cache-dir " +
                             path("cache") + " --name-field name");
  ASSERT_EQ(again.code, 0) << again.output;
  EXPECT_NE(again.output.find("(from cache)"), std::string::npos) << again.output;
  EXPECT_EQ(read_file(path("out.json")), read_file(path("again.json")));
}

TEST_F(CliTest, MethodSubset) {
  const auto r = run_cli("run " + inputs() + " --methods gi,gi-star --permutations 99 --no-cache --out " +
                         path("gi.json"));
  ASSERT_EQ(r.code, 0) << r.output;
  const auto rs = read_results(path("gi.json"));
  EXPECT_EQ(rs.config.methods, (std::vector<StatKind>{StatKind::Gi, StatKind::GiStar}));
}

TEST_F(CliTest, InsufficientPermutations) {
  const auto r = run_cli("run " + inputs() + " --alpha 0.01 --permutations 99 --no-cache --out " + path("x.json"));
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.output.find("insufficient permutations for requested cutoff"), std::string::npos) << r.output;
  EXPECT_FALSE(fs::exists(path("x.json")));
}

TEST_F(CliTest, BadInputsExitOne) {
  EXPECT_EQ(run_cli("run " + inputs() + " --methods moran --no-cache").code, 1);
  EXPECT_EQ(run_cli("run " + inputs() + " --contiguity bishop --no-cache").code, 1);
  const auto missing = run_cli("run --geometry " + path("nope.geojson") + " --data " + path("values.csv") +
                               " --id-col id --time-col time --value-col value --no-cache");
  EXPECT_EQ(missing.code, 1);
  EXPECT_NE(missing.output.find("nope.geojson"), std::string::npos) << missing.output;
  const auto column = run_cli("run --geometry " + path("grid.geojson") + " --data " + path("values.csv") +
                              " --id-col id --time-col time --value-col rate --no-cache");
  EXPECT_EQ(column.code, 1);
  EXPECT_NE(column.output.find("missing column 'rate'"), std::string::npos) << column.output;
}

TEST_F(CliTest, UnwritableOutputExitsTwo) {
  const auto r = run_cli("run " + inputs() + " --permutations 99 --no-cache --out " + path("no/dir/out.json"));
  EXPECT_EQ(r.code, 2) << r.output;
  EXPECT_NE(r.output.find("directory does not exist"), std::string::npos) << r.output;
}

TEST_F(CliTest, Inspect) {
  ASSERT_EQ(run_cli("run " + inputs() + " --permutations 99 --no-cache --out " + path("out.json")).code, 0);
  const auto global = run_cli("inspect --results " + path("out.json"));
  EXPECT_EQ(global.code, 0) << global.output;
  EXPECT_NE(global.output.find("global-moran"), std::string::npos);
  const auto local = run_cli("inspect --results " + path("out.json") + " --location r02c02 --timestep 2002");
  EXPECT_EQ(local.code, 0) << local.output;
  EXPECT_NE(local.output.find("local-moran"), std::string::npos);
  const auto unknown = run_cli("inspect --results " + path("out.json") + " --location ZZZ");
  EXPECT_EQ(unknown.code, 1);
  EXPECT_NE(unknown.output.find("unknown location ZZZ"), std::string::npos) << unknown.output;
}

TEST_F(CliTest, UsageErrorsAndHelp) {
  EXPECT_EQ(run_cli("run --bogus").code, 1);
  EXPECT_EQ(run_cli("").code, 1);
  const auto help = run_cli("run --help");
  EXPECT_EQ(help.code, 0);
  for (const char* flag : {"--geometry", "--data", "--id-col", "--time-col", "--value-col", "--methods",
                           "--contiguity", "--permutations", "--alpha", "--seed", "--out", "--cache-dir", "--no-cache",
                           "--store-local-sketches", "--threads"}) {
    EXPECT_NE(help.output.find(flag), std::string::npos) << flag;
  }
}
