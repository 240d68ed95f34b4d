#include <gtest/gtest.h>

#include <sys/wait.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <string>

#include "nlc/beat_topology.hpp"
#include "nlc/io.hpp"

namespace fs = std::filesystem;

namespace {

int run(const std::string& args) {
  const std::string cmd = std::string(NLC_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir = fs::temp_directory_path() /
          ("nlc_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir);
  }
  void TearDown() override { fs::remove_all(dir); }
  std::string out() const { return "--out " + dir.string(); }
  std::string fixture() const { return std::string("--fixture ") + NLC_FIXTURE_PATH; }
  fs::path dir;
};

}  // namespace

TEST_F(Cli, UsageErrors) {
  EXPECT_EQ(run(""), 2);
  EXPECT_EQ(run("frobnicate"), 2);
  EXPECT_EQ(run("--help"), 0);
}

TEST_F(Cli, MissingFilesAreConfigErrors) {
  EXPECT_EQ(run(out() + " analyze rb --data " + (dir / "absent.csv").string()), 2);
  EXPECT_EQ(run(out() + " --fixture " + (dir / "absent.json").string() + " spectrum"), 2);
  EXPECT_FALSE(fs::exists(dir / "spectrum.json"));
}

TEST_F(Cli, BadOverrideIsConfigError) {
  EXPECT_EQ(run(out() + " " + fixture() + " --override bus.colour=1 spectrum"), 2);
}

TEST_F(Cli, SpectrumWritesProvenance) {
  ASSERT_EQ(run(out() + " " + fixture() + " spectrum"), 0);
  const auto j = nlc::io::parse_json(nlc::io::read_text(dir / "spectrum.json"), "spectrum.json");
  EXPECT_EQ(j["provenance"]["seed"], 1);
  EXPECT_EQ(j["provenance"]["fixture_hash"].get<std::string>().size(), 16u);
  EXPECT_LT(std::abs(j["result"]["static_zz"]["zeta_hz"].get<double>()), 50.0);
  EXPECT_TRUE(fs::exists(dir / "spectrum.csv"));
}

TEST_F(Cli, AnalyzePipelinesOnSyntheticData) {
  for (const std::string p : {"quadratic", "rb", "photon-cal", "ramsey", "zz", "readout", "mist"}) {
    const auto csv = (dir / (p + ".csv")).string();
    ASSERT_EQ(run(out() + " synth " + p + " --to-file " + csv), 0) << p;
    ASSERT_EQ(run(out() + " analyze " + p + " --data " + csv), 0) << p;
    EXPECT_TRUE(fs::exists(dir / ("analyze_" + p + ".json"))) << p;
  }
  const auto q = nlc::io::parse_json(nlc::io::read_text(dir / "analyze_quadratic.json"), "q");
  EXPECT_NEAR(q["result"]["eps_at_1"]["value"].get<double>(), 0.0063, 0.0005);
}

TEST_F(Cli, MalformedAndUnderdeterminedCsv) {
  nlc::io::write_text(dir / "bad.csv", "m,error\n1,abc\n");
  EXPECT_EQ(run(out() + " analyze quadratic --data " + (dir / "bad.csv").string()), 2);
  nlc::io::write_text(dir / "short.csv", "m,error\n1,0.1\n");
  EXPECT_EQ(run(out() + " analyze quadratic --data " + (dir / "short.csv").string()), 3);
}

TEST_F(Cli, BeatGraphDotRoundTrip) {
  ASSERT_EQ(run(out() + " beat grid --L 3 --rows 2"), 0);
  const std::string dot = nlc::io::read_text(dir / "graph.dot");
  EXPECT_EQ(nlc::beat::to_dot(nlc::beat::from_dot(dot)), dot);
  EXPECT_EQ(nlc::beat::to_dot(nlc::beat::build_grid(2, 3)), dot);
}

TEST_F(Cli, BeatStatsDeterministic) {
  ASSERT_EQ(run(out() + " beat stats --L 4 --L-max 6"), 0);
  const std::string first = nlc::io::read_text(dir / "beat_stats.json");
  ASSERT_EQ(run(out() + " beat stats --L 4 --L-max 6"), 0);
  EXPECT_EQ(nlc::io::read_text(dir / "beat_stats.json"), first);
  const std::string csv = nlc::io::read_text(dir / "beat_stats.csv");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 4);
  EXPECT_EQ(run(out() + " beat stats --L 40"), 2);
  EXPECT_EQ(run(out() + " beat route --L 4 --from 0 --to 3"), 2);
}

TEST_F(Cli, ManifestDrivesRun) {
  nlc::io::RunManifest m;
  m.experiment = "beat";
  m.seed = 5;
  m.output_dir = dir.string();
  nlc::io::write_text(dir / "manifest.json", m.to_json().dump());
  ASSERT_EQ(run("--manifest " + (dir / "manifest.json").string() + " beat route --L 4 --from 9 --to 13"), 0);
  const auto j = nlc::io::parse_json(nlc::io::read_text(dir / "route.json"), "route");
  EXPECT_EQ(j["provenance"]["seed"], 5);
  EXPECT_EQ(j["result"]["lca"], "01");
  EXPECT_EQ(j["result"]["lca_position"], 12);
}
