#include "cli.hpp"

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json load(const std::string& name) {
  std::ifstream in(fs::path(SPME_CONFIG_DIR) / (name + ".json"));
  return json::parse(in);
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("spme_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string write(const std::string& name, const json& j) {
    const fs::path p = dir_ / name;
    std::ofstream(p) << j.dump(2);
    return p.string();
  }

  int run(std::vector<std::string> args) {
    args.insert(args.begin(), "spme");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    out_.str({});
    err_.str({});
    return spme::app::run_cli(static_cast<int>(argv.size()), argv.data(), out_, err_);
  }

  json error() const { return json::parse(err_.str()); }

  fs::path dir_;
  std::ostringstream out_, err_;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

json small_skeleton() {
  json j = load("skeleton");
  j["grid"]["n"] = 16;
  j["run"]["N_t"] = 64;
  return j;
}

}  // namespace

TEST_F(CliTest, SkeletonRunWritesArtifacts) {
  const auto cfg = write("c.json", small_skeleton());
  ASSERT_EQ(run({"skeleton", "--config", cfg, "--out", (dir_ / "a").string()}), 0) << err_.str();
  for (const char* f : {"summary.json", "manifest.json", "path.csv", "path.json"})
    EXPECT_TRUE(fs::exists(dir_ / "a" / f)) << f;
  for (const auto& e : fs::directory_iterator(dir_ / "a"))
    EXPECT_NE(e.path().extension(), ".partial") << e.path();
  const json manifest = json::parse(slurp(dir_ / "a" / "manifest.json"));
  EXPECT_EQ(manifest["experiment"], "skeleton");
  EXPECT_FALSE(manifest["config"].contains("output_dir"));
  EXPECT_FALSE(json::parse(out_.str()).empty());
}

TEST_F(CliTest, RepeatedRunsAreByteIdentical) {
  json mc = load("mc-a");
  mc["grid"]["n"] = 8;
  mc["run"]["N_t"] = 32;
  mc["experiment"]["samples"] = 12;
  const auto cfg = write("mc.json", mc);
  ASSERT_EQ(run({"mc-a", "--config", cfg, "--out", (dir_ / "a").string()}), 0) << err_.str();
  ASSERT_EQ(run({"mc-a", "--config", cfg, "--out", (dir_ / "b").string(), "--threads", "3"}), 0) << err_.str();
  for (const auto& e : fs::directory_iterator(dir_ / "a"))
    EXPECT_EQ(slurp(e.path()), slurp(dir_ / "b" / e.path().filename())) << e.path().filename();
}

TEST_F(CliTest, SeedOverrideChangesMonteCarlo) {
  json mc = load("mc-a");
  mc["grid"]["n"] = 8;
  mc["run"]["N_t"] = 32;
  mc["experiment"]["samples"] = 12;
  const auto cfg = write("mc.json", mc);
  ASSERT_EQ(run({"mc-a", "--config", cfg, "--out", (dir_ / "a").string()}), 0);
  ASSERT_EQ(run({"mc-a", "--config", cfg, "--out", (dir_ / "b").string(), "--seed", "1"}), 0);
  EXPECT_NE(slurp(dir_ / "a" / "mc.csv"), slurp(dir_ / "b" / "mc.csv"));
}

TEST_F(CliTest, OutOfRangeParameterNamesField) {
  json j = small_skeleton();
  j["generator"]["alpha"] = 1.5;
  EXPECT_EQ(run({"skeleton", "--config", write("c.json", j), "--out", (dir_ / "a").string()}), 2);
  EXPECT_EQ(error()["field"], "generator.alpha");
  EXPECT_FALSE(fs::exists(dir_ / "a" / "summary.json"));
}

TEST_F(CliTest, UnknownKeyIsRejected) {
  json j = small_skeleton();
  j["diffusion"]["c3"] = 1.0;
  EXPECT_EQ(run({"skeleton", "--config", write("c.json", j)}), 2);
  EXPECT_EQ(error()["field"], "diffusion.c3");
}

TEST_F(CliTest, SubcommandMustMatchConfig) {
  EXPECT_EQ(run({"rate", "--config", write("c.json", small_skeleton())}), 2);
  EXPECT_EQ(error()["field"], "experiment.type");
}

TEST_F(CliTest, MissingConfigFile) {
  EXPECT_EQ(run({"skeleton", "--config", (dir_ / "nope.json").string()}), 4);
  EXPECT_EQ(error()["error"], "missing_file");
}

TEST_F(CliTest, UnwritableOutput) {
  std::ofstream(dir_ / "blocker") << "x";
  EXPECT_EQ(run({"skeleton", "--config", write("c.json", small_skeleton()), "--out",
                 (dir_ / "blocker" / "sub").string()}),
            5);
}

TEST_F(CliTest, UsageErrors) {
  EXPECT_EQ(run({}), 2);
  EXPECT_EQ(run({"skeleton"}), 2);
  EXPECT_EQ(run({"skeleton", "--config", write("c.json", small_skeleton()), "--threads", "0"}), 2);
  EXPECT_EQ(run({"--version"}), 0);
}
