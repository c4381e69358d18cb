#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>

#include "config.hpp"
#include "tcr/error.hpp"

namespace fs = std::filesystem;
using tcr::cli::RunConfig;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("tcr_cli_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) + "_" +
            ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

int run_tool(const std::string& args) {
  const std::string cmd = std::string(TCR_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void write(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

// Column of `term` rows in an estimates CSV, keyed by term name.
std::map<std::string, std::string> coefs(const fs::path& p) {
  std::map<std::string, std::string> out;
  std::istringstream in(slurp(p));
  std::string line;
  std::getline(in, line);
  while (std::getline(in, line)) {
    const auto a = line.find(','), b = line.find(',', a + 1);
    out[line.substr(0, a)] = line.substr(a + 1, b - a - 1);
  }
  return out;
}

const char* kSmall = R"({"population": {"n_districts": 1, "schools_per_district": 6}})";

}  // namespace

TEST(Cli, Fnv1aKnownVectors) {
  EXPECT_EQ(tcr::cli::fnv1a_hex(""), "cbf29ce484222325");
  EXPECT_EQ(tcr::cli::fnv1a_hex("a"), "af63dc4c8601ec8c");
  EXPECT_EQ(tcr::cli::fnv1a_hex("foobar"), "85944171f73967e8");
}

TEST(Cli, ConfigRoundTripsThroughJson) {
  auto j = nlohmann::json::parse(R"({
    "seed": 9, "k": 4, "l": 2, "cutoffs": [2.6], "cells": "block", "include_lambda": true,
    "replications": 250, "threads": 2, "level": 0.1,
    "population": {"n_districts": 3, "endogenous_mode": "teacher_sorting"},
    "params": {"alpha": 0.5}, "vam": {"sigma": 0.2, "tau": 0.1}})");
  const auto c = RunConfig::from_json(j);
  EXPECT_EQ(c.K, 4);
  EXPECT_EQ(c.cells, tcr::CellScheme::block);
  EXPECT_EQ(c.population_config().n_districts, 3);
  EXPECT_EQ(c.population_config().seed, 9u);
  EXPECT_EQ(c.production_params().alpha, 0.5);
  EXPECT_EQ(c.category_spec().teacher_cutoffs, (std::vector<double>{2.6}));
  const auto again = RunConfig::from_json(c.to_json());
  EXPECT_EQ(again.to_json(), c.to_json());
}

TEST(Cli, ConfigRejectsUnknownKeysAndMissingSeed) {
  EXPECT_THROW(RunConfig::from_json(nlohmann::json::parse(R"({"seeds": 1})")), tcr::InvalidInput);
  EXPECT_THROW(RunConfig::from_json(nlohmann::json::parse(R"({"population": {"districts": 1}})")), tcr::InvalidInput);
  EXPECT_THROW(RunConfig::from_json(nlohmann::json::parse(R"({"k": "three"})")), tcr::InvalidInput);
  EXPECT_THROW(RunConfig{}.require_seed("synth"), tcr::InvalidInput);
}

TEST(Cli, SynthIsByteIdenticalForASeed) {
  TempDir t;
  write(t.path / "cfg.json", kSmall);
  const auto cfg = (t.path / "cfg.json").string();
  ASSERT_EQ(run_tool("synth --config " + cfg + " --seed 5 --out " + (t.path / "a").string()), 0);
  ASSERT_EQ(run_tool("synth --config " + cfg + " --seed 5 --out " + (t.path / "b").string()), 0);
  ASSERT_EQ(run_tool("synth --config " + cfg + " --seed 6 --out " + (t.path / "c").string()), 0);
  for (const char* f : {"blocks.csv", "sections.csv", "teachers.csv", "students.csv"})
    EXPECT_EQ(slurp(t.path / "a" / f), slurp(t.path / "b" / f)) << f;
  EXPECT_NE(slurp(t.path / "a" / "students.csv"), slurp(t.path / "c" / "students.csv"));
  const auto manifest = nlohmann::json::parse(slurp(t.path / "a" / "manifest.json"));
  // manifests differ only in the recorded output directory
  EXPECT_EQ(manifest["status"], nlohmann::json::parse(slurp(t.path / "b" / "manifest.json"))["status"]);
  EXPECT_EQ(manifest["seed"], 5);
  EXPECT_EQ(manifest["command"], "synth");
  EXPECT_EQ(manifest["config_hash"].get<std::string>().rfind("fnv1a64:", 0), 0u);
  EXPECT_EQ(slurp(t.path / "a" / "students.csv").find("oracle"), std::string::npos);
}

TEST(Cli, ExitCodes) {
  TempDir t;
  write(t.path / "one.json", R"({"population": {"classrooms_per_block": 1}})");
  EXPECT_EQ(run_tool("synth --seed 1 --config " + (t.path / "one.json").string() + " --out " + (t.path / "x").string()), 1);
  EXPECT_EQ(run_tool("synth --out " + (t.path / "noseed").string()), 1);
  EXPECT_EQ(run_tool("frobnicate"), 1);

  // dataset with the practice score column removed
  fs::create_directories(t.path / "broken");
  for (const char* f : {"blocks.csv", "sections.csv", "students.csv"})
    fs::copy_file(fs::path(TCR_FIXTURE_DIR) / "six_students" / f, t.path / "broken" / f);
  write(t.path / "broken" / "teachers.csv", "teacher_id,block_id,aux_experience\n0,0,3\n1,0,11\n");
  EXPECT_EQ(run_tool("estimate --data " + (t.path / "broken").string() + " --out " + (t.path / "e").string()), 2);
}

TEST(Cli, PerfectComplianceMakesOlsAndTslsFilesAgree) {
  TempDir t;
  write(t.path / "cfg.json",
        R"({"population": {"n_districts": 1, "noncompliance_rate_teachers": 0, "noncompliance_rate_students": 0}})");
  const auto data = (t.path / "data").string();
  ASSERT_EQ(run_tool("synth --seed 3 --config " + (t.path / "cfg.json").string() + " --out " + data), 0);
  ASSERT_EQ(run_tool("estimate --data " + data + " --out " + (t.path / "est").string()), 0);
  const auto ols = slurp(t.path / "est" / "estimates_ols.csv");
  EXPECT_EQ(ols, slurp(t.path / "est" / "estimates_2sls.csv"));
  EXPECT_FALSE(ols.empty());
}

TEST(Cli, IncludeLambdaAddsPeerTerms) {
  TempDir t;
  write(t.path / "cfg.json", kSmall);
  const auto data = (t.path / "data").string();
  ASSERT_EQ(run_tool("synth --seed 4 --config " + (t.path / "cfg.json").string() + " --out " + data), 0);
  ASSERT_EQ(run_tool("estimate --data " + data + " --out " + (t.path / "base").string()), 0);
  ASSERT_EQ(run_tool("estimate --include-lambda --data " + data + " --out " + (t.path / "lam").string()), 0);
  auto count = [](const std::map<std::string, std::string>& m) {
    int n = 0;
    for (const auto& [term, v] : m) n += term.rfind("W[", 0) == 0 || term.find("xW[") != std::string::npos;
    return n;
  };
  EXPECT_EQ(count(coefs(t.path / "base" / "estimates_2sls.csv")), 6);
  EXPECT_EQ(count(coefs(t.path / "lam" / "estimates_2sls.csv")), 10);
}

TEST(Cli, DiagnoseReallocateAndBootstrap) {
  TempDir t;
  write(t.path / "cfg.json", kSmall);
  const auto data = (t.path / "data").string();
  ASSERT_EQ(run_tool("synth --seed 7 --config " + (t.path / "cfg.json").string() + " --out " + data), 0);
  const int diag = run_tool("diagnose --data " + data + " --out " + (t.path / "d").string());
  EXPECT_TRUE(diag == 0 || diag == 4);
  EXPECT_TRUE(fs::exists(t.path / "d" / "diagnostics.csv"));
  ASSERT_EQ(run_tool("reallocate --data " + data + " --out " + (t.path / "r").string()), 0);
  for (const char* f : {"plans.csv", "effects.csv", "assortativeness.csv", "manifest.json"})
    EXPECT_TRUE(fs::exists(t.path / "r" / f)) << f;
  ASSERT_EQ(run_tool("bootstrap --seed 2 --replications 2 --data " + data + " --out " + (t.path / "b").string()), 0);
  const auto posterior = slurp(t.path / "b" / "posterior.csv");
  EXPECT_NE(posterior.find("objective[optimal]"), std::string::npos);
  EXPECT_NE(posterior.find(",1\n"), std::string::npos);  // low_b flagged
  EXPECT_TRUE(fs::exists(t.path / "b" / "draws.csv"));
  const auto manifest = nlohmann::json::parse(slurp(t.path / "b" / "manifest.json"));
  EXPECT_EQ(manifest["status"]["low_b"], true);
}

TEST(Cli, BenchmarkVamAndToyAre) {
  TempDir t;
  ASSERT_EQ(run_tool("benchmark-vam --out " + (t.path / "v").string()), 0);
  const auto vam = slurp(t.path / "v" / "vam_benchmark.csv");
  EXPECT_NE(vam.find("0.0154"), std::string::npos) << vam;
  EXPECT_TRUE(fs::exists(t.path / "v" / "vam_sweep.csv"));
  EXPECT_EQ(run_tool("benchmark-vam --tau-tilde 0.5 --out " + (t.path / "bad").string()), 1);

  ASSERT_EQ(run_tool("toy-are --out " + (t.path / "toy").string()), 0);
  std::istringstream density(slurp(t.path / "toy" / "toy_density.csv"));
  int lines = 0;
  for (std::string s; std::getline(density, s);) ++lines;
  EXPECT_EQ(lines, 13);
  const auto are = slurp(t.path / "toy" / "toy_are.csv");
  EXPECT_NE(are.find("separable"), std::string::npos);
}
