#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include "test_support.hpp"

namespace {

struct CliRun {
  int code = -1;
  std::string out;
};

CliRun run_cli(const std::string& args, const std::filesystem::path& dir) {
  const auto capture = dir / "stdout.txt";
  const std::string cmd = std::string("\"") + MYOFUZZ_CLI_PATH + "\" " + args + " > \"" + capture.string() +
                          "\" 2> \"" + (dir / "stderr.txt").string() + "\"";
  const int status = std::system(cmd.c_str());
  CliRun r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  std::ifstream in(capture);
  std::stringstream ss;
  ss << in.rdbuf();
  r.out = ss.str();
  return r;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST(Cli, UsageErrorsMapToExitCodes) {
  testing_support::TempDir dir("cli-usage");
  EXPECT_EQ(run_cli("", dir.path()).code, 2);
  EXPECT_EQ(run_cli("frobnicate", dir.path()).code, 2);
  EXPECT_EQ(run_cli("synth --out x", dir.path()).code, 2);  // no seed
  EXPECT_EQ(run_cli("experiment exp9 --seed 1 --out x", dir.path()).code, 2);
  EXPECT_EQ(run_cli("inject --seed 1 --out x --snr 0 --data /nonexistent/dir", dir.path()).code, 2);
  EXPECT_EQ(run_cli("--version", dir.path()).code, 0);
}

TEST(Cli, SynthInjectExtractTrainPredictPipeline) {
  testing_support::TempDir dir("cli-pipe");
  const auto data = dir.path() / "data";
  ASSERT_EQ(run_cli("synth --seed 3 --classes 2 --channels 3 --segments-per-class 10 --out " + data.string(),
                    dir.path())
                .code,
            0);
  EXPECT_TRUE(std::filesystem::exists(data / "manifest.txt"));

  const auto dirty = dir.path() / "dirty";
  ASSERT_EQ(run_cli("inject --seed 3 --snr 6 --data " + data.string() + " --out " + dirty.string(), dir.path()).code,
            0);
  EXPECT_TRUE(std::filesystem::exists(dirty / "mask.csv"));

  const auto cache = dir.path() / "features.csv";
  ASSERT_EQ(run_cli("extract --seed 3 --data " + data.string() + " --out " + cache.string(), dir.path()).code, 0);
  EXPECT_TRUE(std::filesystem::exists(cache));

  {
    std::ofstream cfg(dir.path() / "cfg.json");
    cfg << R"({"experiment": {"k_grid": [1, 3], "nu_grid": [0.2, 0.5], "tuning_folds": 2}})";
  }
  const auto model = dir.path() / "model.txt";
  ASSERT_EQ(run_cli("train --config " + (dir.path() / "cfg.json").string() + " --seed 3 --data " + data.string() +
                        " --out " + model.string(),
                    dir.path())
                .code,
            0);

  std::filesystem::path segment;
  for (const auto& e : std::filesystem::directory_iterator(data))
    if (e.path().filename().string().rfind("2_", 0) == 0) segment = e.path();
  ASSERT_FALSE(segment.empty());
  const CliRun pred = run_cli("predict --model " + model.string() + " --segment " + segment.string(), dir.path());
  ASSERT_EQ(pred.code, 0);
  EXPECT_NE(pred.out.find("\"label\""), std::string::npos) << pred.out;
  EXPECT_NE(pred.out.find("\"membership_kind\":\"lp\""), std::string::npos) << pred.out;

  std::ofstream(dir.path() / "bad_model.txt") << "myofuzz-model 1\nwavelet 3 symmetric\ngarbage\n";
  const CliRun bad = run_cli("predict --model " + (dir.path() / "bad_model.txt").string() + " --segment " +
                              segment.string(),
                          dir.path());
  EXPECT_EQ(bad.code, 3);
}

TEST(Cli, ExperimentWritesManifestAndIsReproducible) {
  testing_support::TempDir dir("cli-exp");
  {
    std::ofstream cfg(dir.path() / "cfg.json");
    cfg << R"({"dataset": {"synthetic": {"num_classes": 2, "num_channels": 3, "segments_per_class": 10}},
              "experiment": {"snr_grid": [0, 12], "folds": 3, "repeats": 1, "tuning_folds": 2,
                             "k_grid": [1, 3], "nu_grid": [0.3], "methods": ["B", "FKNN"]}})";
  }
  const std::string base = "experiment exp3 --config " + (dir.path() / "cfg.json").string() + " --seed 11 --out ";
  ASSERT_EQ(run_cli(base + (dir.path() / "a").string(), dir.path()).code, 0);
  ASSERT_EQ(run_cli(base + (dir.path() / "b").string(), dir.path()).code, 0);
  EXPECT_TRUE(std::filesystem::exists(dir.path() / "a" / "manifest.json"));
  EXPECT_EQ(slurp(dir.path() / "a" / "records.csv"), slurp(dir.path() / "b" / "records.csv"));
  EXPECT_EQ(slurp(dir.path() / "a" / "stats_bac.json"), slurp(dir.path() / "b" / "stats_bac.json"));
  EXPECT_EQ(run_cli(base + (dir.path() / "c").string() + " --jobs 0", dir.path()).code, 2);
}
