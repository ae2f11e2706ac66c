#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "transition_league/cli.hpp"

using namespace tl;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "transition_league");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  testing::internal::CaptureStdout();
  testing::internal::CaptureStderr();
  const int code = run_command(static_cast<int>(argv.size()), argv.data());
  return {code, testing::internal::GetCapturedStdout(), testing::internal::GetCapturedStderr()};
}

std::filesystem::path scratch(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("tl_cli_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace

TEST(Cli, UsageErrorsExitTwo) {
  EXPECT_EQ(run({}).code, kExitUsage);
  EXPECT_EQ(run({"bogus"}).code, kExitUsage);
  const auto r = run({"--config", "/nonexistent/missing.toml", "train"});
  EXPECT_EQ(r.code, kExitUsage);
  EXPECT_NE(r.err.find("ConfigError"), std::string::npos) << r.err;
  EXPECT_NE(r.err.find("--config"), std::string::npos) << r.err;
}

TEST(Cli, PrintConfigRoundTrips) {
  const auto dir = scratch("print");
  const auto r = run({"print-config"});
  ASSERT_EQ(r.code, kExitOk);
  EXPECT_EQ(r.out, reference_config());
  std::ofstream(dir / "ref.conf") << r.out;
  EXPECT_EQ(reference_config(load_run_config(dir / "ref.conf")), r.out);
  EXPECT_EQ(run({"print-config", "--desk"}).out, reference_config(desk_run_config()));
  std::filesystem::remove_all(dir);
}

TEST(Cli, ValidateScenarios) {
  const auto dir = scratch("lint");
  SyntheticOptions so;
  so.count = 5;
  save_scenarios(dir / "ok.csv", synthetic_ensemble(so));
  const auto ok = run({"validate-scenarios", (dir / "ok.csv").string()});
  EXPECT_EQ(ok.code, kExitOk);
  EXPECT_EQ(ok.out, "5 scenarios OK\n");
  std::ofstream(dir / "bad.csv") << "scenario_id,model\nx,y\n";
  const auto bad = run({"validate-scenarios", (dir / "bad.csv").string()});
  EXPECT_EQ(bad.code, kExitFailure);
  EXPECT_NE(bad.err.find("MissingColumn"), std::string::npos) << bad.err;
  std::filesystem::remove_all(dir);
}

TEST(Cli, EmptyArchiveExitsThree) {
  const auto dir = scratch("empty");
  const auto r = run({"--out", dir.string(), "report", "--archive", (dir / "archive").string()});
  EXPECT_EQ(r.code, kExitNoGames);
  EXPECT_NE(r.err.find("no games indexed"), std::string::npos);
  std::filesystem::remove_all(dir);
}

TEST(Cli, TrainEvaluateReport) {
  const auto dir = scratch("pipeline");
  std::ofstream(dir / "tiny.conf") << "scenarios.synthetic_count = 2\nleague.roster = desk\nleague.epochs = 2\n"
                                      "league.games_per_epoch = 1\npolicy.hidden = 8\neval.random_games = 2\n"
                                      "out = "
                                   << (dir / "run").string() << "\n";
  const auto conf = (dir / "tiny.conf").string();

  const auto trained = run({"--config", conf, "--seed", "3", "train"});
  ASSERT_EQ(trained.code, kExitOk) << trained.err;
  EXPECT_TRUE(std::filesystem::exists(dir / "run" / "league" / "league.json"));
  EXPECT_TRUE(std::filesystem::exists(dir / "run" / "effective_config.txt"));
  std::ifstream metrics(dir / "run" / "league" / "metrics.jsonl");
  std::size_t lines = 0;
  for (std::string l; std::getline(metrics, l);) {
    EXPECT_TRUE(Json::parse(l).contains("mean_reward"));
    ++lines;
  }
  EXPECT_EQ(lines, 3u * 2u);

  EXPECT_EQ(run({"--config", conf, "--seed", "3", "train"}).code, kExitUsage);
  EXPECT_EQ(run({"--config", conf, "--seed", "3", "--resume", "train"}).code, kExitOk);

  const auto evaluated = run({"--config", conf, "--seed", "3", "evaluate"});
  ASSERT_EQ(evaluated.code, kExitOk) << evaluated.err;
  EXPECT_NE(evaluated.out.find("2 games played"), std::string::npos) << evaluated.out;
  EXPECT_EQ(run({"--config", conf, "evaluate"}).code, kExitUsage);
  const auto resumed = run({"--config", conf, "--seed", "3", "--resume", "evaluate"});
  EXPECT_NE(resumed.out.find("0 games played, 2 already archived"), std::string::npos) << resumed.out;

  const auto reported = run({"--config", conf, "report"});
  ASSERT_EQ(reported.code, kExitOk) << reported.err;
  EXPECT_TRUE(std::filesystem::exists(dir / "run" / "reports"));
  std::filesystem::remove_all(dir);
}
