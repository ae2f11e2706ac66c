#include <gtest/gtest.h>

#include <set>
#include <sstream>

#include "transition_league/config.hpp"

using namespace tl;

namespace {

RunConfig parse(const std::string& text) {
  std::istringstream in(text);
  return parse_run_config(in);
}

void expect_config_error(const std::string& text, const std::string& needle) {
  try {
    parse(text);
    FAIL() << text;
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::ConfigError);
    EXPECT_NE(std::string(e.what()).find(needle), std::string::npos) << e.what();
  }
}

}  // namespace

TEST(RunConfig, ReferenceRoundTrips) {
  const auto ref = reference_config();
  EXPECT_EQ(reference_config(parse(ref)), ref);
  const auto desk = reference_config(desk_run_config());
  const auto back = parse(desk);
  EXPECT_EQ(reference_config(back), desk);
  EXPECT_EQ(back.shape.hidden, (std::vector<std::size_t>{64, 64}));
  EXPECT_EQ(back.ppo.minibatch, 256u);
  EXPECT_EQ(back.roster, "desk");
}

TEST(RunConfig, EveryKeyDocumentedOnce) {
  std::istringstream in(reference_config());
  std::set<std::string> keys;
  std::string line, previous;
  while (std::getline(in, line)) {
    if (!line.empty() && line[0] != '#') {
      const auto key = line.substr(0, line.find(" = "));
      EXPECT_TRUE(keys.insert(key).second) << key;
      EXPECT_EQ(previous.rfind("# ", 0), 0u) << key << " has no description";
    }
    previous = line;
  }
  EXPECT_GT(keys.size(), 60u);
  EXPECT_TRUE(keys.contains("engine.cost.oil_low.lift"));
  EXPECT_TRUE(keys.contains("ppo.lr_actor"));
}

TEST(RunConfig, OverridesAndComments) {
  const auto c = parse("# comment\nseed = 42   # trailing\n\nppo.lr_actor=0.002\nscenarios.outlier_fraction = 0.3\n"
                       "policy.hidden = 32, 16\nengine.check_accounting = false\n");
  EXPECT_EQ(c.seed, 42u);
  EXPECT_DOUBLE_EQ(c.ppo.lr_actor, 0.002);
  EXPECT_EQ(c.outlier_fraction, 0.3);
  EXPECT_EQ(c.shape.hidden, (std::vector<std::size_t>{32, 16}));
  EXPECT_FALSE(c.engine.check_accounting);
  EXPECT_FALSE(parse("scenarios.outlier_fraction =\n").outlier_fraction);
}

TEST(RunConfig, RejectsBadInput) {
  expect_config_error("ppo.learning_rate = 1\n", "ppo.learning_rate");
  expect_config_error("seed = -1\n", "seed");
  expect_config_error("ppo.gamma = fast\n", "ppo.gamma");
  expect_config_error("engine.check_accounting = yes\n", "engine.check_accounting");
  expect_config_error("seed = 1\nseed = 2\n", "seed");
  expect_config_error("just words\n", "line 1");
  expect_config_error("league.roster = huge\n", "league.roster");
  expect_config_error("ppo.gamma = 1.5\n", "gamma");
  try {
    load_run_config("/nonexistent/missing.toml");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::ConfigError);
    EXPECT_NE(std::string(e.what()).find("--config"), std::string::npos);
  }
}

TEST(RunConfig, DerivedSettings) {
  RunConfig c;
  c.eval_margin_scale = 0.5;
  EXPECT_DOUBLE_EQ(evaluation_margins(c).fraction[4], 0.05);
  c.synthetic_count = 3;
  EXPECT_EQ(load_run_scenarios(c).size(), 3u);
  const auto t = c.train();
  EXPECT_EQ(t.epochs, c.epochs);
  EXPECT_EQ(c.roster_players().size(), 8u);
}
