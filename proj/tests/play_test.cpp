#include <gtest/gtest.h>

#include <filesystem>
#include <thread>

#include "transition_league/eval/reports.hpp"
#include "transition_league/play/server.hpp"
#include "transition_league/synthetic.hpp"

using namespace tl;

namespace {

struct Fixture {
  std::filesystem::path dir;
  std::unique_ptr<PlayService> service;

  explicit Fixture(const std::string& name) : dir(std::filesystem::temp_directory_path() / ("tl_play_" + name)) {
    std::filesystem::remove_all(dir);
    auto league = create_league(dir / "league", desk_roster(), {obs::kDim, kActionDim, {8}, -0.5}, 3);
    SyntheticOptions so;
    so.count = 2;
    service = std::make_unique<PlayService>(std::move(league), synthetic_ensemble(so), PlayConfig{}, dir / "sessions");
  }
  ~Fixture() { std::filesystem::remove_all(dir); }

  SessionRequest request(std::uint64_t seed = 5) const {
    SessionRequest r;
    r.scenario_id = service->scenarios()[0].id;
    r.opponents = {"main-0", "main-1", "exploiter-bau", "random"};
    r.seed = seed;
    return r;
  }
};

double form_max(const Json& view, const std::string& name) {
  for (const auto& f : view.at("form").at("fields"))
    if (f.at("name") == name) return f.at("max").get<double>();
  ADD_FAILURE() << "no field " << name;
  return 0;
}

/// A fixed human strategy: produce everything, no borrowing or trading, pay
/// half the payable cash as dividends.
Json scripted(const Json& view) {
  const std::string stage = view.at("stage");
  if (stage == "production") {
    Json v = Json::array();
    for (int t = 0; t < 4; ++t) v.push_back(form_max(view, "volume[" + std::to_string(t) + "]"));
    return {{"volume", v}};
  }
  if (stage == "allocation") return {{"dividends", 0.5 * form_max(view, "dividends")}};
  return Json::object();
}

GameLog play_through(PlaySession& s) {
  while (!s.terminal()) {
    const auto v = s.view();
    s.submit(*parse_stage(v.at("stage").get<std::string>()), scripted(v));
  }
  return s.log();
}

void expect_no_private_opponent_fields(const Json& view) {
  static const std::set<std::string> allowed = {"seat",           "policy",         "portfolio",        "equity",
                                                "cumulative_dividends", "last_dividends", "last_oil_produced",
                                                "last_gas_produced"};
  for (const auto& o : view.at("opponents"))
    for (const auto& [k, v] : o.items()) EXPECT_TRUE(allowed.contains(k)) << k;
  for (const auto& [k, v] : view.items())
    EXPECT_TRUE(play_schema()["responses"]["view"]["properties"].contains(k)) << k;
}

}  // namespace

TEST(PlaySession, FreshSessionStartsAtProduction2020) {
  Fixture f("fresh");
  auto s = f.service->create(f.request());
  const auto v = s->view();
  EXPECT_EQ(v.at("stage"), "production");
  EXPECT_EQ(v.at("year"), 2020);
  EXPECT_EQ(v.at("opponents").size(), 5u);
  EXPECT_EQ(v.at("form").at("layout_version"), kActionLayoutVersion);
  expect_no_private_opponent_fields(v);
}

TEST(PlaySession, UnknownScenarioAndOpponent) {
  Fixture f("unknown");
  auto r = f.request();
  r.scenario_id = "nope";
  try {
    f.service->create(r);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::UnknownScenario);
  }
  r = f.request();
  r.opponents = {"main-9"};
  try {
    f.service->create(r);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::CheckpointLoadError);
  }
  EXPECT_THROW(f.service->get("s9999"), Error);
}

TEST(PlaySession, StageCursorIsEnforced) {
  Fixture f("cursor");
  auto s = f.service->create(f.request());
  s->submit(Stage::Production, scripted(s->view()));
  try {
    s->submit(Stage::Trading, Json::object());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::WrongStage);
  }
  EXPECT_EQ(s->view().at("stage"), "borrowing");
  EXPECT_THROW(s->log(), Error);
}

TEST(PlaySession, InfeasibleSubmissionNamesFieldAndKeepsState) {
  Fixture f("infeasible");
  auto s = f.service->create(f.request());
  s->submit(Stage::Production, scripted(s->view()));
  s->submit(Stage::Borrowing, Json::object());
  const auto before = s->view();
  const double cash = before.at("own").at("balance_sheet").at("cash").get<double>();
  auto rejects = [&](const Json& fragment, const std::string& field) {
    try {
      s->submit(Stage::Trading, fragment);
      ADD_FAILURE() << fragment.dump();
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), Errc::InvalidSubmission);
      EXPECT_NE(std::string(e.what()).find(field), std::string::npos) << e.what();
    }
    EXPECT_EQ(s->view(), before);
  };
  rejects({{"bid", {{"cash_price", 1.0}, {"cash_volume", cash * 2 + 1}}}}, "bid.cash_volume");
  rejects({{"bid", {{"cash_price", -1.0}}}}, "bid.cash_price");
  rejects({{"bid", {{"bogus", 1}}}}, "bid.bogus");
  Json orders = Json::array();
  for (int k = 0; k < 9; ++k) orders.push_back(Json::object());
  orders[3]["sell_volume"] = 1e9;
  rejects({{"orders", orders}}, "orders[3].sell_volume");
  s->submit(Stage::Trading, Json::object());
  try {
    s->submit(Stage::Allocation, {{"dividends", 1e9}});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::InvalidSubmission);
  }
  EXPECT_EQ(s->view().at("stage"), "allocation");
}

TEST(PlaySession, ReplayIsDeterministic) {
  Fixture f("replay");
  auto a = f.service->create(f.request(11));
  auto b = f.service->create(f.request(11));
  EXPECT_EQ(log_hash(play_through(*a)), log_hash(play_through(*b)));
}

TEST(PlaySession, FullGameLogFeedsReports) {
  Fixture f("full");
  auto s = f.service->create(f.request());
  const auto log = play_through(*s);
  ASSERT_TRUE(log.complete());
  const auto v = s->view();
  EXPECT_TRUE(v.at("terminal").get<bool>());
  ASSERT_EQ(v.at("scoreboard").size(), kNumSeats);
  double shares = 0;
  for (const auto& r : v.at("scoreboard")) shares += r.at("dividend_share").get<double>();
  EXPECT_NEAR(shares, 1.0, 1e-9);
  EXPECT_GT(log.cumulative_dividends(0), 0.0);

  const auto saved = load_game_log(s->log_path());
  EXPECT_EQ(log_hash(saved), log_hash(log));
  std::size_t lines = 0;
  std::ifstream in(s->transcript_path());
  for (std::string l; std::getline(in, l);) ++lines;
  EXPECT_EQ(lines, 1u + 4u * kNumYears);

  const auto archive = f.dir / "archive";
  const auto rel = archive_rel(log.header.matchup, log.header.scenario_id);
  save_game_log(archive / rel, saved);
  save_archive_index(archive, {{log.header.matchup, log.header.scenario_id, rel, log_hash(saved), 0}});
  const auto b = build_reports(archive);
  EXPECT_EQ(b.games, 1u);
}

TEST(PlayServer, RoutesAndStatusCodes) {
  Fixture f("http");
  httplib::Server server;
  mount_play_routes(server, *f.service);
  const int port = server.bind_to_any_port("127.0.0.1");
  std::thread t([&] { server.listen_after_bind(); });
  server.wait_until_ready();
  httplib::Client c("127.0.0.1", port);

  auto created = c.Post("/sessions",
                        Json{{"scenario", f.service->scenarios()[0].id}, {"opponents", {"main-0"}}, {"seed", 2}}.dump(),
                        "application/json");
  ASSERT_TRUE(created);
  EXPECT_EQ(created->status, 201);
  EXPECT_EQ(created->get_header_value("Access-Control-Allow-Origin"), "*");
  const std::string id = Json::parse(created->body).at("id");

  auto view = c.Get("/sessions/" + id + "/view");
  ASSERT_TRUE(view);
  EXPECT_EQ(view->status, 200);
  expect_no_private_opponent_fields(Json::parse(view->body));

  EXPECT_EQ(c.Post("/sessions/" + id + "/stages/trading", "{}", "application/json")->status, 409);
  EXPECT_EQ(c.Post("/sessions/" + id + "/stages/production", R"({"volume":[1e12,0,0,0]})", "application/json")->status,
            422);
  EXPECT_EQ(c.Post("/sessions/" + id + "/stages/production", "{}", "application/json")->status, 200);
  EXPECT_EQ(c.Get("/sessions/" + id + "/log")->status, 409);
  EXPECT_EQ(c.Get("/sessions/zzz/view")->status, 404);
  EXPECT_EQ(c.Post("/sessions", R"({"scenario":"nope","opponents":["main-0"]})", "application/json")->status, 404);
  EXPECT_EQ(c.Post("/sessions", "not json", "application/json")->status, 422);
  EXPECT_EQ(c.Get("/schema")->status, 200);
  EXPECT_EQ(Json::parse(c.Get("/action-layout")->body).at("dimension"), kActionDim);

  server.stop();
  t.join();
}
