#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <set>

#include "transition_league/eval/reports.hpp"
#include "transition_league/synthetic.hpp"

using namespace tl;

namespace {

std::vector<std::string> roster8() {
  std::vector<std::string> r;
  for (const auto& p : canonical_roster()) r.push_back(p.id);
  return r;
}

GameLog blank_log() {
  GameLog log;
  for (std::size_t i = 0; i < kNumSeats; ++i) log.header.seats[i] = {"p" + std::to_string(i) + "@1", "Balanced", "none"};
  log.header.scenario_id = "s0";
  log.header.scenario_model = "MODEL";
  log.header.bucket = WarmingBucket::LE2;
  for (int y = kFirstYear; y <= kLastYear; ++y) {
    YearRecord r;
    r.year = y;
    r.prices = {60.0, 36.0};
    log.years.push_back(r);
  }
  return log;
}

SeatYear& at(GameLog& log, int year, std::size_t seat) { return log.years[year - kFirstYear].seats[seat]; }

std::filesystem::path fresh_dir(const std::string& name) {
  auto d = std::filesystem::temp_directory_path() / ("tl_eval_" + name);
  std::filesystem::remove_all(d);
  return d;
}

void write_archive(const std::filesystem::path& dir, const std::vector<GameLog>& logs) {
  std::vector<ArchiveEntry> entries;
  for (std::size_t k = 0; k < logs.size(); ++k) {
    const auto rel = archive_rel(logs[k].header.matchup, logs[k].header.scenario_id);
    save_game_log(dir / rel, logs[k]);
    entries.push_back({logs[k].header.matchup, logs[k].header.scenario_id, rel, log_hash(logs[k]), k});
  }
  save_archive_index(dir, entries);
}

struct SmallTournament {
  std::filesystem::path dir;
  League league;
  ScenarioSet scenarios;
  std::vector<Matchup> matchups;

  explicit SmallTournament(const std::string& name) : dir(fresh_dir(name)) {
    league = create_league(dir / "league", canonical_roster(), {obs::kDim, kActionDim, {8}, -0.5}, 31);
    SyntheticOptions so;
    so.count = 3;
    scenarios = synthetic_ensemble(so);
    const auto all = enumerate_matchups(roster8());
    matchups = {all[0], all[27]};
  }
  ~SmallTournament() { std::filesystem::remove_all(dir); }
};

std::vector<std::string> hashes(const std::vector<ArchiveEntry>& es) {
  std::vector<std::string> h;
  for (const auto& e : es) h.push_back(e.matchup + "/" + e.scenario + "=" + e.hash);
  return h;
}

}  // namespace

TEST(Matchups, CombinatorialIdentities) {
  const auto m = enumerate_matchups(roster8());
  ASSERT_EQ(m.size(), 28u);
  std::set<std::string> keys;
  for (const auto& x : m) {
    EXPECT_EQ(x.players.size(), kNumSeats);
    keys.insert(x.key());
  }
  EXPECT_EQ(keys.size(), 28u);
  const auto s = summarize_schedule(m, 408);
  EXPECT_EQ(s.games, 11424u);
  for (const auto& [p, n] : s.appearances) EXPECT_EQ(n, 21u) << p;
  for (const auto& [p, n] : s.games_per_player) EXPECT_EQ(n, 8568u) << p;
}

TEST(Matchups, RosterSizeIsChecked) {
  auto r = roster8();
  r.pop_back();
  try {
    enumerate_matchups(r);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::WrongRosterSize);
  }
  EXPECT_EQ(padded_matchup({"a", "b"}).players, (std::vector<std::string>{"a", "b", "a", "b", "a", "b"}));
}

TEST(Tournament, ArchivesEveryGameAndReproduces) {
  SmallTournament t("repro");
  TournamentConfig cfg;
  cfg.seed = 4;
  const auto first = run_tournament(t.league, t.matchups, t.scenarios, t.dir / "a", cfg);
  EXPECT_EQ(first.played, 6u);
  EXPECT_EQ(load_archive_index(t.dir / "a").size(), 6u);
  for (const auto& e : first.entries) {
    const auto log = load_game_log(t.dir / "a" / e.path);
    EXPECT_TRUE(log.complete());
    EXPECT_EQ(log_hash(log), e.hash);
  }
  cfg.workers = 4;
  const auto second = run_tournament(t.league, t.matchups, t.scenarios, t.dir / "b", cfg);
  EXPECT_EQ(hashes(first.entries), hashes(second.entries));
}

TEST(Tournament, ResumesWithoutDuplicates) {
  SmallTournament t("resume");
  TournamentConfig cfg;
  const auto full = run_tournament(t.league, t.matchups, t.scenarios, t.dir / "a", cfg);
  std::filesystem::remove(t.dir / "a" / full.entries[4].path);
  std::filesystem::remove(t.dir / "a" / "index.json");
  const auto resumed = run_tournament(t.league, t.matchups, t.scenarios, t.dir / "a", cfg);
  EXPECT_EQ(resumed.played, 1u);
  EXPECT_EQ(resumed.skipped, 5u);
  EXPECT_EQ(hashes(resumed.entries), hashes(full.entries));
  std::set<std::string> keys;
  for (const auto& e : load_archive_index(t.dir / "a")) keys.insert(e.matchup + "/" + e.scenario);
  EXPECT_EQ(keys.size(), 6u);
}

TEST(Tournament, MissingCheckpointNamesPlayer) {
  SmallTournament t("missing");
  std::filesystem::remove(t.league.resolve(t.league.player("main-3").checkpoints.back()));
  try {
    run_tournament(t.league, t.matchups, t.scenarios, t.dir / "a", {});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::CheckpointLoadError);
    EXPECT_NE(std::string(e.what()).find("main-3"), std::string::npos);
  }
}

TEST(Strategy, EarlyLowCarbon) {
  auto log = blank_log();
  for (int y = kFirstYear; y <= kLastYear; ++y) {
    at(log, y, 0).auction_cash_paid = 10;
    at(log, y, 0).capex_cash[0] = 2;
  }
  const auto l = classify_strategy(log, 0);
  EXPECT_EQ(l.movement, Movement::Early);
  EXPECT_EQ(l.model, Market::LowCarbon);
  EXPECT_EQ(l.tag, "E-LC");
}

TEST(Strategy, MidTermOilFromRuleTable) {
  auto log = blank_log();
  for (int y = kFirstYear; y <= kLastYear; ++y) at(log, y, 1).capex_cash[track_index(TrackKind::Develop, Tier::OilLow)] = 5;
  at(log, 2024, 1).bought_cost[index(AssetClass::LowCarbon)] = 6;
  const auto l = classify_strategy(log, 1);
  EXPECT_EQ(l.eclipse_year, 2024);
  EXPECT_EQ(l.movement, Movement::MidTerm);
  EXPECT_EQ(l.model, Market::Oil);
  EXPECT_EQ(l.tag, "M-O");

  at(log, 2024, 1).bought_cost[index(AssetClass::LowCarbon)] = 0;
  at(log, 2022, 1).auction_credit_drawn = 6;
  EXPECT_EQ(classify_strategy(log, 1).movement, Movement::Early);
  at(log, 2022, 1).auction_credit_drawn = 0;
  at(log, 2025, 1).auction_credit_drawn = 6;
  EXPECT_EQ(classify_strategy(log, 1).movement, Movement::Late);
}

TEST(Strategy, ExploiterTagsAndTies) {
  auto log = blank_log();
  log.header.seats[2].constraint = "bau";
  log.header.seats[3].constraint = "delayed:2030";
  for (int y = kFirstYear; y <= kLastYear; ++y) {
    at(log, y, 2).capex_cash[track_index(TrackKind::Explore, Tier::OilHigh)] = 3;
    at(log, y, 3).capex_cash[track_index(TrackKind::Explore, Tier::GasLow)] = 3;
  }
  EXPECT_EQ(classify_strategy(log, 2).tag, "Exp-B-O");
  EXPECT_EQ(classify_strategy(log, 3).tag, "Exp-D-G");
  EXPECT_EQ(classify_strategy(log, 4).model, Market::LowCarbon);  // all-zero ties go to low-carbon
  EXPECT_EQ(classify_strategy(log, 4).movement, Movement::None);
  at(log, 2030, 5).capex_cash[0] = 1;
  at(log, 2030, 5).capex_credit[track_index(TrackKind::Develop, Tier::GasHigh)] = 1;
  EXPECT_EQ(classify_strategy(log, 5).model, Market::Oil);
  EXPECT_EQ(classify_strategy(log, 5), classify_strategy(log, 5));
}

TEST(Shares, DividendShare) {
  auto log = blank_log();
  EXPECT_EQ(dividend_share(log, 0), 0.0);
  for (std::size_t i = 0; i < kNumSeats; ++i) at(log, 2030, i).dividends = 7;
  for (std::size_t i = 0; i < kNumSeats; ++i) EXPECT_DOUBLE_EQ(dividend_share(log, i), 1.0 / 6);
  at(log, 2040, 2).dividends = 13.3;
  at(log, 2031, 5).dividends = 0.1;
  for (int y = kFirstYear; y <= kLastYear; ++y) at(log, y, 4).dividends = 0;
  double s = 0;
  for (std::size_t i = 0; i < kNumSeats; ++i) s += dividend_share(log, i);
  EXPECT_NEAR(s, 1.0, 1e-12);
  EXPECT_EQ(dividend_share(log, 4), 0.0);
}

TEST(Shares, TransitionYear) {
  auto log = blank_log();
  const double oil_unit = log.header.costs.unit_value(AssetClass::OilDevLow);
  for (int y = kFirstYear; y <= kLastYear; ++y) {
    auto& bs = at(log, y, 0).end_sheet;
    bs[AssetClass::OilDevLow] = 10.0;
    bs[AssetClass::LowCarbon] = 10.0 * oil_unit * (y >= 2027 ? 1.01 : 0.99);
  }
  EXPECT_EQ(transition_year(log, 0), 2027);
  EXPECT_EQ(transition_year(log, 1), std::nullopt);
}

TEST(Reports, SingleGameTables) {
  const auto dir = fresh_dir("single");
  auto log = blank_log();
  log.header.matchup = "m";
  for (int y = kFirstYear; y <= kLastYear; ++y)
    for (std::size_t i = 0; i < kNumSeats; ++i) {
      auto& sy = at(log, y, i);
      sy.dividends = 1.0 + static_cast<double>(i);
      sy.end_sheet[AssetClass::OilDevLow] = 1.0 + y % 7;
      sy.end_sheet[AssetClass::GasUndevHigh] = 0.3 * static_cast<double>(i);
      sy.end_sheet[AssetClass::LowCarbon] = 0.1 * (y - kFirstYear);
    }
  write_archive(dir / "archive", {log});
  const auto b = build_reports(dir / "archive");
  EXPECT_EQ(b.games, 1u);

  const auto& sens = b.tables.at("oil_price_sensitivity");
  std::set<std::string> years;
  for (const auto& r : sens.rows) {
    EXPECT_EQ(r[4], "1");  // this archive has one seat per label, so each cell holds one observation
    years.insert(r[1]);
  }
  EXPECT_EQ(years.size(), static_cast<std::size_t>(kNumYears));

  for (const auto& r : b.tables.at("portfolio_evolution").rows)
    EXPECT_NEAR(std::stod(r[3]) + std::stod(r[4]) + std::stod(r[5]), 1.0, 1e-9);
  EXPECT_FALSE(b.tables.contains("investment_contribution"));
  std::filesystem::remove_all(dir);
}

TEST(Reports, InvestmentContribution) {
  const auto dir = fresh_dir("bench");
  auto log = blank_log();
  log.header.matchup = "m";
  for (int y = kFirstYear; y <= kLastYear; ++y) at(log, y, 0).auction_cash_paid = 2.0;
  write_archive(dir / "archive", {log});
  {
    std::ofstream out(dir / "bench.csv");
    out << "model,scenario_class,decade,annual_required_investment\n";
    for (int d : {2020, 2030, 2040, 2050}) out << "MODEL,LE2," << d << ",100\n";
  }
  ReportOptions opt;
  opt.benchmark = dir / "bench.csv";
  const auto b = build_reports(dir / "archive", opt);
  int rows = 0;
  for (const auto& r : b.tables.at("investment_contribution").rows)
    if (r[0] == "p0") {
      EXPECT_DOUBLE_EQ(std::stod(r[2]), 0.02);
      EXPECT_DOUBLE_EQ(std::stod(r[3]), 0.0);
      ++rows;
    }
  EXPECT_EQ(rows, 4);

  {
    std::ofstream out(dir / "bench.csv");
    out << "model,scenario_class,decade,annual_required_investment\nMODEL,LE2,2020,100\n";
  }
  try {
    build_reports(dir / "archive", opt);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::MissingBenchmark);
  }
  opt.benchmark = dir / "absent.csv";
  EXPECT_THROW(build_reports(dir / "archive", opt), Error);
  std::filesystem::remove_all(dir);
}

TEST(Reports, RebuildIsByteIdentical) {
  SmallTournament t("bytes");
  run_tournament(t.league, t.matchups, t.scenarios, t.dir / "archive", {});
  const auto a = build_reports(t.dir / "archive");
  const auto b = build_reports(t.dir / "archive");
  write_reports(a, t.dir / "r1");
  write_reports(b, t.dir / "r2");
  for (const auto& entry : std::filesystem::directory_iterator(t.dir / "r1"))
    EXPECT_EQ(read_file(entry.path()), read_file(t.dir / "r2" / entry.path().filename())) << entry.path();
  EXPECT_EQ(a.games, 6u);

  std::map<std::string, double> per_game;
  for (const auto& r : a.tables.at("games").rows) per_game[r[0] + r[1]] += std::stod(r[6]);
  for (const auto& [g, s] : per_game)
    if (s > 0) {
      EXPECT_NEAR(s, 1.0, 1e-9) << g;
    }
}
