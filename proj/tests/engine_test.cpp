#include <gtest/gtest.h>

#include "transition_league/engine/game.hpp"
#include "transition_league/engine/portfolio.hpp"
#include "transition_league/synthetic.hpp"

using namespace tl;

namespace {

template <typename T>
std::array<T, kNumSeats> all(const T& v) {
  std::array<T, kNumSeats> a;
  a.fill(v);
  return a;
}

SeatArray default_portfolios(const EngineConfig& cfg = {}) {
  SeatArray s;
  for (std::size_t i = 0; i < kNumSeats; ++i) s[i] = make_portfolio(kMainVariants[i], {}, cfg.costs);
  return s;
}

SeatArray uniform_sheets(const BalanceSheet& bs) { return all(bs); }

void skip_to_allocation(GameState& g) {
  run_production(g, all(ProductionAction{}));
  run_borrowing(g, all(BorrowRequest{}));
  run_trading(g, all(TradingAction{}));
}

void null_year(GameState& g) {
  skip_to_allocation(g);
  run_allocation(g, all(AllocationAction{}));
  advance_year(g);
}

}  // namespace

TEST(NewGame, DefaultPortfoliosAreEqualValue) {
  EngineConfig cfg;
  auto g = new_game(default_portfolios(cfg), synthetic_scenario(0, {}), cfg, 1);
  EXPECT_EQ(g.year, 2020);
  EXPECT_EQ(g.stage, Stage::Production);
  for (const auto& s : g.seats) EXPECT_NEAR(s.initial_equity, 100.0, 1e-9);
}

TEST(NewGame, RejectsNegativeCash) {
  auto p = default_portfolios();
  p[3].cash = -1;
  try {
    new_game(p, synthetic_scenario(0, {}), {}, 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::InvalidPortfolio);
  }
}

TEST(NewGame, RejectsUnequalValue) {
  auto p = default_portfolios();
  p[2].cash += 0.2;  // 0.2% of 100
  try {
    new_game(p, synthetic_scenario(0, {}), {}, 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::UnequalPortfolioValue);
  }
  p[2].cash -= 0.15;  // 0.05%, inside tolerance
  EXPECT_NO_THROW(new_game(p, synthetic_scenario(0, {}), {}, 1));
}

TEST(Production, NullActionLeavesCash) {
  BalanceSheet bs;
  bs.cash = 10;
  bs[AssetClass::OilDevLow] = 5;
  auto g = new_game(uniform_sheets(bs), synthetic_scenario(0, {}), {}, 1);
  run_production(g, all(ProductionAction{}));
  for (const auto& s : g.seats) EXPECT_EQ(s.sheet.cash, 10);
}

TEST(Production, MarginTaxAndInterest) {
  BalanceSheet bs;
  bs.cash = 10;
  bs.debt = 5;
  bs[AssetClass::OilDevLow] = 1;
  bs[AssetClass::LowCarbon] = 20;
  auto sc = synthetic_scenario(0, {});
  auto g = new_game(uniform_sheets(bs), sc, {}, 1);
  ProductionAction a;
  a.volume[index(Tier::OilLow)] = 0.5;
  run_production(g, all(a));
  const auto& m = sc.at(2020);
  const double price = 60.0 * (0.365 * (1 - m.opec_share) * m.oil_demand) / 3.0;
  EXPECT_NEAR(g.prices.oil, std::clamp(price, 5.0, 250.0), 1e-9);
  const double kd = 0.04 + 0.02 * g.seats[0].metrics.debt_to_equity;
  const double expect = 10 + 0.5 * (g.prices.oil - 20) * 0.76 + m.lc_roi * 20 * 0.76 - kd * 5;
  EXPECT_NEAR(g.seats[0].sheet.cash, expect, 1e-9);
  EXPECT_NEAR(g.seats[0].sheet[AssetClass::OilDevLow], 0.5, 1e-12);
}

TEST(Production, OverProductionRejected) {
  auto g = new_game(default_portfolios(), synthetic_scenario(0, {}), {}, 1);
  auto actions = all(ProductionAction{});
  actions[4].volume[index(Tier::GasHigh)] = 1e6;
  const auto before = g.seats;
  try {
    run_production(g, actions);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::OverProduction);
    EXPECT_NE(std::string(e.what()).find("seat 4"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("GasHigh"), std::string::npos);
  }
  EXPECT_EQ(g.stage, Stage::Production);
  EXPECT_EQ(g.seats[4].sheet, before[4].sheet);
}

TEST(Production, TierBelowLiftRejected) {
  BalanceSheet bs;
  bs.cash = 10;
  bs[AssetClass::OilDevHigh] = 100;
  auto sc = synthetic_scenario(0, {});
  for (auto& y : sc.years) {
    y.oil_demand = 100;
    y.opec_share = 0.9;
  }
  auto g = new_game(uniform_sheets(bs), sc, {}, 1);
  ProductionAction a;
  a.volume[index(Tier::OilHigh)] = 10;  // 60 units against 3.65 residual
  run_production(g, all(a));
  EXPECT_TRUE(g.current.seats[0].rejected[index(Tier::OilHigh)]);
  EXPECT_EQ(g.current.seats[0].produced[index(Tier::OilHigh)], 0);
  EXPECT_EQ(g.seats[0].sheet[AssetClass::OilDevHigh], 100);
  EXPECT_EQ(g.seats[0].sheet.cash, 10);
}

TEST(Borrowing, CapsAtTwoTimesEquity) {
  BalanceSheet bs;
  bs.cash = 299;
  bs.debt = 199;
  EngineConfig cfg;
  cfg.finance.cost_of_debt_base = 0;
  cfg.finance.cost_of_debt_slope = 0;
  auto g = new_game(uniform_sheets(bs), synthetic_scenario(0, {}), cfg, 1);
  run_production(g, all(ProductionAction{}));
  run_borrowing(g, all(BorrowRequest{50}));
  EXPECT_NEAR(g.current.seats[0].borrowed, 1.0, 1e-12);
  EXPECT_NEAR(g.seats[0].sheet.debt, 200.0, 1e-12);
}

TEST(Borrowing, AtCapGrantsZero) {
  BalanceSheet bs;
  bs.cash = 300;
  bs.debt = 200;
  EngineConfig cfg;
  cfg.finance.cost_of_debt_base = 0;
  cfg.finance.cost_of_debt_slope = 0;
  auto g = new_game(uniform_sheets(bs), synthetic_scenario(0, {}), cfg, 1);
  run_production(g, all(ProductionAction{}));
  run_borrowing(g, all(BorrowRequest{50}));
  EXPECT_EQ(g.current.seats[0].borrowed, 0.0);
}

TEST(Stages, WrongStageThrows) {
  auto g = new_game(default_portfolios(), synthetic_scenario(0, {}), {}, 1);
  try {
    run_trading(g, all(TradingAction{}));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::WrongStage);
  }
  EXPECT_THROW(advance_year(g), Error);
}

TEST(Trading, AuctionFillsAndSettles) {
  auto sc = synthetic_scenario(0, {});
  for (auto& y : sc.years) y.lc_supply = 10;
  auto g = new_game(default_portfolios(), sc, {}, 3);
  run_production(g, all(ProductionAction{}));
  run_borrowing(g, all(BorrowRequest{}));
  auto actions = all(TradingAction{});
  actions[0].bid = {1.2, 6, 0, 0};
  actions[1].bid = {0, 0, 1.1, 8};
  const double lc0 = g.seats[0].sheet[AssetClass::LowCarbon];
  const double lc1 = g.seats[1].sheet[AssetClass::LowCarbon];
  const double debt1 = g.seats[1].sheet.debt;
  const double cash0 = g.seats[0].sheet.cash;
  run_trading(g, actions);
  EXPECT_NEAR(g.seats[0].sheet[AssetClass::LowCarbon] - lc0, 6, 1e-12);
  EXPECT_NEAR(cash0 - g.seats[0].sheet.cash, 7.2, 1e-12);
  EXPECT_NEAR(g.seats[1].sheet[AssetClass::LowCarbon] - lc1, 4, 1e-12);
  EXPECT_NEAR(g.seats[1].sheet.debt - debt1, 4.4, 1e-12);
}

TEST(Trading, InfeasibleCashBidVoided) {
  auto g = new_game(default_portfolios(), synthetic_scenario(0, {}), {}, 3);
  run_production(g, all(ProductionAction{}));
  run_borrowing(g, all(BorrowRequest{}));
  auto actions = all(TradingAction{});
  actions[2].bid = {2.0, 1000, 0, 0};
  actions[3].bid = {1.0, 1, 0, 0};
  run_trading(g, actions);
  EXPECT_EQ(g.current.seats[2].lc_auction_volume, 0);
  EXPECT_EQ(g.current.seats[3].lc_auction_volume, 1);
  ASSERT_EQ(g.current.auction.voided.size(), 2u);
  EXPECT_TRUE(g.current.auction.voided[0]);
}

TEST(Trading, CallMarketConservesCashAndAssets) {
  auto g = new_game(default_portfolios(), synthetic_scenario(0, {}), {}, 4);
  run_production(g, all(ProductionAction{}));
  run_borrowing(g, all(BorrowRequest{}));
  auto actions = all(TradingAction{});
  actions[0].orders[index(AssetClass::OilDevLow)] = {0.2, 5, 0, 0};
  actions[1].orders[index(AssetClass::OilDevLow)] = {0, 0, 0.3, 12};
  actions[2].orders[index(AssetClass::OilDevLow)] = {0.1, 11, 0.1, 13};
  double cash = 0, qty = 0;
  for (const auto& s : g.seats) {
    cash += s.sheet.cash;
    qty += s.sheet[AssetClass::OilDevLow];
  }
  run_trading(g, actions);
  double cash2 = 0, qty2 = 0;
  for (const auto& s : g.seats) {
    cash2 += s.sheet.cash;
    qty2 += s.sheet[AssetClass::OilDevLow];
  }
  EXPECT_NEAR(cash, cash2, 1e-9);
  EXPECT_NEAR(qty, qty2, 1e-12);
  EXPECT_FALSE(g.current.trades.empty());
  // Seat 2 bids highest and takes 0.1 from seat 0 first; seat 1 gets the rest.
  EXPECT_NEAR(g.current.seats[1].bought[index(AssetClass::OilDevLow)], 0.2, 1e-12);
  EXPECT_NEAR(g.current.seats[2].bought[index(AssetClass::OilDevLow)], 0.1, 1e-12);
}

TEST(Allocation, DevelopmentPipeline) {
  EngineConfig cfg;
  cfg.costs[Tier::OilLow].develop = 10;
  BalanceSheet bs;
  bs.cash = 200;
  bs[AssetClass::OilUndevLow] = 50;
  auto g = new_game(uniform_sheets(bs), synthetic_scenario(0, {}), cfg, 1);
  skip_to_allocation(g);
  AllocationAction a;
  a.cash_capex[track_index(TrackKind::Develop, Tier::OilLow)] = 100;
  run_allocation(g, all(a));
  EXPECT_NEAR(g.seats[0].sheet[AssetClass::OilUndevLow], 40, 1e-12);
  advance_year(g);
  EXPECT_EQ(g.seats[0].sheet[AssetClass::OilDevLow], 0);
  null_year(g);
  EXPECT_EQ(g.year, 2022);
  EXPECT_NEAR(g.seats[0].sheet[AssetClass::OilDevLow], 10, 1e-12);
  EXPECT_EQ(g.seats[0].sheet.pipeline_total(track_index(TrackKind::Develop, Tier::OilLow)), 0);
}

TEST(Allocation, ZeroAllocationOnlyRefreshesMetrics) {
  auto g = new_game(default_portfolios(), synthetic_scenario(0, {}), {}, 1);
  skip_to_allocation(g);
  const auto before = g.seats[0].sheet;
  run_allocation(g, all(AllocationAction{}));
  EXPECT_EQ(g.seats[0].sheet, before);
}

TEST(Allocation, DividendsTruncatedToUnleveredCash) {
  BalanceSheet bs;
  bs.cash = 50;
  EngineConfig cfg;
  auto g = new_game(uniform_sheets(bs), synthetic_scenario(0, {}), cfg, 1);
  run_production(g, all(ProductionAction{}));
  run_borrowing(g, all(BorrowRequest{30}));
  run_trading(g, all(TradingAction{}));
  AllocationAction a;
  a.dividends = 80;
  run_allocation(g, all(a));
  EXPECT_NEAR(g.current.seats[0].dividends, 50, 1e-12);
  EXPECT_NEAR(g.seats[0].sheet.cash, 30, 1e-12);
  EXPECT_NEAR(g.seats[0].cumulative_dividends, 50, 1e-12);
}

TEST(Allocation, OverAllocationNamesCategory) {
  auto g = new_game(default_portfolios(), synthetic_scenario(0, {}), {}, 1);
  skip_to_allocation(g);
  auto actions = all(AllocationAction{});
  actions[5].dividends = 1e6;
  try {
    run_allocation(g, actions);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::OverAllocation);
    EXPECT_NE(std::string(e.what()).find("cash"), std::string::npos);
  }
  actions[5] = {};
  actions[5].credit_capex[0] = 1e6;
  try {
    run_allocation(g, actions);
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("credit"), std::string::npos);
  }
}

TEST(Game, RunsToTerminal) {
  auto g = new_game(default_portfolios(), synthetic_scenario(0, {}), {}, 1);
  while (!g.terminal) null_year(g);
  EXPECT_EQ(g.history.size(), static_cast<std::size_t>(kNumYears));
  EXPECT_EQ(g.history.back().year, 2050);
  EXPECT_THROW(run_production(g, all(ProductionAction{})), Error);
}
