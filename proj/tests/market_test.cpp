#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "transition_league/engine/market.hpp"

using namespace tl;

namespace {

YearMetrics metrics(double oil, double gas, double opec) {
  YearMetrics m;
  m.oil_demand = oil;
  m.gas_demand = gas;
  m.opec_share = opec;
  m.lc_roi = 0.05;
  m.lc_supply = 10;
  return m;
}

}  // namespace

TEST(Prices, BalancedMarketGivesReference) {
  PriceConfig c;
  auto m = metrics(100, 60, 0.9);
  auto [ro, rg] = residual_demand(m, c);
  EXPECT_NEAR(ro, 0.1 * 100 * 0.365, 1e-12);
  auto p = form_prices(m, ro, rg, c);
  EXPECT_NEAR(p.oil, 60.0, 1e-12);
  EXPECT_NEAR(p.gas, 36.0, 1e-12);
}

TEST(Prices, DoubleSupplyHalvesPrice) {
  PriceConfig c;
  EXPECT_NEAR(constant_elasticity_price(60, 10, 20, c), 30.0, 1e-12);
}

TEST(Prices, ClampedToFloorAndCap) {
  PriceConfig c;
  EXPECT_EQ(constant_elasticity_price(60, 10, 0, c), 250.0);
  EXPECT_EQ(constant_elasticity_price(60, 1, 1000, c), 5.0);
}

TEST(Prices, MonotoneSweeps) {
  PriceConfig c;
  double prev = INFINITY;
  for (double opec = 0.05; opec < 0.95; opec += 0.05) {
    double p = form_prices(metrics(100, 60, opec), 30, 2, c).oil;
    EXPECT_LT(p, prev);
    prev = p;
  }
  prev = INFINITY;
  for (double s = 0.5; s < 20; s += 0.5) {
    double p = form_prices(metrics(100, 60, 0.9), s, 2, c).oil;
    EXPECT_LE(p, prev);
    prev = p;
  }
  prev = 0;
  for (double d = 20; d < 200; d += 10) {
    double p = form_prices(metrics(d, 60, 0.9), 3, 2, c).oil;
    EXPECT_GE(p, prev);
    prev = p;
  }
}

TEST(Production, MarginArithmetic) {
  EXPECT_NEAR(production_margin(50, 40, 10, 0.24), 76.0, 1e-12);
  EXPECT_EQ(production_margin(35, 40, 10, 0.24), 0.0);
}

TEST(Metrics, CapmCostOfEquity) {
  FinanceConfig f;
  EXPECT_NEAR(capm_cost_of_equity(f), 0.075, 1e-15);
}

TEST(Metrics, ZeroDebtWaccIsCostOfEquity) {
  BalanceSheet bs;
  bs.cash = 50;
  EngineConfig cfg;
  auto m = compute_metrics(bs, reference_prices(cfg.prices), cfg, 0, 0);
  EXPECT_EQ(m.cost_of_capital, m.cost_of_equity);
  EXPECT_EQ(m.debt_to_equity, 0.0);
}

TEST(Metrics, WaccBetweenLegs) {
  BalanceSheet bs;
  bs.cash = 50;
  bs.debt = 30;
  EngineConfig cfg;
  auto m = compute_metrics(bs, reference_prices(cfg.prices), cfg, 0, 0);
  const double kd = m.cost_of_debt * (1 - cfg.finance.tax_rate);
  EXPECT_GT(m.cost_of_capital, std::min(kd, m.cost_of_equity));
  EXPECT_LT(m.cost_of_capital, std::max(kd, m.cost_of_equity));
  EXPECT_NEAR(m.cost_of_debt, 0.04 + 0.02 * 1.5, 1e-15);
}

TEST(Metrics, HighTierExcludedBelowLift) {
  CapitalCosts costs;
  BalanceSheet bs;
  bs[AssetClass::OilDevHigh] = 10;
  bs[AssetClass::OilDevLow] = 1;
  Prices p{39, 36};
  EXPECT_NEAR(equity(bs, p, costs), costs.unit_value(AssetClass::OilDevLow), 1e-12);
  p.oil = 40;
  EXPECT_NEAR(equity(bs, p, costs), 10 * 18 + 10, 1e-12);
}

TEST(Credit, HeadroomSolvesCap) {
  FinanceConfig f;
  EXPECT_NEAR(credit_headroom(100, 199, f), 1.0, 1e-12);
  EXPECT_EQ(credit_headroom(100, 200, f), 0.0);
  EXPECT_EQ(credit_headroom(0, 0, f), 0.0);
}

TEST(Auction, GreedyExample) {
  std::vector<BidLine> lines = {{0, Funding::Cash, 2.0, 80}, {1, Funding::Cash, 1.5, 50}};
  std::vector<std::uint32_t> rank = {0, 1};
  auto r = clear_auction(100, lines, rank);
  EXPECT_EQ(r.fills[0], 80);
  EXPECT_EQ(r.fills[1], 20);
}

TEST(Auction, TieFollowsRank) {
  std::vector<BidLine> lines = {{0, Funding::Cash, 1.0, 50}, {1, Funding::Cash, 1.0, 50}};
  auto a = clear_auction(50, lines, std::vector<std::uint32_t>{1, 0});
  EXPECT_EQ(a.fills[0], 0);
  EXPECT_EQ(a.fills[1], 50);
  Rng r1(9), r2(9);
  EXPECT_EQ(lottery_ranks(12, r1), lottery_ranks(12, r2));
}

TEST(CallMarket, MidpointExample) {
  std::vector<Order> sells = {{0, 5, 10}};
  std::vector<Order> buys = {{1, 5, 14}};
  std::vector<std::uint32_t> r = {0};
  auto t = clear_call_market(AssetClass::OilDevLow, sells, buys, r, r);
  ASSERT_EQ(t.size(), 1u);
  EXPECT_EQ(t[0].volume, 5);
  EXPECT_EQ(t[0].price, 12);
}

TEST(CallMarket, NoCounterpartyNoTrades) {
  std::vector<Order> buys = {{1, 5, 14}};
  std::vector<std::uint32_t> r = {0};
  EXPECT_TRUE(clear_call_market(AssetClass::LowCarbon, {}, buys, {}, r).empty());
}

TEST(CallMarket, SelfTradeSkipped) {
  std::vector<Order> sells = {{2, 5, 10}, {3, 5, 12}};
  std::vector<Order> buys = {{2, 5, 14}};
  std::vector<std::uint32_t> r = {0, 1};
  auto t = clear_call_market(AssetClass::LowCarbon, sells, buys, r, std::vector<std::uint32_t>{0});
  ASSERT_EQ(t.size(), 1u);
  EXPECT_EQ(t[0].seller, 3u);
  EXPECT_EQ(t[0].price, 13);
}
