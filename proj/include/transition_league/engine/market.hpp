#pragma once

// Price formation, balance-sheet valuation, decision metrics, and the two
// clearing mechanisms (low-carbon auction, player call market).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <utility>
#include <vector>

#include "../core/rng.hpp"
#include "../scenario.hpp"
#include "types.hpp"

namespace tl {

// ---------------------------------------------------------------------------
// Prices

/// Residual demand left to players after non-player supply, bn boe/yr.
inline std::pair<double, double> residual_demand(const YearMetrics& m, const PriceConfig& c) {
  const double k = (1.0 - m.opec_share) * c.volume_per_demand_unit;
  return {k * m.oil_demand, k * m.gas_demand};
}

inline double constant_elasticity_price(double ref, double residual, double supply, const PriceConfig& c) {
  const double p = ref * std::pow(residual / std::max(supply, c.supply_epsilon), c.elasticity);
  return std::clamp(p, c.floor, c.cap);
}

inline Prices form_prices(const YearMetrics& m, double player_oil, double player_gas, const PriceConfig& c) {
  auto [r_oil, r_gas] = residual_demand(m, c);
  return {constant_elasticity_price(c.oil_ref, r_oil, player_oil, c),
          constant_elasticity_price(c.gas_ref(), r_gas, player_gas, c)};
}

/// After-tax cash margin of producing `volume` at `price`; a tier never
/// produces a negative margin.
inline double production_margin(double price, double lift, double volume, double tax_rate) {
  return volume * std::max(price - lift, 0.0) * (1.0 - tax_rate);
}

// ---------------------------------------------------------------------------
// Valuation

/// A reserve tier counts toward equity only while its commodity price covers
/// the tier's lifting cost.
inline bool tier_in_the_money(Tier t, const Prices& p, const CapitalCosts& costs) {
  return p.for_tier(t) >= costs[t].lift;
}

/// Value of one pipeline track's queued quantity at book cost.
inline double pipeline_unit_value(Track tr, const CapitalCosts& costs) {
  return costs.unit_value(track_output(tr));
}

struct HoldingsValue {
  double oil = 0;
  double gas = 0;
  double low_carbon = 0;

  double hydrocarbon() const { return oil + gas; }
};

/// Book value of reserves (on hand and in the pipeline) and low-carbon assets
/// under the year's price-inclusion rule.
inline HoldingsValue value_holdings(const BalanceSheet& bs, const Prices& p, const CapitalCosts& costs,
                                    bool apply_price_rule = true) {
  HoldingsValue v;
  for (auto a : kAllAssets) {
    auto t = tier_of(a);
    if (!t) continue;
    if (apply_price_rule && !tier_in_the_money(*t, p, costs)) continue;
    (is_oil(*t) ? v.oil : v.gas) += bs[a] * costs.unit_value(a);
  }
  for (std::size_t i = 0; i < kNumTracks; ++i) {
    const Track tr = track_at(i);
    if (apply_price_rule && !tier_in_the_money(tr.tier, p, costs)) continue;
    (is_oil(tr.tier) ? v.oil : v.gas) += bs.pipeline_total(i) * pipeline_unit_value(tr, costs);
  }
  v.low_carbon = bs[AssetClass::LowCarbon];
  return v;
}

inline double equity(const BalanceSheet& bs, const Prices& p, const CapitalCosts& costs) {
  const auto v = value_holdings(bs, p, costs);
  return bs.cash + v.hydrocarbon() + v.low_carbon - bs.debt;
}

inline double debt_to_equity(double debt, double eq) {
  if (debt <= 0.0) return 0.0;
  if (eq <= 0.0) return std::numeric_limits<double>::infinity();
  return debt / eq;
}

/// Largest extra debt x such that the post-draw ratio stays within the cap,
/// for a draw that adds `value_per_cost` of valued assets per unit borrowed.
/// Zero unless the pre-draw ratio is strictly below the cap.
inline double credit_headroom(double eq, double debt, const FinanceConfig& f, double value_per_cost = 1.0) {
  if (eq <= 0.0) return 0.0;
  if (debt_to_equity(debt, eq) >= f.max_debt_to_equity) return 0.0;
  const double slack = f.max_debt_to_equity * eq - debt;
  const double coef = 1.0 + f.max_debt_to_equity * (1.0 - value_per_cost);
  if (coef <= 0.0) return std::numeric_limits<double>::infinity();
  return std::max(slack / coef, 0.0);
}

inline double cost_of_debt(double de_ratio, const FinanceConfig& f) {
  if (!std::isfinite(de_ratio)) return f.cost_of_debt_cap;
  return std::min(f.cost_of_debt_base + f.cost_of_debt_slope * std::max(de_ratio, 0.0), f.cost_of_debt_cap);
}

inline double capm_cost_of_equity(const FinanceConfig& f) { return f.risk_free + f.beta * f.equity_risk_premium; }

inline DecisionMetrics compute_metrics(const BalanceSheet& bs, const Prices& p, const EngineConfig& cfg,
                                       double net_income, double cumulative_dividends) {
  DecisionMetrics m;
  m.equity = equity(bs, p, cfg.costs);
  m.debt_to_equity = debt_to_equity(bs.debt, m.equity);
  m.cost_of_debt = cost_of_debt(m.debt_to_equity, cfg.finance);
  m.cost_of_equity = capm_cost_of_equity(cfg.finance);
  const double e = std::max(m.equity, 0.0);
  const double d = bs.debt;
  const double kd_after_tax = m.cost_of_debt * (1.0 - cfg.finance.tax_rate);
  if (d <= 0.0)
    m.cost_of_capital = m.cost_of_equity;
  else if (e <= 0.0)
    m.cost_of_capital = kd_after_tax;
  else
    m.cost_of_capital = (e * m.cost_of_equity + d * kd_after_tax) / (e + d);
  m.net_income = net_income;
  m.cumulative_dividends = cumulative_dividends;
  return m;
}

// ---------------------------------------------------------------------------
// Low-carbon sealed-bid auction

enum class Funding : std::uint8_t { Cash, Credit };

struct BidLine {
  std::size_t seat = 0;
  Funding funding = Funding::Cash;
  double price = 0;   // $ paid per $ of low-carbon book value
  double volume = 0;  // $bn of book value requested

  bool operator==(const BidLine&) const = default;
};

struct AuctionResult {
  double supply = 0;
  std::vector<BidLine> lines;
  std::vector<double> fills;         // per line
  std::vector<std::uint32_t> priority;  // line indices in fill order
  std::vector<bool> voided;

  double filled_total() const { return std::accumulate(fills.begin(), fills.end(), 0.0); }
};

/// Greedy pay-as-bid clearing: lines are ranked by price descending, ties by
/// `tie_rank` ascending, and filled until supply runs out.
inline AuctionResult clear_auction(double supply, std::span<const BidLine> lines,
                                   std::span<const std::uint32_t> tie_rank) {
  AuctionResult r;
  r.supply = supply;
  r.lines.assign(lines.begin(), lines.end());
  r.fills.assign(lines.size(), 0.0);
  r.voided.assign(lines.size(), false);
  r.priority.resize(lines.size());
  std::iota(r.priority.begin(), r.priority.end(), 0u);
  std::sort(r.priority.begin(), r.priority.end(), [&](std::uint32_t a, std::uint32_t b) {
    if (lines[a].price != lines[b].price) return lines[a].price > lines[b].price;
    return tie_rank[a] < tie_rank[b];
  });
  double remaining = std::max(supply, 0.0);
  for (auto i : r.priority) {
    if (lines[i].volume <= 0.0 || lines[i].price <= 0.0) continue;
    const double f = std::min(lines[i].volume, remaining);
    r.fills[i] = f;
    remaining -= f;
  }
  return r;
}

/// A uniformly random tie-break ranking of n lines.
inline std::vector<std::uint32_t> lottery_ranks(std::size_t n, Rng& rng) {
  std::vector<std::uint32_t> rank(n);
  std::iota(rank.begin(), rank.end(), 0u);
  std::shuffle(rank.begin(), rank.end(), rng);
  return rank;
}

// ---------------------------------------------------------------------------
// Player-to-player call market

struct Order {
  std::size_t seat = 0;
  double volume = 0;
  double price = 0;  // reserve for sells, limit for buys

  bool operator==(const Order&) const = default;
};

struct Trade {
  AssetClass asset = AssetClass::LowCarbon;
  std::size_t buyer = 0;
  std::size_t seller = 0;
  double volume = 0;
  double price = 0;

  bool operator==(const Trade&) const = default;
};

/// Clears one asset's book. Buys are served by descending limit and sells
/// offered by ascending reserve (ties by rank); a pair crosses while the limit
/// covers the reserve and trades at the midpoint. Self-trades are skipped.
inline std::vector<Trade> clear_call_market(AssetClass asset, std::span<const Order> sells,
                                            std::span<const Order> buys, std::span<const std::uint32_t> sell_rank,
                                            std::span<const std::uint32_t> buy_rank) {
  std::vector<std::uint32_t> so(sells.size()), bo(buys.size());
  std::iota(so.begin(), so.end(), 0u);
  std::iota(bo.begin(), bo.end(), 0u);
  std::sort(so.begin(), so.end(), [&](auto a, auto b) {
    return sells[a].price != sells[b].price ? sells[a].price < sells[b].price : sell_rank[a] < sell_rank[b];
  });
  std::sort(bo.begin(), bo.end(), [&](auto a, auto b) {
    return buys[a].price != buys[b].price ? buys[a].price > buys[b].price : buy_rank[a] < buy_rank[b];
  });
  std::vector<double> sell_left(sells.size());
  for (std::size_t i = 0; i < sells.size(); ++i) sell_left[i] = std::max(sells[i].volume, 0.0);

  std::vector<Trade> trades;
  for (auto b : bo) {
    double want = std::max(buys[b].volume, 0.0);
    for (auto s : so) {
      if (want <= 0.0) break;
      if (sells[s].price > buys[b].price) break;
      if (sells[s].seat == buys[b].seat || sell_left[s] <= 0.0) continue;
      const double q = std::min(want, sell_left[s]);
      trades.push_back({asset, buys[b].seat, sells[s].seat, q, 0.5 * (buys[b].price + sells[s].price)});
      want -= q;
      sell_left[s] -= q;
    }
  }
  return trades;
}

}  // namespace tl
