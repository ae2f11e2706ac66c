#pragma once

// Raw action -> feasible stage actions. Every decoder reads the state at the
// moment its stage executes, so its output always passes the engine checks.

#include <algorithm>
#include <array>
#include <cmath>

#include "../engine/game.hpp"
#include "action_layout.hpp"
#include "constraint.hpp"

namespace tl {

using Unit = std::array<double, kActionDim>;  // squashed action in [0,1]^64

namespace decode_detail {

// Requests are scaled just under their bound so rounding cannot cross it.
inline constexpr double kShrink = 1.0 - 1e-9;

inline double ref_unit_value(AssetClass a, const CapitalCosts& costs) { return costs.unit_value(a); }

}  // namespace decode_detail

inline ProductionAction decode_production(const Unit& u, const GameState& s, std::size_t seat) {
  ProductionAction a;
  for (auto t : kAllTiers)
    a.volume[index(t)] = u[layout::kProduction + index(t)] * s.seats[seat].sheet[developed(t)];
  return a;
}

inline BorrowRequest decode_borrow(const Unit& u, const GameState& s, std::size_t seat) {
  const auto& sheet = s.seats[seat].sheet;
  const double headroom = credit_headroom(current_equity(s, seat), sheet.debt, s.config.finance);
  return {u[layout::kBorrow] * headroom * decode_detail::kShrink};
}

inline TradingAction decode_trading(const Unit& u, const GameState& s, std::size_t seat,
                                    const ConstraintProfile& constraint = {}) {
  using namespace decode_detail;
  TradingAction a;
  const auto& sheet = s.seats[seat].sheet;
  const double supply = std::max(s.metrics_now().lc_supply, 0.0);

  auto& bid = a.bid;
  bid.cash_price = layout::price_scalar(u[layout::kAuction + 0]);
  bid.cash_volume = u[layout::kAuction + 1] * std::min(supply, sheet.cash / bid.cash_price) * kShrink;
  bid.credit_price = layout::price_scalar(u[layout::kAuction + 2]);
  const double credit =
      auction_credit_headroom(s, seat, bid.cash_price, bid.cash_volume, bid.credit_price) / bid.credit_price;
  bid.credit_volume = u[layout::kAuction + 3] * std::min(supply, credit) * kShrink;

  const double budget = std::max(sheet.cash - bid.cash_price * bid.cash_volume, 0.0);
  double weight_sum = 0;
  for (std::size_t k = 0; k < kNumTradable; ++k)
    weight_sum += u[layout::kTrading + k * layout::kTradingStride + 2];
  const double norm = std::max(1.0, weight_sum);
  for (auto asset : kAllAssets) {
    const std::size_t base = layout::kTrading + index(asset) * layout::kTradingStride;
    const double ref = ref_unit_value(asset, s.config.costs);
    auto& o = a.orders[index(asset)];
    o.sell_volume = u[base + 0] * sheet[asset];
    o.sell_price = ref * layout::price_scalar(u[base + 1]);
    o.buy_price = ref * layout::price_scalar(u[base + 3]);
    o.buy_volume = budget * (u[base + 2] / norm) / o.buy_price * kShrink;
    if (o.sell_volume <= 0.0) o.sell_price = 0.0;
    if (o.buy_volume <= 0.0) o.buy_price = 0.0;
  }
  if (bid.cash_volume <= 0.0) bid.cash_price = 0.0;
  if (bid.credit_volume <= 0.0) bid.credit_price = 0.0;
  return apply_constraint(a, constraint, s.year);
}

inline AllocationAction decode_allocation(const Unit& u, const GameState& s, std::size_t seat) {
  using namespace decode_detail;
  AllocationAction a;
  const auto& sheet = s.seats[seat].sheet;
  const auto& costs = s.config.costs;
  const double cash = std::max(sheet.cash, 0.0) * kShrink;

  double wsum = 0;
  for (std::size_t k = 0; k < layout::kCashWeights; ++k) wsum += u[layout::kCashSplit + k];
  auto share = [&](std::size_t k) { return wsum > 0.0 ? cash * u[layout::kCashSplit + k] / wsum : 0.0; };

  std::array<double, kNumTiers> dev_room{};  // remaining development spend capacity per tier
  for (auto t : kAllTiers) dev_room[index(t)] = sheet[undeveloped(t)] * costs[t].develop * kShrink;
  for (std::size_t t = 0; t < kNumTracks; ++t) {
    double spend = share(t);
    const Track tr = track_at(t);
    if (tr.kind == TrackKind::Develop) {
      spend = std::min(spend, dev_room[index(tr.tier)]);
      dev_room[index(tr.tier)] -= spend;
    }
    a.cash_capex[t] = spend;
  }
  a.debt_payoff = std::min(share(layout::kPayoffWeight), sheet.debt);
  a.dividends = share(layout::kDividendWeight);

  // Credit: each track may take up to 1/8 of the headroom left after the
  // cash side.
  std::array<double, kNumTracks> frac{};
  double fsum = 0;
  for (std::size_t t = 0; t < kNumTracks; ++t) fsum += frac[t] = u[layout::kCreditSplit + t] / kNumTracks;
  if (fsum <= 0.0) return a;
  double loss = 0, total = 0;
  for (std::size_t t = 0; t < kNumTracks; ++t) {
    total += frac[t];
    if (!tier_in_the_money(track_at(t).tier, s.prices, costs)) loss += frac[t];
  }
  const AllocationPlan plan = resolve_allocation_cash(s.seats[seat], a);
  const double headroom = allocation_credit_headroom(s, seat, a, plan, 1.0 - loss / total);
  if (!(headroom > 0.0) || !std::isfinite(headroom)) return a;
  for (std::size_t t = 0; t < kNumTracks; ++t) {
    double spend = frac[t] * headroom * kShrink;
    const Track tr = track_at(t);
    if (tr.kind == TrackKind::Develop) {
      spend = std::min(spend, dev_room[index(tr.tier)]);
      dev_room[index(tr.tier)] -= spend;
    }
    a.credit_capex[t] = spend;
  }
  return a;
}

/// Decodes every stage against one fixed state; used for diagnostics and the
/// action-form preview. Game play decodes stage by stage.
inline StagedActions decode_action(const RawAction& raw, const GameState& s, std::size_t seat,
                                   const ConstraintProfile& constraint = {}) {
  const Unit u = squash_all(raw);
  return {decode_production(u, s, seat), decode_borrow(u, s, seat), decode_trading(u, s, seat, constraint),
          decode_allocation(u, s, seat)};
}

}  // namespace tl
