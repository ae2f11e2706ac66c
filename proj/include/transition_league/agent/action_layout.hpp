#pragma once

// The frozen 64-dimension action layout. Each raw dimension is squashed to
// [0,1] by clipping (x + 1) / 2 and then scaled against the seat's state at
// the moment its stage executes.

#include <json.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <string>

#include "../engine/types.hpp"

namespace tl {

inline constexpr int kActionLayoutVersion = 1;
inline constexpr std::size_t kActionDim = 64;

using RawAction = std::array<double, kActionDim>;

namespace layout {

inline constexpr std::size_t kProduction = 0;   // 4: fraction of developed reserves per tier
inline constexpr std::size_t kBorrow = 4;       // 1: fraction of credit headroom
inline constexpr std::size_t kAuction = 5;      // 4: cash price, cash volume, credit price, credit volume
inline constexpr std::size_t kTrading = 9;      // 36: per asset sell vol, sell reserve, buy vol, buy limit
inline constexpr std::size_t kCashSplit = 45;   // 11: explore x4, develop x4, payoff, dividends, save
inline constexpr std::size_t kCreditSplit = 56; // 8: credit capex fraction per track
inline constexpr std::size_t kEnd = 64;

inline constexpr std::size_t kTradingStride = 4;
inline constexpr std::size_t kCashWeights = 11;
inline constexpr std::size_t kPayoffWeight = 8;
inline constexpr std::size_t kDividendWeight = 9;
inline constexpr std::size_t kSaveWeight = 10;

static_assert(kEnd == kActionDim);
static_assert(kTrading + kNumTradable * kTradingStride == kCashSplit);
static_assert(kCashSplit + kCashWeights == kCreditSplit);
static_assert(kCreditSplit + kNumTracks == kEnd);

// Price scalars map [0,1] onto [kPriceLo, kPriceHi] times a reference value.
inline constexpr double kPriceLo = 0.5;
inline constexpr double kPriceHi = 2.0;

inline double price_scalar(double u) { return kPriceLo + (kPriceHi - kPriceLo) * u; }

}  // namespace layout

inline double squash(double x) {
  if (std::isnan(x)) return 0.0;
  return std::clamp(0.5 * (x + 1.0), 0.0, 1.0);
}

inline std::array<double, kActionDim> squash_all(const RawAction& raw) {
  std::array<double, kActionDim> u;
  for (std::size_t i = 0; i < kActionDim; ++i) u[i] = squash(raw[i]);
  return u;
}

inline std::string track_name(std::size_t t) {
  const Track tr = track_at(t);
  return std::string(tr.kind == TrackKind::Explore ? "explore_" : "develop_") + std::string(to_string(tr.tier));
}

/// Versioned descriptor: one entry per dimension with its stage, meaning and
/// scaling rule. Consumed by user interfaces to build decision forms.
inline nlohmann::json action_layout_descriptor() {
  using nlohmann::json;
  json dims = json::array();
  auto add = [&](std::string stage, std::string name, std::string scaling) {
    dims.push_back({{"index", dims.size()}, {"stage", stage}, {"name", name}, {"scaling", scaling}});
  };
  for (auto t : kAllTiers)
    add("production", "produce_" + std::string(to_string(t)), "fraction of developed reserves in the tier");
  add("borrowing", "borrow", "fraction of credit headroom at D/E cap 2.0");
  add("trading", "auction_cash_price", "price per unit book value = 0.5 + 1.5u");
  add("trading", "auction_cash_volume", "fraction of min(supply, cash / price)");
  add("trading", "auction_credit_price", "price per unit book value = 0.5 + 1.5u");
  add("trading", "auction_credit_volume", "fraction of min(supply, credit headroom / price)");
  for (auto a : kAllAssets) {
    const std::string n(to_string(a));
    add("trading", n + "_sell_volume", "fraction of holdings");
    add("trading", n + "_sell_reserve", "reference unit value x (0.5 + 1.5u)");
    add("trading", n + "_buy_volume", "weight of remaining cash budget, budgets scaled when weights sum above 1");
    add("trading", n + "_buy_limit", "reference unit value x (0.5 + 1.5u)");
  }
  for (std::size_t t = 0; t < kNumTracks; ++t) add("allocation", "cash_" + track_name(t), "simplex weight over cash");
  add("allocation", "cash_debt_payoff", "simplex weight over cash, capped at debt");
  add("allocation", "cash_dividends", "simplex weight over cash, truncated to unlevered cash");
  add("allocation", "cash_save", "simplex weight over cash");
  for (std::size_t t = 0; t < kNumTracks; ++t)
    add("allocation", "credit_" + track_name(t), "share of allocation credit headroom = u / 8");
  return json{{"version", kActionLayoutVersion},
              {"dimension", kActionDim},
              {"squash", "clip((x+1)/2, 0, 1)"},
              {"stages", {"production", "borrowing", "trading", "allocation"}},
              {"dimensions", dims}};
}

}  // namespace tl
