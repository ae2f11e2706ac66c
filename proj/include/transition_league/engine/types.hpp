#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <string_view>

namespace tl {

inline constexpr std::size_t kNumSeats = 6;

// Cost tiers: two oil and two gas lifting-cost tiers.
enum class Tier : std::uint8_t { OilLow, OilHigh, GasLow, GasHigh };
inline constexpr std::size_t kNumTiers = 4;
inline constexpr std::array<Tier, kNumTiers> kAllTiers = {Tier::OilLow, Tier::OilHigh, Tier::GasLow, Tier::GasHigh};

constexpr bool is_oil(Tier t) { return t == Tier::OilLow || t == Tier::OilHigh; }

constexpr std::string_view to_string(Tier t) {
  switch (t) {
    case Tier::OilLow: return "OilLow";
    case Tier::OilHigh: return "OilHigh";
    case Tier::GasLow: return "GasLow";
    case Tier::GasHigh: return "GasHigh";
  }
  return "?";
}

enum class AssetClass : std::uint8_t {
  OilDevLow,
  OilDevHigh,
  OilUndevLow,
  OilUndevHigh,
  GasDevLow,
  GasDevHigh,
  GasUndevLow,
  GasUndevHigh,
  LowCarbon,
};
inline constexpr std::size_t kNumTradable = 9;
// Tradable assets plus cash and debt.
inline constexpr std::size_t kNumOnHand = 11;

inline constexpr std::array<AssetClass, kNumTradable> kAllAssets = {
    AssetClass::OilDevLow,   AssetClass::OilDevHigh,   AssetClass::OilUndevLow,
    AssetClass::OilUndevHigh, AssetClass::GasDevLow,   AssetClass::GasDevHigh,
    AssetClass::GasUndevLow, AssetClass::GasUndevHigh, AssetClass::LowCarbon};

constexpr std::size_t index(AssetClass a) { return static_cast<std::size_t>(a); }
constexpr std::size_t index(Tier t) { return static_cast<std::size_t>(t); }

constexpr std::string_view to_string(AssetClass a) {
  switch (a) {
    case AssetClass::OilDevLow: return "OilDevLow";
    case AssetClass::OilDevHigh: return "OilDevHigh";
    case AssetClass::OilUndevLow: return "OilUndevLow";
    case AssetClass::OilUndevHigh: return "OilUndevHigh";
    case AssetClass::GasDevLow: return "GasDevLow";
    case AssetClass::GasDevHigh: return "GasDevHigh";
    case AssetClass::GasUndevLow: return "GasUndevLow";
    case AssetClass::GasUndevHigh: return "GasUndevHigh";
    case AssetClass::LowCarbon: return "LowCarbon";
  }
  return "?";
}

inline std::optional<AssetClass> parse_asset(std::string_view s) {
  for (auto a : kAllAssets)
    if (to_string(a) == s) return a;
  return std::nullopt;
}

constexpr AssetClass developed(Tier t) {
  constexpr std::array<AssetClass, kNumTiers> m = {AssetClass::OilDevLow, AssetClass::OilDevHigh,
                                                   AssetClass::GasDevLow, AssetClass::GasDevHigh};
  return m[index(t)];
}
constexpr AssetClass undeveloped(Tier t) {
  constexpr std::array<AssetClass, kNumTiers> m = {AssetClass::OilUndevLow, AssetClass::OilUndevHigh,
                                                   AssetClass::GasUndevLow, AssetClass::GasUndevHigh};
  return m[index(t)];
}
constexpr std::optional<Tier> tier_of(AssetClass a) {
  switch (a) {
    case AssetClass::OilDevLow:
    case AssetClass::OilUndevLow: return Tier::OilLow;
    case AssetClass::OilDevHigh:
    case AssetClass::OilUndevHigh: return Tier::OilHigh;
    case AssetClass::GasDevLow:
    case AssetClass::GasUndevLow: return Tier::GasLow;
    case AssetClass::GasDevHigh:
    case AssetClass::GasUndevHigh: return Tier::GasHigh;
    case AssetClass::LowCarbon: return std::nullopt;
  }
  return std::nullopt;
}
constexpr bool is_developed(AssetClass a) {
  return a == AssetClass::OilDevLow || a == AssetClass::OilDevHigh || a == AssetClass::GasDevLow ||
         a == AssetClass::GasDevHigh;
}

// Pipeline tracks: exploration (cash -> undeveloped) and development
// (undeveloped -> developed) for each tier. Each track has one slot per
// in-flight year, giving 8 x 2 = 16 pipeline assets.
enum class TrackKind : std::uint8_t { Explore, Develop };
inline constexpr std::size_t kNumTracks = 8;
inline constexpr int kPipelineLead = 2;
inline constexpr std::size_t kPipelineSlots = kNumTracks * kPipelineLead;

struct Track {
  TrackKind kind;
  Tier tier;
};

constexpr Track track_at(std::size_t i) {
  return Track{i < kNumTiers ? TrackKind::Explore : TrackKind::Develop, kAllTiers[i % kNumTiers]};
}
constexpr std::size_t track_index(TrackKind k, Tier t) {
  return (k == TrackKind::Explore ? 0 : kNumTiers) + index(t);
}
constexpr AssetClass track_output(Track tr) {
  return tr.kind == TrackKind::Explore ? undeveloped(tr.tier) : developed(tr.tier);
}

struct PipelineSlot {
  double quantity = 0;
  int due_year = 0;  // 0 when empty

  bool operator==(const PipelineSlot&) const = default;
};

struct BalanceSheet {
  double cash = 0;
  double debt = 0;
  std::array<double, kNumTradable> holdings{};  // reserves in bn boe, low-carbon in $bn book value
  std::array<std::array<PipelineSlot, kPipelineLead>, kNumTracks> pipeline{};

  double& operator[](AssetClass a) { return holdings[index(a)]; }
  double operator[](AssetClass a) const { return holdings[index(a)]; }

  double pipeline_total(std::size_t track) const {
    double s = 0;
    for (const auto& slot : pipeline[track]) s += slot.quantity;
    return s;
  }

  bool operator==(const BalanceSheet&) const = default;
};

/// True when every quantity is finite and non-negative.
inline bool valid(const BalanceSheet& bs) {
  auto ok = [](double v) { return std::isfinite(v) && v >= 0.0; };
  if (!ok(bs.cash) || !ok(bs.debt)) return false;
  for (double h : bs.holdings)
    if (!ok(h)) return false;
  for (const auto& track : bs.pipeline)
    for (const auto& slot : track)
      if (!ok(slot.quantity)) return false;
  return true;
}

struct TierCosts {
  double explore = 0;  // $/boe
  double develop = 0;  // $/boe
  double lift = 0;     // $/boe

  bool operator==(const TierCosts&) const = default;
};

struct CapitalCosts {
  std::array<TierCosts, kNumTiers> tiers{{
      {3.0, 7.0, 20.0},   // OilLow
      {4.0, 14.0, 40.0},  // OilHigh
      {2.0, 5.0, 12.0},   // GasLow
      {3.0, 9.0, 24.0},   // GasHigh
  }};

  const TierCosts& operator[](Tier t) const { return tiers[index(t)]; }
  TierCosts& operator[](Tier t) { return tiers[index(t)]; }

  /// Per-unit book value: exploration cost for undeveloped reserves,
  /// exploration plus development cost for developed reserves.
  double unit_value(AssetClass a) const {
    auto t = tier_of(a);
    if (!t) return 1.0;
    const auto& c = (*this)[*t];
    return is_developed(a) ? c.explore + c.develop : c.explore;
  }

  bool valid() const {
    for (const auto& c : tiers)
      if (!(c.explore > 0 && c.develop > 0 && c.lift > 0)) return false;
    return (*this)[Tier::OilLow].lift < (*this)[Tier::OilHigh].lift &&
           (*this)[Tier::GasLow].lift < (*this)[Tier::GasHigh].lift;
  }

  bool operator==(const CapitalCosts&) const = default;
};

struct PriceConfig {
  double oil_ref = 60.0;        // $/bbl at balanced market
  double gas_oil_ratio = 0.6;   // gas reference price as a fraction of oil
  double elasticity = 1.0;
  double floor = 5.0;
  double cap = 250.0;
  double supply_epsilon = 1e-6;
  double volume_per_demand_unit = 0.365;  // bn boe/yr per Mb/d

  double gas_ref() const { return oil_ref * gas_oil_ratio; }

  bool operator==(const PriceConfig&) const = default;
};

struct FinanceConfig {
  double tax_rate = 0.24;
  double max_debt_to_equity = 2.0;
  double cost_of_debt_base = 0.04;
  double cost_of_debt_slope = 0.02;
  double cost_of_debt_cap = 0.25;
  double risk_free = 0.02;
  double beta = 1.1;
  double equity_risk_premium = 0.05;

  bool operator==(const FinanceConfig&) const = default;
};

struct EngineConfig {
  CapitalCosts costs;
  PriceConfig prices;
  FinanceConfig finance;
  double portfolio_value_tolerance = 1e-3;  // relative
  bool check_accounting = true;

  bool operator==(const EngineConfig&) const = default;
};

struct Prices {
  double oil = 0;
  double gas = 0;

  double for_tier(Tier t) const { return is_oil(t) ? oil : gas; }

  bool operator==(const Prices&) const = default;
};

inline Prices reference_prices(const PriceConfig& c) { return {c.oil_ref, c.gas_ref()}; }

struct DecisionMetrics {
  double equity = 0;
  double debt_to_equity = 0;  // +inf when equity <= 0 and debt > 0
  double cost_of_debt = 0;
  double cost_of_equity = 0;
  double cost_of_capital = 0;
  double net_income = 0;
  double cumulative_dividends = 0;

  bool operator==(const DecisionMetrics&) const = default;
};

inline constexpr std::size_t kNumDecisionMetrics = 7;

}  // namespace tl
