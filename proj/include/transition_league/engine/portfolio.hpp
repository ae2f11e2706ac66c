#pragma once

#include <array>
#include <optional>
#include <string_view>

#include "market.hpp"
#include "types.hpp"

namespace tl {

enum class PortfolioVariant : std::uint8_t { OilLC, GasLC, LC, Oil, Gas, Balanced, OilDominant };

inline constexpr std::array<PortfolioVariant, 6> kMainVariants = {
    PortfolioVariant::OilLC, PortfolioVariant::GasLC, PortfolioVariant::LC,
    PortfolioVariant::Oil,   PortfolioVariant::Gas,   PortfolioVariant::Balanced};

constexpr std::string_view to_string(PortfolioVariant v) {
  switch (v) {
    case PortfolioVariant::OilLC: return "Oil-LC";
    case PortfolioVariant::GasLC: return "Gas-LC";
    case PortfolioVariant::LC: return "LC";
    case PortfolioVariant::Oil: return "Oil";
    case PortfolioVariant::Gas: return "Gas";
    case PortfolioVariant::Balanced: return "Balanced";
    case PortfolioVariant::OilDominant: return "Oil-Dominant";
  }
  return "?";
}

inline std::optional<PortfolioVariant> parse_variant(std::string_view s) {
  for (auto v : {PortfolioVariant::OilLC, PortfolioVariant::GasLC, PortfolioVariant::LC, PortfolioVariant::Oil,
                 PortfolioVariant::Gas, PortfolioVariant::Balanced, PortfolioVariant::OilDominant})
    if (to_string(v) == s) return v;
  return std::nullopt;
}

struct PortfolioConfig {
  double equity = 100.0;             // $bn, identical for every seat
  double debt = 10.0;                // $bn
  double cash_fraction = 0.2;        // of total assets
  double developed_fraction = 0.6;   // of each hydrocarbon market's value
  double low_tier_share = 0.5;       // of each developed/undeveloped block
  double skew = 0.5;                 // share of non-cash value moved into the named market(s)
  double dominant_share = 0.7;       // oil share for the exploiters' oil-dominant book

  bool operator==(const PortfolioConfig&) const = default;
};

/// Non-cash value shares (oil, gas, low-carbon) for a variant.
inline std::array<double, 3> market_shares(PortfolioVariant v, const PortfolioConfig& c) {
  const double even = (1.0 - c.skew) / 3.0;
  switch (v) {
    case PortfolioVariant::Oil: return {even + c.skew, even, even};
    case PortfolioVariant::Gas: return {even, even + c.skew, even};
    case PortfolioVariant::LC: return {even, even, even + c.skew};
    case PortfolioVariant::OilLC: return {even + c.skew / 2, even, even + c.skew / 2};
    case PortfolioVariant::GasLC: return {even, even + c.skew / 2, even + c.skew / 2};
    case PortfolioVariant::Balanced: return {1.0 / 3, 1.0 / 3, 1.0 / 3};
    case PortfolioVariant::OilDominant: {
      const double rest = (1.0 - c.dominant_share) / 2.0;
      return {c.dominant_share, rest, rest};
    }
  }
  return {1.0 / 3, 1.0 / 3, 1.0 / 3};
}

/// Builds an initial balance sheet whose equity at reference prices equals
/// `c.equity` for every variant.
inline BalanceSheet make_portfolio(PortfolioVariant v, const PortfolioConfig& c, const CapitalCosts& costs) {
  BalanceSheet bs;
  const double assets = c.equity + c.debt;
  bs.debt = c.debt;
  bs.cash = c.cash_fraction * assets;
  const double non_cash = assets - bs.cash;
  const auto shares = market_shares(v, c);
  auto fill = [&](double value, Tier low, Tier high) {
    const double dev = value * c.developed_fraction;
    const double undev = value - dev;
    bs[developed(low)] = dev * c.low_tier_share / costs.unit_value(developed(low));
    bs[developed(high)] = dev * (1 - c.low_tier_share) / costs.unit_value(developed(high));
    bs[undeveloped(low)] = undev * c.low_tier_share / costs.unit_value(undeveloped(low));
    bs[undeveloped(high)] = undev * (1 - c.low_tier_share) / costs.unit_value(undeveloped(high));
  };
  fill(non_cash * shares[0], Tier::OilLow, Tier::OilHigh);
  fill(non_cash * shares[1], Tier::GasLow, Tier::GasHigh);
  bs[AssetClass::LowCarbon] = non_cash * shares[2];
  return bs;
}

}  // namespace tl
