#pragma once

// Per-seat game analytics: capital allocation by market, strategy labels,
// dividend shares and the low-carbon transition year.

#include <array>
#include <optional>
#include <string>

#include "../agent/constraint.hpp"
#include "../engine/game_log.hpp"
#include "../engine/market.hpp"

namespace tl {

enum class Market { Oil, Gas, LowCarbon };
inline constexpr std::size_t kNumMarkets = 3;

enum class Movement { Early, MidTerm, Late, None };

constexpr std::string_view to_string(Market m) {
  switch (m) {
    case Market::Oil: return "O";
    case Market::Gas: return "G";
    case Market::LowCarbon: return "LC";
  }
  return "?";
}

constexpr std::string_view to_string(Movement m) {
  switch (m) {
    case Movement::Early: return "E";
    case Movement::MidTerm: return "M";
    case Movement::Late: return "L";
    case Movement::None: return "N";
  }
  return "?";
}

/// Capital a seat committed to each market in one year: pipeline capex (cash
/// and credit), asset purchases and low-carbon auction payments.
inline std::array<double, kNumMarkets> capex_by_market(const SeatYear& y) {
  std::array<double, kNumMarkets> c{};
  for (std::size_t t = 0; t < kNumTracks; ++t)
    c[is_oil(track_at(t).tier) ? 0 : 1] += y.capex_cash[t] + y.capex_credit[t];
  for (auto a : kAllAssets) {
    const double spent = y.bought_cost[index(a)];
    if (a == AssetClass::LowCarbon)
      c[2] += spent;
    else
      c[is_oil(*tier_of(a)) ? 0 : 1] += spent;
  }
  c[2] += y.auction_cash_paid + y.auction_credit_drawn;
  return c;
}

/// First year whose low-carbon capex exceeds hydrocarbon capex.
inline std::optional<int> first_eclipse_year(const GameLog& log, std::size_t seat) {
  for (const auto& y : log.years) {
    const auto c = capex_by_market(y.seats[seat]);
    if (c[2] > c[0] + c[1]) return y.year;
  }
  return std::nullopt;
}

inline Movement movement_of(std::optional<int> eclipse_year) {
  if (!eclipse_year) return Movement::None;
  if (*eclipse_year <= kFirstYear + 2) return Movement::Early;
  if (*eclipse_year < 2025) return Movement::MidTerm;
  return Movement::Late;
}

/// Market with the largest cumulative capex; ties go to low-carbon, then oil.
inline Market business_model(const GameLog& log, std::size_t seat) {
  std::array<double, kNumMarkets> total{};
  for (const auto& y : log.years) {
    const auto c = capex_by_market(y.seats[seat]);
    for (std::size_t k = 0; k < kNumMarkets; ++k) total[k] += c[k];
  }
  if (total[2] >= total[0] && total[2] >= total[1]) return Market::LowCarbon;
  return total[0] >= total[1] ? Market::Oil : Market::Gas;
}

struct StrategyLabel {
  Movement movement = Movement::None;
  Market model = Market::Oil;
  std::optional<int> eclipse_year;
  std::string tag;  // "E-LC", "M-O", "Exp-B-O", ...

  bool operator==(const StrategyLabel&) const = default;
};

inline StrategyLabel classify_strategy(const GameLog& log, std::size_t seat) {
  StrategyLabel l;
  l.eclipse_year = first_eclipse_year(log, seat);
  l.movement = movement_of(l.eclipse_year);
  l.model = business_model(log, seat);
  const auto profile = parse_constraint(log.header.seats[seat].constraint);
  switch (profile.kind) {
    case ConstraintProfile::Kind::BAU: l.tag = "Exp-B-"; break;
    case ConstraintProfile::Kind::DelayedTransition: l.tag = "Exp-D-"; break;
    case ConstraintProfile::Kind::Unconstrained: l.tag = std::string(to_string(l.movement)) + "-"; break;
  }
  l.tag += to_string(l.model);
  return l;
}

/// Seat's share of all dividends paid in the game; 0 when nobody paid.
inline double dividend_share(const GameLog& log, std::size_t seat) {
  double total = 0;
  for (std::size_t i = 0; i < kNumSeats; ++i) total += log.cumulative_dividends(i);
  return total > 0 ? log.cumulative_dividends(seat) / total : 0.0;
}

/// First year the seat's low-carbon book value exceeds its hydrocarbon
/// reserve value under that year's valuation rule.
inline std::optional<int> transition_year(const GameLog& log, std::size_t seat) {
  for (const auto& y : log.years) {
    const auto v = value_holdings(y.seats[seat].end_sheet, y.prices, log.header.costs);
    if (v.low_carbon > v.hydrocarbon()) return y.year;
  }
  return std::nullopt;
}

/// League player id behind a seat ("main-0@3" -> "main-0").
inline std::string seat_player(const GameLog& log, std::size_t seat) {
  const auto& p = log.header.seats[seat].policy;
  return p.substr(0, p.find('@'));
}

}  // namespace tl
