#pragma once

#include <fmt/format.h>

#include <charconv>
#include <string>
#include <string_view>

#include "../core/error.hpp"
#include "../engine/game.hpp"

namespace tl {

/// Exploiter restrictions. BAU never acquires low-carbon assets; a delayed
/// transition does not until `from_year`. Selling existing holdings is allowed.
struct ConstraintProfile {
  enum class Kind : std::uint8_t { Unconstrained, BAU, DelayedTransition };
  Kind kind = Kind::Unconstrained;
  int from_year = 0;

  static ConstraintProfile unconstrained() { return {}; }
  static ConstraintProfile bau() { return {Kind::BAU, 0}; }
  static ConstraintProfile delayed(int year) { return {Kind::DelayedTransition, year}; }

  bool blocks_low_carbon(int year) const {
    switch (kind) {
      case Kind::Unconstrained: return false;
      case Kind::BAU: return true;
      case Kind::DelayedTransition: return year < from_year;
    }
    return false;
  }

  bool operator==(const ConstraintProfile&) const = default;
};

inline std::string to_string(const ConstraintProfile& c) {
  switch (c.kind) {
    case ConstraintProfile::Kind::Unconstrained: return "none";
    case ConstraintProfile::Kind::BAU: return "bau";
    case ConstraintProfile::Kind::DelayedTransition: return fmt::format("delayed:{}", c.from_year);
  }
  return "none";
}

inline ConstraintProfile parse_constraint(std::string_view s) {
  if (s == "none" || s.empty()) return ConstraintProfile::unconstrained();
  if (s == "bau") return ConstraintProfile::bau();
  if (s.starts_with("delayed:")) {
    int y = 0;
    auto tail = s.substr(8);
    auto [p, ec] = std::from_chars(tail.data(), tail.data() + tail.size(), y);
    if (ec == std::errc{} && p == tail.data() + tail.size()) return ConstraintProfile::delayed(y);
  }
  throw Error(Errc::ConfigError, fmt::format("unknown constraint profile '{}'", s));
}

inline TradingAction apply_constraint(TradingAction a, const ConstraintProfile& c, int year) {
  if (!c.blocks_low_carbon(year)) return a;
  a.bid = {};
  auto& lc = a.orders[index(AssetClass::LowCarbon)];
  lc.buy_volume = 0;
  lc.buy_price = 0;
  return a;
}

inline StagedActions apply_constraint(StagedActions a, const ConstraintProfile& c, int year) {
  a.trading = apply_constraint(a.trading, c, year);
  return a;
}

}  // namespace tl
