#pragma once

// GameLog: the JSON record of one game, sufficient to recompute every report.

#include <json.hpp>

#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <string>
#include <vector>

#include "../core/error.hpp"
#include "../core/hash.hpp"
#include "../core/io.hpp"
#include "game.hpp"

namespace tl {

using Json = nlohmann::json;

inline constexpr int kGameLogVersion = 1;

struct SeatInfo {
  std::string policy;      // league player id or "human"/"random"
  std::string portfolio;   // portfolio variant name
  std::string constraint;  // constraint profile tag
  bool operator==(const SeatInfo&) const = default;
};

struct GameHeader {
  int version = kGameLogVersion;
  std::string scenario_id;
  std::string scenario_model;
  WarmingBucket bucket = WarmingBucket::GT4;
  std::uint64_t seed = 0;
  std::string matchup;
  std::array<SeatInfo, kNumSeats> seats{};
  CapitalCosts costs;
  double tax_rate = 0.24;
};

struct GameLog {
  GameHeader header;
  std::array<BalanceSheet, kNumSeats> initial{};
  std::array<double, kNumSeats> initial_equity{};
  std::vector<YearRecord> years;

  bool complete() const { return years.size() == static_cast<std::size_t>(kNumYears); }
  double cumulative_dividends(std::size_t seat) const {
    double s = 0;
    for (const auto& y : years) s += y.seats[seat].dividends;
    return s;
  }
};

NLOHMANN_JSON_SERIALIZE_ENUM(WarmingBucket, {{WarmingBucket::LE1_5, "LE1.5"},
                                             {WarmingBucket::LE1_75, "LE1.75"},
                                             {WarmingBucket::LE2, "LE2"},
                                             {WarmingBucket::LE3, "LE3"},
                                             {WarmingBucket::LE4, "LE4"},
                                             {WarmingBucket::GT4, "GT4"}})
NLOHMANN_JSON_SERIALIZE_ENUM(Funding, {{Funding::Cash, "cash"}, {Funding::Credit, "credit"}})
NLOHMANN_JSON_SERIALIZE_ENUM(AssetClass, {{AssetClass::OilDevLow, "OilDevLow"},
                                          {AssetClass::OilDevHigh, "OilDevHigh"},
                                          {AssetClass::OilUndevLow, "OilUndevLow"},
                                          {AssetClass::OilUndevHigh, "OilUndevHigh"},
                                          {AssetClass::GasDevLow, "GasDevLow"},
                                          {AssetClass::GasDevHigh, "GasDevHigh"},
                                          {AssetClass::GasUndevLow, "GasUndevLow"},
                                          {AssetClass::GasUndevHigh, "GasUndevHigh"},
                                          {AssetClass::LowCarbon, "LowCarbon"}})

NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(YearMetrics, oil_demand, gas_demand, lc_roi, lc_supply, opec_share)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(Prices, oil, gas)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(PipelineSlot, quantity, due_year)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(BalanceSheet, cash, debt, holdings, pipeline)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(TierCosts, explore, develop, lift)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(CapitalCosts, tiers)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(BidLine, seat, funding, price, volume)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(AuctionResult, supply, lines, fills, priority, voided)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(Trade, asset, buyer, seller, volume, price)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(ProductionAction, volume)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(BorrowRequest, amount)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(AuctionBid, cash_price, cash_volume, credit_price, credit_volume)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(AssetOrder, sell_volume, sell_price, buy_volume, buy_price)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(TradingAction, bid, orders)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(AllocationAction, cash_capex, credit_capex, debt_payoff, dividends)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(StagedActions, production, borrow, trading, allocation)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(SeatInfo, policy, portfolio, constraint)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(GameHeader, version, scenario_id, scenario_model, bucket, seed, matchup, seats,
                                   costs, tax_rate)

// Non-finite doubles (an infinite D/E ratio) are written as null.
inline Json finite_or_null(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }
inline double number_or_inf(const Json& j) {
  return j.is_null() ? std::numeric_limits<double>::infinity() : j.get<double>();
}

inline void to_json(Json& j, const DecisionMetrics& m) {
  j = Json{{"equity", m.equity},
           {"debt_to_equity", finite_or_null(m.debt_to_equity)},
           {"cost_of_debt", m.cost_of_debt},
           {"cost_of_equity", m.cost_of_equity},
           {"cost_of_capital", m.cost_of_capital},
           {"net_income", m.net_income},
           {"cumulative_dividends", m.cumulative_dividends}};
}

inline void from_json(const Json& j, DecisionMetrics& m) {
  j.at("equity").get_to(m.equity);
  m.debt_to_equity = number_or_inf(j.at("debt_to_equity"));
  j.at("cost_of_debt").get_to(m.cost_of_debt);
  j.at("cost_of_equity").get_to(m.cost_of_equity);
  j.at("cost_of_capital").get_to(m.cost_of_capital);
  j.at("net_income").get_to(m.net_income);
  j.at("cumulative_dividends").get_to(m.cumulative_dividends);
}

NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(SeatYear, submitted, cash_start, debt_start, produced, rejected, oil_margin,
                                   gas_margin, lc_income, interest_due, interest_paid, interest_capitalized,
                                   net_income, borrowed, auction_cash_paid, auction_credit_drawn, lc_auction_volume,
                                   trade_cash_in, trade_cash_out, bought, sold, bought_cost, capex_cash, capex_credit,
                                   debt_payoff, dividends, end_sheet, metrics)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(YearRecord, year, scenario, prices, player_oil, player_gas, auction, trades, seats)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(GameLog, header, initial, initial_equity, years)

inline GameHeader make_header(const GameState& s) {
  GameHeader h;
  h.scenario_id = s.scenario.id;
  h.scenario_model = s.scenario.model_name;
  h.bucket = s.scenario.bucket;
  h.seed = s.seed;
  h.costs = s.config.costs;
  h.tax_rate = s.config.finance.tax_rate;
  return h;
}

inline GameLog make_log(const GameState& s, GameHeader header) {
  GameLog log;
  log.header = std::move(header);
  for (std::size_t i = 0; i < kNumSeats; ++i) {
    log.initial[i] = s.seats[i].initial_sheet;
    log.initial_equity[i] = s.seats[i].initial_equity;
  }
  log.years = s.history;
  return log;
}

inline std::string dump(const GameLog& log) { return Json(log).dump(); }

inline GameLog parse_game_log(std::string_view text) {
  try {
    auto j = Json::parse(text);
    auto log = j.get<GameLog>();
    if (log.header.version > kGameLogVersion)
      throw Error(Errc::VersionMismatch, fmt::format("game log version {}", log.header.version));
    return log;
  } catch (const Json::exception& e) {
    throw Error(Errc::IoError, fmt::format("malformed game log: {}", e.what()));
  }
}

inline void save_game_log(const std::filesystem::path& path, const GameLog& log) {
  write_file_atomic(path, dump(log));
}

inline GameLog load_game_log(const std::filesystem::path& path) { return parse_game_log(read_file(path)); }

inline std::string log_hash(const GameLog& log) { return sha256_hex(dump(log)); }

/// Digest of everything that evolves during play.
inline std::string state_hash(const GameState& s) {
  Json j;
  j["year"] = s.year;
  j["stage"] = static_cast<int>(s.stage);
  j["allocation_done"] = s.allocation_done;
  j["terminal"] = s.terminal;
  j["prices"] = s.prices;
  Json seats = Json::array();
  for (const auto& seat : s.seats)
    seats.push_back({{"sheet", seat.sheet},
                     {"metrics", seat.metrics},
                     {"cumulative_dividends", seat.cumulative_dividends},
                     {"levered_cash", seat.levered_cash}});
  j["seats"] = std::move(seats);
  j["current"] = s.current;
  j["history"] = s.history;
  return sha256_hex(j.dump());
}

}  // namespace tl
