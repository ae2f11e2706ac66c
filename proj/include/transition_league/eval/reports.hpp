#pragma once

// Report bundle built in one pass over a tournament archive. Every table is
// keyed by ordered maps and numbers are printed in shortest round-trip form,
// so rebuilding from the same archive is byte-identical.

#include <fmt/format.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <tuple>
#include <vector>

#include "../scenario.hpp"
#include "strategy.hpp"
#include "tournament.hpp"

namespace tl {

// ---------------------------------------------------------------------------
// Benchmark: required annual low-carbon investment per model, warming class
// and decade.

struct Benchmark {
  std::map<std::tuple<std::string, std::string, int>, double> rows;

  std::optional<double> find(const std::string& model, const std::string& scenario_class, int decade) const {
    auto it = rows.find({model, scenario_class, decade});
    if (it == rows.end()) return std::nullopt;
    return it->second;
  }
};

inline Benchmark parse_benchmark(std::istream& in) {
  using detail::parse_double, detail::split, detail::trim;
  Benchmark b;
  std::string line;
  if (!std::getline(in, line)) throw Error(Errc::MissingBenchmark, "benchmark file is empty");
  const auto header = split(trim(line), ',');
  const std::array<std::string_view, 4> want = {"model", "scenario_class", "decade", "annual_required_investment"};
  std::array<std::size_t, 4> col{};
  for (std::size_t k = 0; k < want.size(); ++k) {
    auto it = std::find_if(header.begin(), header.end(), [&](std::string_view h) { return trim(h) == want[k]; });
    if (it == header.end()) throw Error(Errc::MissingColumn, fmt::format("benchmark column '{}'", want[k]));
    col[k] = static_cast<std::size_t>(it - header.begin());
  }
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const auto f = split(trim(line), ',');
    auto decade = f.size() > col[2] ? parse_double(trim(f[col[2]])) : std::nullopt;
    auto value = f.size() > col[3] ? parse_double(trim(f[col[3]])) : std::nullopt;
    if (!decade || !value || *value <= 0 || f.size() <= std::max(col[0], col[1]))
      throw Error(Errc::MalformedRow, fmt::format("benchmark line {}", lineno));
    b.rows[std::make_tuple(std::string(trim(f[col[0]])), std::string(trim(f[col[1]])), static_cast<int>(*decade))] = *value;
  }
  return b;
}

inline Benchmark load_benchmark(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::MissingBenchmark, "cannot open benchmark file " + path.string());
  return parse_benchmark(in);
}

inline int decade_of(int year) { return year / 10 * 10; }

inline std::string bucket_name(WarmingBucket b) { return nlohmann::json(b).get<std::string>(); }

// ---------------------------------------------------------------------------
// Tables

/// A CSV table with a fixed header; cells are strings already formatted.
struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  std::string csv() const {
    std::string out;
    for (std::size_t i = 0; i < columns.size(); ++i) out += (i ? "," : "") + columns[i];
    out += "\n";
    for (const auto& r : rows) {
      for (std::size_t i = 0; i < r.size(); ++i) out += (i ? "," : "") + r[i];
      out += "\n";
    }
    return out;
  }

  nlohmann::json json() const {
    nlohmann::json rs = nlohmann::json::array();
    for (const auto& r : rows) rs.push_back(r);
    return {{"columns", columns}, {"rows", rs}};
  }
};

inline std::string num(double v) { return std::isfinite(v) ? fmt::format("{}", v) : "nan"; }
inline std::string year_or_none(std::optional<int> y) { return y ? std::to_string(*y) : "none"; }

struct ReportOptions {
  double oil_price_bin = 10.0;  // $/bbl width of sensitivity bins
  std::optional<std::filesystem::path> benchmark;
};

struct ReportBundle {
  std::map<std::string, Table> tables;  // name -> table, written as <name>.csv
  std::size_t games = 0;

  nlohmann::json json() const {
    nlohmann::json t = nlohmann::json::object();
    for (const auto& [name, table] : tables) t[name] = table.json();
    return {{"version", 1}, {"games", games}, {"tables", t}};
  }
};

namespace report_detail {

struct Mean {
  double sum = 0;
  double n = 0;
  void add(double v) {
    sum += v;
    n += 1;
  }
  double value() const { return n > 0 ? sum / n : 0.0; }
};

using Shares = std::array<double, kNumMarkets>;

inline Shares value_shares(const BalanceSheet& bs, const CapitalCosts& costs) {
  const auto v = value_holdings(bs, {}, costs, false);
  const double total = v.oil + v.gas + v.low_carbon;
  if (total <= 0) return {1.0 / 3, 1.0 / 3, 1.0 / 3};
  return {v.oil / total, v.gas / total, v.low_carbon / total};
}

inline std::size_t per_game_winner(const GameLog& log) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < kNumSeats; ++i)
    if (log.cumulative_dividends(i) > log.cumulative_dividends(best)) best = i;
  return best;
}

}  // namespace report_detail

/// Builds every report table from the archive.
inline ReportBundle build_reports(const std::filesystem::path& archive, const ReportOptions& opt = {}) {
  using namespace report_detail;
  std::optional<Benchmark> bench;
  if (opt.benchmark) bench = load_benchmark(*opt.benchmark);

  std::map<std::pair<std::string, std::string>, Mean> share;            // (player, bucket)
  std::map<std::pair<std::string, std::string>, double> dividends;      // (player, bucket)
  std::map<std::pair<std::string, std::string>, int> movement;          // (player, year|none)
  std::map<std::pair<std::string, std::string>, int> transition;        // (player, year|none)
  std::map<std::pair<std::string, std::string>, int> labels;            // (player, tag)
  std::map<std::pair<std::string, std::string>, Mean> dominance;        // (player, market)
  std::map<std::tuple<std::string, int, double>, Mean> sensitivity;     // (tag, year, bin low)
  std::map<std::tuple<std::string, std::string, int>, std::array<Mean, kNumMarkets>> evolution;  // (rule, bucket, year)
  std::map<std::tuple<std::string, int>, std::array<Mean, 2>> contribution;  // (player, decade)
  std::vector<std::vector<std::string>> games;

  // Matchup-aggregate winners need totals over all of a matchup's games.
  std::map<std::string, std::map<std::string, double>> matchup_totals;
  for_each_game(archive, [&](const ArchiveEntry& e, const GameLog& log) {
    for (std::size_t i = 0; i < kNumSeats; ++i)
      matchup_totals[e.matchup][seat_player(log, i)] += log.cumulative_dividends(i);
  });
  std::map<std::string, std::string> matchup_winner;
  for (const auto& [m, totals] : matchup_totals) {
    auto best = totals.begin();
    for (auto it = totals.begin(); it != totals.end(); ++it)
      if (it->second > best->second) best = it;
    matchup_winner[m] = best->first;
  }

  std::size_t game_count = 0;
  for_each_game(archive, [&](const ArchiveEntry& e, const GameLog& log) {
    ++game_count;
    const std::string bucket = bucket_name(log.header.bucket);
    std::map<std::pair<std::string, int>, Mean> game_sens;  // seats sharing a label count once per game
    for (std::size_t i = 0; i < kNumSeats; ++i) {
      const auto player = seat_player(log, i);
      const auto label = classify_strategy(log, i);
      const double s = dividend_share(log, i);
      share[{player, bucket}].add(s);
      dividends[{player, bucket}] += log.cumulative_dividends(i);
      ++movement[{player, year_or_none(label.eclipse_year)}];
      ++transition[{player, year_or_none(transition_year(log, i))}];
      ++labels[{player, label.tag}];

      for (const auto& y : log.years) {
        const auto& sy = y.seats[i];
        const std::array<double, kNumMarkets> income = {sy.oil_margin, sy.gas_margin, sy.lc_income};
        const auto top = std::max_element(income.begin(), income.end()) - income.begin();
        for (std::size_t k = 0; k < kNumMarkets; ++k) dominance[{player, std::string(to_string(Market(k)))}].add(k == static_cast<std::size_t>(top) && income[k] > 0);
        game_sens[{label.tag, y.year}].add(sy.dividends);
      }

      if (bench) {
        std::map<int, std::array<double, 2>> lc;  // decade -> (unlevered, levered)
        std::map<int, int> years_in;
        for (const auto& y : log.years) {
          const auto& sy = y.seats[i];
          auto& d = lc[decade_of(y.year)];
          d[0] += sy.auction_cash_paid + sy.bought_cost[index(AssetClass::LowCarbon)];
          d[1] += sy.auction_credit_drawn;
          ++years_in[decade_of(y.year)];
        }
        for (const auto& [decade, amounts] : lc) {
          const auto req = bench->find(log.header.scenario_model, bucket, decade);
          if (!req)
            throw Error(Errc::MissingBenchmark,
                        fmt::format("no benchmark for model {} class {} decade {}", log.header.scenario_model, bucket, decade));
          for (int k = 0; k < 2; ++k) contribution[{player, decade}][k].add(amounts[k] / years_in[decade] / *req);
        }
      }
      games.push_back({e.matchup, log.header.scenario_id, std::to_string(i), player, label.tag,
                       num(log.cumulative_dividends(i)), num(s)});
    }
    for (const auto& [k, m] : game_sens) {
      const double oil = log.years[k.second - kFirstYear].prices.oil;
      const double bin = std::floor(oil / opt.oil_price_bin) * opt.oil_price_bin;
      sensitivity[{k.first, k.second, bin}].add(m.value());
    }

    const std::size_t w = per_game_winner(log);
    std::optional<std::size_t> mw;
    for (std::size_t i = 0; i < kNumSeats && !mw; ++i)
      if (seat_player(log, i) == matchup_winner[e.matchup]) mw = i;
    for (const auto& y : log.years) {
      const auto s = value_shares(y.seats[w].end_sheet, log.header.costs);
      for (std::size_t k = 0; k < kNumMarkets; ++k) evolution[{"per-game", bucket, y.year}][k].add(s[k]);
      const auto m = value_shares(y.seats[*mw].end_sheet, log.header.costs);
      for (std::size_t k = 0; k < kNumMarkets; ++k) evolution[{"per-matchup", bucket, y.year}][k].add(m[k]);
    }
  });

  ReportBundle b;
  b.games = game_count;
  auto& t_share = b.tables["dividend_shares"];
  t_share.columns = {"player", "bucket", "games", "mean_share", "total_dividends"};
  for (const auto& [k, m] : share)
    t_share.rows.push_back({k.first, k.second, num(m.n), num(m.value()), num(dividends[k])});

  auto& t_games = b.tables["games"];
  t_games.columns = {"matchup", "scenario", "seat", "player", "strategy", "dividends", "dividend_share"};
  t_games.rows = std::move(games);

  auto& t_move = b.tables["movement_years"];
  t_move.columns = {"player", "first_lc_majority_year", "games"};
  for (const auto& [k, n] : movement) t_move.rows.push_back({k.first, k.second, std::to_string(n)});

  auto& t_trans = b.tables["transition_years"];
  t_trans.columns = {"player", "transition_year", "games"};
  for (const auto& [k, n] : transition) t_trans.rows.push_back({k.first, k.second, std::to_string(n)});

  auto& t_label = b.tables["strategy_labels"];
  t_label.columns = {"player", "strategy", "games"};
  for (const auto& [k, n] : labels) t_label.rows.push_back({k.first, k.second, std::to_string(n)});

  auto& t_dom = b.tables["cashflow_dominance"];
  t_dom.columns = {"player", "market", "share_of_years"};
  for (const auto& [k, m] : dominance) t_dom.rows.push_back({k.first, k.second, num(m.value())});

  auto& t_sens = b.tables["oil_price_sensitivity"];
  t_sens.columns = {"strategy", "year", "oil_price_lo", "oil_price_hi", "observations", "mean_dividends"};
  for (const auto& [k, m] : sensitivity)
    t_sens.rows.push_back({std::get<0>(k), std::to_string(std::get<1>(k)), num(std::get<2>(k)),
                           num(std::get<2>(k) + opt.oil_price_bin), num(m.n), num(m.value())});

  auto& t_evo = b.tables["portfolio_evolution"];
  t_evo.columns = {"winner_rule", "bucket", "year", "oil_share", "gas_share", "lc_share"};
  for (const auto& [k, ms] : evolution)
    t_evo.rows.push_back({std::get<0>(k), std::get<1>(k), std::to_string(std::get<2>(k)), num(ms[0].value()),
                          num(ms[1].value()), num(ms[2].value())});

  if (bench) {
    auto& t_inv = b.tables["investment_contribution"];
    t_inv.columns = {"player", "decade", "unlevered_fraction", "levered_fraction", "total_fraction"};
    for (const auto& [k, m] : contribution)
      t_inv.rows.push_back({std::get<0>(k), std::to_string(std::get<1>(k)), num(m[0].value()), num(m[1].value()),
                            num(m[0].value() + m[1].value())});
  }
  return b;
}

inline void write_reports(const ReportBundle& b, const std::filesystem::path& dir) {
  for (const auto& [name, table] : b.tables) write_file_atomic(dir / (name + ".csv"), table.csv());
  write_file_atomic(dir / "bundle.json", b.json().dump(2) + "\n");
}

}  // namespace tl
