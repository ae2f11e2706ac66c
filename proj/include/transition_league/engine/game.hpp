#pragma once

// One six-seat game: stage machine, balance-sheet accounting and per-year
// records. Stage functions validate every seat before mutating anything, so a
// thrown Error leaves the state untouched.

#include <fmt/format.h>

#include <array>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "../core/error.hpp"
#include "../core/rng.hpp"
#include "../scenario.hpp"
#include "market.hpp"
#include "types.hpp"

namespace tl {

enum class Stage : std::uint8_t { Production, Borrowing, Trading, Allocation };

constexpr std::string_view to_string(Stage s) {
  switch (s) {
    case Stage::Production: return "production";
    case Stage::Borrowing: return "borrowing";
    case Stage::Trading: return "trading";
    case Stage::Allocation: return "allocation";
  }
  return "?";
}

inline std::optional<Stage> parse_stage(std::string_view s) {
  for (auto st : {Stage::Production, Stage::Borrowing, Stage::Trading, Stage::Allocation})
    if (to_string(st) == s) return st;
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Actions in engine units

struct ProductionAction {
  std::array<double, kNumTiers> volume{};  // bn boe per tier

  bool operator==(const ProductionAction&) const = default;
};

struct BorrowRequest {
  double amount = 0;

  bool operator==(const BorrowRequest&) const = default;
};

struct AuctionBid {
  double cash_price = 0;
  double cash_volume = 0;
  double credit_price = 0;
  double credit_volume = 0;

  bool operator==(const AuctionBid&) const = default;
};

struct AssetOrder {
  double sell_volume = 0;
  double sell_price = 0;
  double buy_volume = 0;
  double buy_price = 0;

  bool operator==(const AssetOrder&) const = default;
};

struct TradingAction {
  AuctionBid bid;
  std::array<AssetOrder, kNumTradable> orders{};

  bool operator==(const TradingAction&) const = default;
};

struct AllocationAction {
  std::array<double, kNumTracks> cash_capex{};    // $bn per pipeline track
  std::array<double, kNumTracks> credit_capex{};  // $bn per pipeline track, debt-funded
  double debt_payoff = 0;
  double dividends = 0;

  bool operator==(const AllocationAction&) const = default;
};

struct StagedActions {
  ProductionAction production;
  BorrowRequest borrow;
  TradingAction trading;
  AllocationAction allocation;

  bool operator==(const StagedActions&) const = default;
};

// ---------------------------------------------------------------------------
// Records

struct SeatYear {
  StagedActions submitted;
  double cash_start = 0;
  double debt_start = 0;

  // production
  std::array<double, kNumTiers> produced{};
  std::array<bool, kNumTiers> rejected{};
  double oil_margin = 0;
  double gas_margin = 0;
  double lc_income = 0;
  double interest_due = 0;
  double interest_paid = 0;
  double interest_capitalized = 0;
  double net_income = 0;

  // borrowing
  double borrowed = 0;

  // trading
  double auction_cash_paid = 0;
  double auction_credit_drawn = 0;
  double lc_auction_volume = 0;
  double trade_cash_in = 0;
  double trade_cash_out = 0;
  std::array<double, kNumTradable> bought{};
  std::array<double, kNumTradable> sold{};
  std::array<double, kNumTradable> bought_cost{};

  // allocation
  std::array<double, kNumTracks> capex_cash{};
  std::array<double, kNumTracks> capex_credit{};
  double debt_payoff = 0;
  double dividends = 0;

  BalanceSheet end_sheet;
  DecisionMetrics metrics;

  double oil_produced() const { return produced[0] + produced[1]; }
  double gas_produced() const { return produced[2] + produced[3]; }
  bool operator==(const SeatYear&) const = default;
};

struct YearRecord {
  int year = kFirstYear;
  YearMetrics scenario;
  Prices prices;
  double player_oil = 0;
  double player_gas = 0;
  AuctionResult auction;
  std::vector<Trade> trades;
  std::array<SeatYear, kNumSeats> seats{};
};

struct Seat {
  BalanceSheet sheet;
  DecisionMetrics metrics;
  double cumulative_dividends = 0;
  double levered_cash = 0;  // borrowed cash not yet spent; never payable as dividends
  double initial_equity = 0;
  BalanceSheet initial_sheet;
};

struct GameState {
  int year = kFirstYear;
  Stage stage = Stage::Production;
  bool allocation_done = false;
  bool terminal = false;
  std::uint64_t seed = 0;
  Scenario scenario;
  EngineConfig config;
  std::array<Seat, kNumSeats> seats{};
  Prices prices;  // most recently formed prices (reference prices before 2020 production)
  YearRecord current;
  std::vector<YearRecord> history;

  const YearMetrics& metrics_now() const { return scenario.at(year); }
  std::uint64_t stream_seed(Stream s) const {
    return derive_seed(seed, {static_cast<std::uint64_t>(s), static_cast<std::uint64_t>(year)});
  }
};

using SeatArray = std::array<BalanceSheet, kNumSeats>;

namespace engine_detail {

inline constexpr double kTol = 1e-9;

inline bool exceeds(double requested, double available) {
  return requested > available + kTol * std::max(1.0, std::abs(available));
}

inline void require_stage(const GameState& s, Stage want) {
  if (s.terminal) throw Error(Errc::WrongStage, "game is terminal");
  if (s.stage != want || (want == Stage::Allocation && s.allocation_done))
    throw Error(Errc::WrongStage, fmt::format("expected stage {}, cursor at {}{}", to_string(want),
                                              to_string(s.stage), s.allocation_done ? " (completed)" : ""));
}

inline void spend_cash(Seat& seat, double amount) {
  seat.sheet.cash -= amount;
  if (seat.sheet.cash < 0.0 && seat.sheet.cash > -1e-9) seat.sheet.cash = 0.0;
  seat.levered_cash = std::max(0.0, seat.levered_cash - amount);
  seat.levered_cash = std::min(seat.levered_cash, seat.sheet.cash);
}

inline void begin_year(GameState& s) {
  s.current = YearRecord{};
  s.current.year = s.year;
  s.current.scenario = s.metrics_now();
  for (std::size_t i = 0; i < kNumSeats; ++i) {
    s.current.seats[i].cash_start = s.seats[i].sheet.cash;
    s.current.seats[i].debt_start = s.seats[i].sheet.debt;
  }
}

}  // namespace engine_detail

/// Cash and debt each equal their year-start value plus the year's recorded
/// flows. Returns the largest relative violation over seats.
inline double accounting_residual(const GameState& s) {
  double worst = 0;
  for (std::size_t i = 0; i < kNumSeats; ++i) {
    const auto& r = s.current.seats[i];
    const auto& sh = s.seats[i].sheet;
    double capex_cash = 0, capex_credit = 0;
    for (std::size_t t = 0; t < kNumTracks; ++t) {
      capex_cash += r.capex_cash[t];
      capex_credit += r.capex_credit[t];
    }
    const double cash = r.cash_start + r.oil_margin + r.gas_margin + r.lc_income - r.interest_paid + r.borrowed -
                        r.auction_cash_paid + r.trade_cash_in - r.trade_cash_out - capex_cash - r.debt_payoff -
                        r.dividends;
    const double debt = r.debt_start + r.interest_capitalized + r.borrowed + r.auction_credit_drawn + capex_credit -
                        r.debt_payoff;
    const double scale_c = std::max({1.0, std::abs(r.cash_start), std::abs(sh.cash)});
    const double scale_d = std::max({1.0, std::abs(r.debt_start), std::abs(sh.debt)});
    worst = std::max({worst, std::abs(cash - sh.cash) / scale_c, std::abs(debt - sh.debt) / scale_d});
  }
  return worst;
}

inline void check_accounting(const GameState& s) {
  if (!s.config.check_accounting) return;
  const double r = accounting_residual(s);
  if (r > 1e-9) throw Error(Errc::AccountingViolation, fmt::format("year {} residual {}", s.year, r));
}

inline double current_equity(const GameState& s, std::size_t seat) {
  return equity(s.seats[seat].sheet, s.prices, s.config.costs);
}

inline GameState new_game(const SeatArray& portfolios, const Scenario& scenario, const EngineConfig& config,
                          std::uint64_t seed) {
  GameState s;
  s.seed = seed;
  s.scenario = scenario;
  s.config = config;
  s.prices = reference_prices(config.prices);
  double first_value = 0;
  for (std::size_t i = 0; i < kNumSeats; ++i) {
    const auto& bs = portfolios[i];
    if (!valid(bs)) throw Error(Errc::InvalidPortfolio, fmt::format("seat {} has a negative or non-finite entry", i));
    const double value = equity(bs, s.prices, config.costs);
    if (i == 0) first_value = value;
    if (std::abs(value - first_value) > config.portfolio_value_tolerance * std::max(std::abs(first_value), 1e-12))
      throw Error(Errc::UnequalPortfolioValue,
                  fmt::format("seat {} marked value {} differs from seat 0 value {}", i, value, first_value));
    auto& seat = s.seats[i];
    seat.sheet = bs;
    seat.initial_equity = value;
    seat.initial_sheet = bs;
    seat.metrics = compute_metrics(bs, s.prices, config, 0.0, 0.0);
  }
  engine_detail::begin_year(s);
  return s;
}

// ---------------------------------------------------------------------------
// Production

inline void run_production(GameState& s, std::span<const ProductionAction, kNumSeats> actions) {
  using namespace engine_detail;
  require_stage(s, Stage::Production);
  for (std::size_t i = 0; i < kNumSeats; ++i)
    for (auto t : kAllTiers) {
      const double v = actions[i].volume[index(t)];
      if (!std::isfinite(v) || v < 0.0 || exceeds(v, s.seats[i].sheet[developed(t)]))
        throw Error(Errc::OverProduction, fmt::format("seat {} tier {}: {} requested, {} developed", i, to_string(t), v,
                                                      s.seats[i].sheet[developed(t)]));
    }

  const auto& m = s.metrics_now();
  const auto& costs = s.config.costs;
  std::array<bool, kNumTiers> rejected{};
  std::array<double, kNumTiers> tier_supply{};
  for (std::size_t i = 0; i < kNumSeats; ++i)
    for (auto t : kAllTiers) tier_supply[index(t)] += std::min(actions[i].volume[index(t)], s.seats[i].sheet[developed(t)]);

  // Merit order per commodity: drop the costliest tier while the price formed
  // from accepted supply does not cover its lifting cost.
  auto supply_of = [&](bool oil) {
    double v = 0;
    for (auto t : kAllTiers)
      if (is_oil(t) == oil && !rejected[index(t)]) v += tier_supply[index(t)];
    return v;
  };
  Prices p = form_prices(m, supply_of(true), supply_of(false), s.config.prices);
  for (bool oil : {true, false}) {
    const Tier low = oil ? Tier::OilLow : Tier::GasLow;
    const Tier high = oil ? Tier::OilHigh : Tier::GasHigh;
    for (Tier t : {high, low}) {
      if (tier_supply[index(t)] <= 0.0) continue;
      if (p.for_tier(t) < costs[t].lift) {
        rejected[index(t)] = true;
        p = form_prices(m, supply_of(true), supply_of(false), s.config.prices);
      }
    }
  }
  s.prices = p;
  s.current.prices = p;
  s.current.player_oil = supply_of(true);
  s.current.player_gas = supply_of(false);

  const double tax = s.config.finance.tax_rate;
  for (std::size_t i = 0; i < kNumSeats; ++i) {
    auto& seat = s.seats[i];
    auto& rec = s.current.seats[i];
    rec.submitted.production = actions[i];
    rec.rejected = rejected;
    for (auto t : kAllTiers) {
      if (rejected[index(t)]) continue;
      const double v = std::min(actions[i].volume[index(t)], seat.sheet[developed(t)]);
      rec.produced[index(t)] = v;
      seat.sheet[developed(t)] -= v;
      const double margin = production_margin(p.for_tier(t), costs[t].lift, v, tax);
      (is_oil(t) ? rec.oil_margin : rec.gas_margin) += margin;
    }
    rec.lc_income = m.lc_roi * seat.sheet[AssetClass::LowCarbon] * (1.0 - tax);
    rec.interest_due = seat.metrics.cost_of_debt * seat.sheet.debt;
    rec.net_income = rec.oil_margin + rec.gas_margin + rec.lc_income - rec.interest_due;

    seat.sheet.cash += rec.oil_margin + rec.gas_margin + rec.lc_income;
    rec.interest_paid = std::min(seat.sheet.cash, rec.interest_due);
    rec.interest_capitalized = rec.interest_due - rec.interest_paid;
    spend_cash(seat, rec.interest_paid);
    seat.sheet.debt += rec.interest_capitalized;
  }
  check_accounting(s);
  s.stage = Stage::Borrowing;
}

// ---------------------------------------------------------------------------
// Borrowing

inline void run_borrowing(GameState& s, std::span<const BorrowRequest, kNumSeats> requests) {
  using namespace engine_detail;
  require_stage(s, Stage::Borrowing);
  for (std::size_t i = 0; i < kNumSeats; ++i) {
    auto& seat = s.seats[i];
    auto& rec = s.current.seats[i];
    rec.submitted.borrow = requests[i];
    const double want = std::isfinite(requests[i].amount) ? std::max(requests[i].amount, 0.0) : 0.0;
    if (want <= 0.0) continue;
    const double headroom = credit_headroom(current_equity(s, i), seat.sheet.debt, s.config.finance);
    double granted = std::min(want, headroom);
    // Trim rounding overshoot so the post-borrow ratio stays within the cap.
    for (int k = 0; k < 64 && granted > 0.0; ++k) {
      BalanceSheet after = seat.sheet;
      after.cash += granted;
      after.debt += granted;
      const double eq = equity(after, s.prices, s.config.costs);
      if (eq > 0.0 && after.debt / eq <= s.config.finance.max_debt_to_equity) break;
      granted = std::max(granted - 4.0 * std::numeric_limits<double>::epsilon() * after.debt, 0.0);
    }
    seat.sheet.cash += granted;
    seat.sheet.debt += granted;
    seat.levered_cash += granted;
    rec.borrowed = granted;
  }
  check_accounting(s);
  s.stage = Stage::Trading;
}

// ---------------------------------------------------------------------------
// Trading: low-carbon auction, then the player call market

/// Debt headroom for an auction credit line at `credit_price`. Each unit of
/// debt buys 1/price of book value, and the seat's cash line is assumed to
/// fill in full in whichever direction lowers equity.
inline double auction_credit_headroom(const GameState& s, std::size_t i, double cash_price, double cash_volume,
                                      double credit_price) {
  if (!(credit_price > 0.0)) return 0.0;
  double eq = current_equity(s, i);
  if (cash_volume > 0.0) eq += std::min(0.0, cash_volume * (1.0 - cash_price));
  return credit_headroom(eq, s.seats[i].sheet.debt, s.config.finance, 1.0 / credit_price);
}

namespace engine_detail {

inline bool cash_line_feasible(const Seat& seat, double price, double volume) {
  return price > 0.0 && volume >= 0.0 && !exceeds(price * volume, seat.sheet.cash);
}

}  // namespace engine_detail

inline AuctionResult run_lc_auction(GameState& s, std::span<const AuctionBid, kNumSeats> bids) {
  using namespace engine_detail;
  std::vector<BidLine> lines;
  std::vector<bool> voided;
  for (std::size_t i = 0; i < kNumSeats; ++i) {
    const auto& b = bids[i];
    bool cash_ok = false;
    if (b.cash_volume > 0.0) {
      cash_ok = std::isfinite(b.cash_price * b.cash_volume) && cash_line_feasible(s.seats[i], b.cash_price, b.cash_volume);
      lines.push_back({i, Funding::Cash, b.cash_price, cash_ok ? b.cash_volume : 0.0});
      voided.push_back(!cash_ok);
    }
    if (b.credit_volume > 0.0) {
      const bool ok = std::isfinite(b.credit_price * b.credit_volume) && b.credit_price > 0.0 &&
                      !exceeds(b.credit_price * b.credit_volume,
                               auction_credit_headroom(s, i, b.cash_price, cash_ok ? b.cash_volume : 0.0,
                                                       b.credit_price));
      lines.push_back({i, Funding::Credit, b.credit_price, ok ? b.credit_volume : 0.0});
      voided.push_back(!ok);
    }
  }
  Rng rng(s.stream_seed(Stream::Auction));
  const auto ranks = lottery_ranks(lines.size(), rng);
  AuctionResult r = clear_auction(s.metrics_now().lc_supply, lines, ranks);
  for (std::size_t k = 0; k < lines.size(); ++k) {
    r.voided[k] = voided[k];
    if (voided[k]) r.lines[k].volume = bids[lines[k].seat].cash_volume * (lines[k].funding == Funding::Cash) +
                                       bids[lines[k].seat].credit_volume * (lines[k].funding == Funding::Credit);
  }

  for (auto k : r.priority) {
    const double f = r.fills[k];
    if (f <= 0.0) continue;
    const auto& line = r.lines[k];
    auto& seat = s.seats[line.seat];
    auto& rec = s.current.seats[line.seat];
    const double cost = line.price * f;
    if (line.funding == Funding::Cash) {
      spend_cash(seat, cost);
      rec.auction_cash_paid += cost;
    } else {
      seat.sheet.debt += cost;
      rec.auction_credit_drawn += cost;
    }
    seat.sheet[AssetClass::LowCarbon] += f;
    rec.lc_auction_volume += f;
  }
  return r;
}

inline void run_trading(GameState& s, std::span<const TradingAction, kNumSeats> actions) {
  using namespace engine_detail;
  require_stage(s, Stage::Trading);
  std::array<AuctionBid, kNumSeats> bids;
  for (std::size_t i = 0; i < kNumSeats; ++i) {
    bids[i] = actions[i].bid;
    s.current.seats[i].submitted.trading = actions[i];
  }
  s.current.auction = run_lc_auction(s, bids);

  // Buy escrow at limit price must be covered by post-auction cash, and sells
  // by holdings; otherwise the seat's offending side is voided.
  std::array<bool, kNumSeats> buys_ok{};
  for (std::size_t i = 0; i < kNumSeats; ++i) {
    double escrow = 0;
    bool finite = true;
    for (const auto& o : actions[i].orders) {
      if (o.buy_volume > 0.0) {
        escrow += o.buy_volume * o.buy_price;
        finite = finite && std::isfinite(o.buy_price) && o.buy_price > 0.0;
      }
    }
    buys_ok[i] = finite && std::isfinite(escrow) && !exceeds(escrow, s.seats[i].sheet.cash);
  }

  Rng rng(s.stream_seed(Stream::Trading));
  for (auto a : kAllAssets) {
    std::vector<Order> sells, buys;
    for (std::size_t i = 0; i < kNumSeats; ++i) {
      const auto& o = actions[i].orders[index(a)];
      if (o.sell_volume > 0.0 && std::isfinite(o.sell_price) && o.sell_price >= 0.0 &&
          !exceeds(o.sell_volume, s.seats[i].sheet[a]))
        sells.push_back({i, std::min(o.sell_volume, s.seats[i].sheet[a]), o.sell_price});
      if (buys_ok[i] && o.buy_volume > 0.0) buys.push_back({i, o.buy_volume, o.buy_price});
    }
    const auto sell_rank = lottery_ranks(sells.size(), rng);
    const auto buy_rank = lottery_ranks(buys.size(), rng);
    if (sells.empty() || buys.empty()) continue;
    for (const auto& t : clear_call_market(a, sells, buys, sell_rank, buy_rank)) {
      const double cash = t.volume * t.price;
      auto& buyer = s.seats[t.buyer];
      auto& seller = s.seats[t.seller];
      spend_cash(buyer, cash);
      buyer.sheet[a] += t.volume;
      seller.sheet.cash += cash;
      seller.sheet[a] = std::max(seller.sheet[a] - t.volume, 0.0);
      auto& br = s.current.seats[t.buyer];
      auto& sr = s.current.seats[t.seller];
      br.trade_cash_out += cash;
      br.bought[index(a)] += t.volume;
      br.bought_cost[index(a)] += cash;
      sr.trade_cash_in += cash;
      sr.sold[index(a)] += t.volume;
      s.current.trades.push_back(t);
    }
  }
  check_accounting(s);
  s.stage = Stage::Allocation;
}

// ---------------------------------------------------------------------------
// Allocation

struct AllocationPlan {
  double payoff = 0;
  double dividends = 0;
};

/// Payoff capped at debt and dividends truncated to the cash left after capex
/// and payoff that did not come from borrowing. Outflows draw down levered
/// cash first.
inline AllocationPlan resolve_allocation_cash(const Seat& seat, const AllocationAction& a) {
  AllocationPlan plan;
  double capex_cash = 0;
  for (double c : a.cash_capex) capex_cash += c;
  plan.payoff = std::clamp(a.debt_payoff, 0.0, seat.sheet.debt);
  const double cash_after = seat.sheet.cash - capex_cash - plan.payoff;
  const double levered_after = std::min(std::max(0.0, seat.levered_cash - capex_cash - plan.payoff), cash_after);
  plan.dividends = std::clamp(a.dividends, 0.0, std::max(0.0, cash_after - levered_after));
  return plan;
}

/// Credit capex headroom once the cash side of `a` has executed. Cash spent
/// into tiers outside the money, and a `1 - value_per_cost` share of the
/// credit itself, add no equity.
inline double allocation_credit_headroom(const GameState& s, std::size_t i, const AllocationAction& a,
                                         const AllocationPlan& plan, double value_per_cost) {
  double eq = current_equity(s, i) - plan.dividends;
  for (std::size_t t = 0; t < kNumTracks; ++t)
    if (!tier_in_the_money(track_at(t).tier, s.prices, s.config.costs)) eq -= a.cash_capex[t];
  return credit_headroom(eq, s.seats[i].sheet.debt - plan.payoff, s.config.finance, value_per_cost);
}

namespace engine_detail {

inline AllocationPlan plan_allocation(const GameState& s, std::size_t i, const AllocationAction& a) {
  const auto& seat = s.seats[i];
  const auto& costs = s.config.costs;
  auto fail = [&](std::string_view what) {
    throw Error(Errc::OverAllocation, fmt::format("seat {}: {}", i, what));
  };
  double cash_total = a.debt_payoff + a.dividends;
  auto bad = [](double v) { return !std::isfinite(v) || v < 0.0; };
  if (bad(a.debt_payoff) || bad(a.dividends)) fail("negative or non-finite payoff/dividends");
  for (std::size_t t = 0; t < kNumTracks; ++t) {
    if (bad(a.cash_capex[t]) || bad(a.credit_capex[t])) fail(fmt::format("negative capex on track {}", t));
    cash_total += a.cash_capex[t];
  }
  if (exceeds(cash_total, seat.sheet.cash))
    fail(fmt::format("cash: {} requested, {} available", cash_total, seat.sheet.cash));
  for (auto tier : kAllTiers) {
    const std::size_t t = track_index(TrackKind::Develop, tier);
    const double qty = (a.cash_capex[t] + a.credit_capex[t]) / costs[tier].develop;
    if (exceeds(qty, seat.sheet[undeveloped(tier)]))
      fail(fmt::format("develop {}: {} units requested, {} undeveloped", to_string(tier), qty,
                       seat.sheet[undeveloped(tier)]));
  }

  const AllocationPlan plan = resolve_allocation_cash(seat, a);
  double credit = 0;
  double credit_value_loss = 0;
  for (std::size_t t = 0; t < kNumTracks; ++t) {
    credit += a.credit_capex[t];
    if (!tier_in_the_money(track_at(t).tier, s.prices, costs)) credit_value_loss += a.credit_capex[t];
  }
  if (credit > 0.0) {
    const double headroom = allocation_credit_headroom(s, i, a, plan, 1.0 - credit_value_loss / credit);
    if (exceeds(credit, headroom)) fail(fmt::format("credit: {} requested, {} headroom", credit, headroom));
  }
  return plan;
}

inline void enqueue(BalanceSheet& bs, std::size_t track, double qty, int due_year) {
  auto& slot = bs.pipeline[track][static_cast<std::size_t>(due_year % kPipelineLead)];
  if (slot.quantity > 0.0 && slot.due_year != due_year)
    throw Error(Errc::AccountingViolation, fmt::format("pipeline slot collision on track {}", track));
  slot.due_year = due_year;
  slot.quantity += qty;
}

}  // namespace engine_detail

inline void run_allocation(GameState& s, std::span<const AllocationAction, kNumSeats> actions) {
  using namespace engine_detail;
  require_stage(s, Stage::Allocation);
  std::array<AllocationPlan, kNumSeats> plans;
  for (std::size_t i = 0; i < kNumSeats; ++i) plans[i] = plan_allocation(s, i, actions[i]);

  const auto& costs = s.config.costs;
  const int due = s.year + kPipelineLead;
  for (std::size_t i = 0; i < kNumSeats; ++i) {
    auto& seat = s.seats[i];
    auto& rec = s.current.seats[i];
    const auto& a = actions[i];
    rec.submitted.allocation = a;
    for (std::size_t t = 0; t < kNumTracks; ++t) {
      const double spend = a.cash_capex[t] + a.credit_capex[t];
      if (spend <= 0.0) continue;
      const Track tr = track_at(t);
      double qty = 0;
      if (tr.kind == TrackKind::Explore) {
        qty = spend / costs[tr.tier].explore;
      } else {
        qty = std::min(spend / costs[tr.tier].develop, seat.sheet[undeveloped(tr.tier)]);
        seat.sheet[undeveloped(tr.tier)] -= qty;
      }
      enqueue(seat.sheet, t, qty, due);
      spend_cash(seat, a.cash_capex[t]);
      seat.sheet.debt += a.credit_capex[t];
      rec.capex_cash[t] = a.cash_capex[t];
      rec.capex_credit[t] = a.credit_capex[t];
    }
    spend_cash(seat, plans[i].payoff);
    seat.sheet.debt = std::max(seat.sheet.debt - plans[i].payoff, 0.0);
    rec.debt_payoff = plans[i].payoff;
    seat.sheet.cash -= plans[i].dividends;
    if (seat.sheet.cash < 0.0 && seat.sheet.cash > -1e-9) seat.sheet.cash = 0.0;
    seat.levered_cash = std::min(seat.levered_cash, seat.sheet.cash);
    rec.dividends = plans[i].dividends;
    seat.cumulative_dividends += plans[i].dividends;
  }
  check_accounting(s);
  s.allocation_done = true;
}

// ---------------------------------------------------------------------------
// Year end

/// Matures pipeline slots due next year, refreshes decision metrics, archives
/// the year record and moves to the next year (or ends the game after 2050).
inline void advance_year(GameState& s) {
  if (s.terminal || s.stage != Stage::Allocation || !s.allocation_done)
    throw Error(Errc::WrongStage, "advance_year requires a completed allocation stage");
  const int next = s.year + 1;
  for (std::size_t i = 0; i < kNumSeats; ++i) {
    auto& seat = s.seats[i];
    if (next <= kLastYear) {
      for (std::size_t t = 0; t < kNumTracks; ++t) {
        for (auto& slot : seat.sheet.pipeline[t]) {
          if (slot.quantity > 0.0 && slot.due_year == next) {
            seat.sheet[track_output(track_at(t))] += slot.quantity;
            slot = PipelineSlot{};
          }
        }
      }
    }
    auto& rec = s.current.seats[i];
    seat.metrics = compute_metrics(seat.sheet, s.prices, s.config, rec.net_income, seat.cumulative_dividends);
    rec.end_sheet = seat.sheet;
    rec.metrics = seat.metrics;
  }
  s.history.push_back(std::move(s.current));
  if (next > kLastYear) {
    s.terminal = true;
    s.current = YearRecord{};
    return;
  }
  s.year = next;
  s.stage = Stage::Production;
  s.allocation_done = false;
  engine_detail::begin_year(s);
}

}  // namespace tl
