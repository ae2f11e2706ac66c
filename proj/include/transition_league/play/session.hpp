#pragma once

// Human-versus-league games. One seat takes engine-unit decisions stage by
// stage; the other five are frozen league policies that sample one raw action
// per year when production executes and decode it against the live state at
// each later stage, exactly as in training.

#include <fmt/format.h>

#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <set>
#include <string>
#include <vector>

#include "../agent/action_layout.hpp"
#include "../agent/runner.hpp"
#include "../eval/strategy.hpp"
#include "../league/train.hpp"

namespace tl {

struct SessionRequest {
  std::string scenario_id;
  PortfolioVariant variant = PortfolioVariant::Balanced;
  std::vector<std::string> opponents;  // "main-0", "main-0@2" or "random"; cycled to fill five seats
  std::uint64_t seed = 0;
  std::size_t human_seat = 0;
};

struct PlayConfig {
  EngineConfig engine;
  ObservationConfig observation;
  PortfolioConfig portfolio;
};

inline SessionRequest parse_session_request(const Json& j) {
  static const std::set<std::string> known = {"scenario", "portfolio", "opponents", "seed", "human_seat"};
  for (const auto& [k, v] : j.items())
    if (!known.contains(k)) throw Error(Errc::InvalidSubmission, fmt::format("unknown field '{}'", k));
  SessionRequest r;
  try {
    r.scenario_id = j.at("scenario").get<std::string>();
    if (j.contains("portfolio")) {
      const auto name = j.at("portfolio").get<std::string>();
      const auto v = parse_variant(name);
      if (!v) throw Error(Errc::InvalidSubmission, fmt::format("portfolio: unknown variant '{}'", name));
      r.variant = *v;
    }
    r.opponents = j.at("opponents").get<std::vector<std::string>>();
    r.seed = j.value("seed", std::uint64_t{0});
    r.human_seat = j.value("human_seat", std::size_t{0});
  } catch (const Json::exception& e) {
    throw Error(Errc::InvalidSubmission, e.what());
  }
  if (r.opponents.empty()) throw Error(Errc::InvalidSubmission, "opponents: at least one required");
  if (r.human_seat >= kNumSeats) throw Error(Errc::InvalidSubmission, "human_seat: must be 0-5");
  return r;
}

namespace play_detail {

inline void invalid(const std::string& field, const std::string& what) {
  throw Error(Errc::InvalidSubmission, fmt::format("{}: {}", field, what));
}

/// Reads a non-negative finite number; absent keys read as 0.
inline double field(const Json& j, const std::string& key, const std::string& path) {
  if (!j.contains(key)) return 0.0;
  const auto& v = j.at(key);
  if (!v.is_number()) invalid(path, "must be a number");
  const double x = v.get<double>();
  if (!std::isfinite(x) || x < 0.0) invalid(path, "must be finite and non-negative");
  return x;
}

inline void only_keys(const Json& j, std::initializer_list<std::string_view> keys, const std::string& path) {
  if (!j.is_object()) invalid(path.empty() ? "body" : path, "must be an object");
  for (const auto& [k, v] : j.items())
    if (std::find(keys.begin(), keys.end(), k) == keys.end())
      invalid(path.empty() ? k : path + "." + k, "unknown field");
}

template <std::size_t N>
std::array<double, N> vec(const Json& j, const std::string& key, const std::string& path) {
  std::array<double, N> out{};
  if (!j.contains(key)) return out;
  const auto& a = j.at(key);
  if (!a.is_array() || a.size() != N) invalid(path, fmt::format("must be an array of {} numbers", N));
  for (std::size_t i = 0; i < N; ++i) {
    Json wrap = {{"x", a[i]}};
    out[i] = field(wrap, "x", fmt::format("{}[{}]", path, i));
  }
  return out;
}

}  // namespace play_detail

/// Field bounds for the human seat's current stage, in engine units.
inline Json stage_form(const GameState& s, std::size_t seat) {
  const auto& sheet = s.seats[seat].sheet;
  const auto layout = action_layout_descriptor();
  Json dims = Json::array();
  for (const auto& d : layout.at("dimensions"))
    if (d.at("stage") == to_string(s.stage)) dims.push_back(d);
  Json fields = Json::array();
  auto add = [&](std::string name, double max, std::string unit) {
    fields.push_back({{"name", std::move(name)}, {"min", 0.0}, {"max", finite_or_null(max)}, {"unit", std::move(unit)}});
  };
  switch (s.stage) {
    case Stage::Production:
      for (auto t : kAllTiers) add(fmt::format("volume[{}]", index(t)), sheet[developed(t)], "bn boe");
      break;
    case Stage::Borrowing:
      add("amount", credit_headroom(current_equity(s, seat), sheet.debt, s.config.finance), "$bn");
      break;
    case Stage::Trading:
      add("bid.cash_price", std::numeric_limits<double>::infinity(), "$bn per unit");
      add("bid.cash_volume", s.metrics_now().lc_supply, "units");
      add("bid.credit_price", std::numeric_limits<double>::infinity(), "$bn per unit");
      add("bid.credit_volume", s.metrics_now().lc_supply, "units");
      for (auto a : kAllAssets) {
        add(fmt::format("orders[{}].sell_volume", index(a)), sheet[a], "units");
        add(fmt::format("orders[{}].sell_price", index(a)), std::numeric_limits<double>::infinity(), "$bn per unit");
        add(fmt::format("orders[{}].buy_volume", index(a)), std::numeric_limits<double>::infinity(), "units");
        add(fmt::format("orders[{}].buy_price", index(a)), std::numeric_limits<double>::infinity(), "$bn per unit");
      }
      break;
    case Stage::Allocation:
      for (std::size_t t = 0; t < kNumTracks; ++t) add(fmt::format("cash_capex[{}]", t), sheet.cash, "$bn");
      for (std::size_t t = 0; t < kNumTracks; ++t)
        add(fmt::format("credit_capex[{}]", t), std::numeric_limits<double>::infinity(), "$bn");
      add("debt_payoff", std::min(sheet.cash, sheet.debt), "$bn");
      add("dividends", std::max(sheet.cash - s.seats[seat].levered_cash, 0.0), "$bn");
      break;
  }
  Json tracks = Json::array();
  for (std::size_t t = 0; t < kNumTracks; ++t) tracks.push_back(track_name(t));
  Json assets = Json::array();
  for (auto a : kAllAssets) assets.push_back(to_string(a));
  return {{"stage", to_string(s.stage)},
          {"layout_version", kActionLayoutVersion},
          {"fields", fields},
          {"layout_dimensions", dims},
          {"tracks", tracks},
          {"assets", assets}};
}

class PlaySession {
 public:
  PlaySession(std::string id, const Scenario& scenario, const League& league, PolicyCache& cache,
              const SessionRequest& req, const PlayConfig& cfg, std::filesystem::path transcript_dir)
      : id_(std::move(id)), human_(req.human_seat), cfg_(cfg), dir_(std::move(transcript_dir)), request_(req) {
    SeatArray books{};
    std::size_t next = 0;
    for (std::size_t i = 0; i < kNumSeats; ++i) {
      if (i == human_) {
        books[i] = make_portfolio(req.variant, cfg.portfolio, cfg.engine.costs);
        info_[i] = {"human", std::string(to_string(req.variant)), "none"};
        continue;
      }
      const auto& name = req.opponents[next++ % req.opponents.size()];
      if (name == "random") {
        controllers_[i] = random_controller();
        books[i] = make_portfolio(req.variant, cfg.portfolio, cfg.engine.costs);
        info_[i] = {"random", std::string(to_string(req.variant)), "none"};
        continue;
      }
      const Snapshot snap = resolve(league, name, cache);
      controllers_[i] = policy_controller(snap.params);
      constraints_[i] = snap.constraint;
      books[i] = make_portfolio(snap.variant, cfg.portfolio, cfg.engine.costs);
      info_[i] = seat_info(snap.key, snap.variant, snap.constraint);
    }
    state_ = new_game(books, scenario, cfg.engine, req.seed);
    for (std::size_t i = 0; i < kNumSeats; ++i) rngs_[i] = Rng(seat_policy_seed(req.seed, i));
    std::filesystem::create_directories(dir_);
    append({{"event", "create"},
            {"scenario", scenario.id},
            {"portfolio", to_string(req.variant)},
            {"opponents", req.opponents},
            {"seed", req.seed},
            {"human_seat", human_}});
  }

  const std::string& id() const { return id_; }
  bool terminal() const {
    std::lock_guard lock(mutex_);
    return state_.terminal;
  }

  Json view() const {
    std::lock_guard lock(mutex_);
    return view_locked();
  }

  /// Runs one stage with the human's fragment. Infeasible fragments throw
  /// InvalidSubmission before any state changes.
  Json submit(Stage stage, const Json& fragment) {
    std::lock_guard lock(mutex_);
    if (state_.terminal) throw Error(Errc::WrongStage, "game is terminal");
    if (stage != state_.stage)
      throw Error(Errc::WrongStage,
                  fmt::format("submitted {}, cursor at {}", to_string(stage), to_string(state_.stage)));
    const auto& me = state_.seats[human_];
    const double cash_before = me.sheet.cash;
    const int year = state_.year;
    Json outcome = {{"year", year}, {"stage", to_string(stage)}};

    switch (stage) {
      case Stage::Production: {
        const auto human = parse_production(fragment);
        sample_agents();
        std::array<ProductionAction, kNumSeats> a;
        for (std::size_t i = 0; i < kNumSeats; ++i) a[i] = i == human_ ? human : decode_production(u_[i], state_, i);
        run_production(state_, a);
        const auto& r = state_.current.seats[human_];
        outcome["prices"] = state_.prices;
        outcome["produced"] = r.produced;
        outcome["rejected"] = r.rejected;
        outcome["oil_margin"] = r.oil_margin;
        outcome["gas_margin"] = r.gas_margin;
        outcome["lc_income"] = r.lc_income;
        outcome["interest_paid"] = r.interest_paid;
        break;
      }
      case Stage::Borrowing: {
        const auto human = parse_borrow(fragment);
        std::array<BorrowRequest, kNumSeats> a;
        for (std::size_t i = 0; i < kNumSeats; ++i) a[i] = i == human_ ? human : decode_borrow(u_[i], state_, i);
        run_borrowing(state_, a);
        outcome["borrowed"] = state_.current.seats[human_].borrowed;
        break;
      }
      case Stage::Trading: {
        const auto human = parse_trading(fragment);
        std::array<TradingAction, kNumSeats> a;
        for (std::size_t i = 0; i < kNumSeats; ++i)
          a[i] = i == human_ ? human : decode_trading(u_[i], state_, i, constraints_[i]);
        run_trading(state_, a);
        const auto& auc = state_.current.auction;
        Json fills = Json::array();
        for (std::size_t k = 0; k < auc.lines.size(); ++k)
          if (auc.lines[k].seat == human_)
            fills.push_back({{"funding", auc.lines[k].funding},
                             {"price", auc.lines[k].price},
                             {"volume", auc.lines[k].volume},
                             {"filled", auc.fills[k]},
                             {"voided", static_cast<bool>(auc.voided[k])}});
        Json trades = Json::array();
        for (const auto& t : state_.current.trades)
          if (t.buyer == human_ || t.seller == human_)
            trades.push_back({{"asset", t.asset},
                              {"side", t.buyer == human_ ? "buy" : "sell"},
                              {"volume", t.volume},
                              {"price", t.price}});
        outcome["auction"] = {{"supply", auc.supply}, {"filled_total", auc.filled_total()}, {"own_lines", fills}};
        outcome["trades"] = trades;
        break;
      }
      case Stage::Allocation: {
        const auto human = parse_allocation(fragment);
        std::array<AllocationAction, kNumSeats> a;
        for (std::size_t i = 0; i < kNumSeats; ++i) a[i] = i == human_ ? human : decode_allocation(u_[i], state_, i);
        run_allocation(state_, a);
        const auto& r = state_.current.seats[human_];
        outcome["dividends"] = r.dividends;
        outcome["debt_payoff"] = r.debt_payoff;
        const double cash_after_alloc = state_.seats[human_].sheet.cash;
        advance_year(state_);
        outcome["cash_delta"] = cash_after_alloc - cash_before;
        append({{"event", "stage"}, {"year", year}, {"stage", to_string(stage)}, {"fragment", fragment}});
        if (state_.terminal) save_game_log(dir_ / (id_ + ".json"), log_locked());
        outcome["view"] = view_locked();
        return outcome;
      }
    }
    outcome["cash_delta"] = state_.seats[human_].sheet.cash - cash_before;
    append({{"event", "stage"}, {"year", year}, {"stage", to_string(stage)}, {"fragment", fragment}});
    outcome["view"] = view_locked();
    return outcome;
  }

  /// Full game record; available once the game has finished.
  GameLog log() const {
    std::lock_guard lock(mutex_);
    if (!state_.terminal) throw Error(Errc::WrongStage, "log is available once the game has finished");
    return log_locked();
  }

  std::filesystem::path transcript_path() const { return dir_ / (id_ + ".jsonl"); }
  std::filesystem::path log_path() const { return dir_ / (id_ + ".json"); }

 private:
  static Snapshot resolve(const League& league, const std::string& name, PolicyCache& cache) {
    const auto at = name.find('@');
    const std::string player_id = name.substr(0, at);
    const LeaguePlayer* p = nullptr;
    for (const auto& q : league.players)
      if (q.id == player_id) p = &q;
    if (!p) throw Error(Errc::CheckpointLoadError, fmt::format("opponent '{}' is not in the league", name));
    if (at == std::string::npos) return latest_snapshot(league, *p, cache);
    for (const auto& rel : p->checkpoints)
      if (checkpoint_key(rel) == name) return make_snapshot(league, *p, rel, cache);
    throw Error(Errc::CheckpointLoadError, fmt::format("no checkpoint '{}'", name));
  }

  void sample_agents() {
    for (std::size_t i = 0; i < kNumSeats; ++i) {
      if (i == human_) continue;
      const auto o = build_observation(state_, i, cfg_.observation);
      u_[i] = squash_all(controllers_[i](o, rngs_[i]).action);
    }
  }

  ProductionAction parse_production(const Json& j) const {
    play_detail::only_keys(j, {"volume"}, "");
    ProductionAction a;
    a.volume = play_detail::vec<kNumTiers>(j, "volume", "volume");
    const auto& sheet = state_.seats[human_].sheet;
    for (auto t : kAllTiers)
      if (engine_detail::exceeds(a.volume[index(t)], sheet[developed(t)]))
        play_detail::invalid(fmt::format("volume[{}]", index(t)),
                             fmt::format("{} requested, {} developed", a.volume[index(t)], sheet[developed(t)]));
    return a;
  }

  BorrowRequest parse_borrow(const Json& j) const {
    play_detail::only_keys(j, {"amount"}, "");
    BorrowRequest r{play_detail::field(j, "amount", "amount")};
    const auto& sheet = state_.seats[human_].sheet;
    const double headroom = credit_headroom(current_equity(state_, human_), sheet.debt, state_.config.finance);
    if (engine_detail::exceeds(r.amount, headroom))
      play_detail::invalid("amount", fmt::format("{} requested, {} headroom", r.amount, headroom));
    return r;
  }

  TradingAction parse_trading(const Json& j) const {
    using namespace play_detail;
    only_keys(j, {"bid", "orders"}, "");
    TradingAction a;
    if (j.contains("bid")) {
      const auto& b = j.at("bid");
      only_keys(b, {"cash_price", "cash_volume", "credit_price", "credit_volume"}, "bid");
      a.bid = {field(b, "cash_price", "bid.cash_price"), field(b, "cash_volume", "bid.cash_volume"),
               field(b, "credit_price", "bid.credit_price"), field(b, "credit_volume", "bid.credit_volume")};
    }
    if (j.contains("orders")) {
      const auto& os = j.at("orders");
      if (!os.is_array() || os.size() != kNumTradable) invalid("orders", fmt::format("must be an array of {}", kNumTradable));
      for (std::size_t k = 0; k < kNumTradable; ++k) {
        const auto p = fmt::format("orders[{}]", k);
        only_keys(os[k], {"sell_volume", "sell_price", "buy_volume", "buy_price"}, p);
        a.orders[k] = {field(os[k], "sell_volume", p + ".sell_volume"), field(os[k], "sell_price", p + ".sell_price"),
                       field(os[k], "buy_volume", p + ".buy_volume"), field(os[k], "buy_price", p + ".buy_price")};
      }
    }
    const auto& seat = state_.seats[human_];
    const auto& b = a.bid;
    double committed = 0;
    if (b.cash_volume > 0.0) {
      if (!(b.cash_price > 0.0)) invalid("bid.cash_price", "must be positive for a cash line");
      if (!engine_detail::cash_line_feasible(seat, b.cash_price, b.cash_volume))
        invalid("bid.cash_volume", fmt::format("costs {} with {} cash", b.cash_price * b.cash_volume, seat.sheet.cash));
      committed = b.cash_price * b.cash_volume;
    }
    if (b.credit_volume > 0.0) {
      if (!(b.credit_price > 0.0)) invalid("bid.credit_price", "must be positive for a credit line");
      const double room = auction_credit_headroom(state_, human_, b.cash_price, b.cash_volume, b.credit_price);
      if (engine_detail::exceeds(b.credit_price * b.credit_volume, room))
        invalid("bid.credit_volume", fmt::format("draws {} with {} credit headroom", b.credit_price * b.credit_volume, room));
    }
    double escrow = 0;
    for (auto asset : kAllAssets) {
      const auto& o = a.orders[index(asset)];
      const auto p = fmt::format("orders[{}]", index(asset));
      if (engine_detail::exceeds(o.sell_volume, seat.sheet[asset]))
        invalid(p + ".sell_volume", fmt::format("{} offered, {} held", o.sell_volume, seat.sheet[asset]));
      if (o.buy_volume > 0.0 && !(o.buy_price > 0.0)) invalid(p + ".buy_price", "must be positive for a buy order");
      escrow += o.buy_volume * o.buy_price;
    }
    if (engine_detail::exceeds(escrow + committed, seat.sheet.cash))
      invalid("orders", fmt::format("buy escrow {} plus cash bid {} exceeds {} cash", escrow, committed, seat.sheet.cash));
    return a;
  }

  AllocationAction parse_allocation(const Json& j) const {
    using namespace play_detail;
    only_keys(j, {"cash_capex", "credit_capex", "debt_payoff", "dividends"}, "");
    AllocationAction a;
    a.cash_capex = vec<kNumTracks>(j, "cash_capex", "cash_capex");
    a.credit_capex = vec<kNumTracks>(j, "credit_capex", "credit_capex");
    a.debt_payoff = field(j, "debt_payoff", "debt_payoff");
    a.dividends = field(j, "dividends", "dividends");
    try {
      engine_detail::plan_allocation(state_, human_, a);
    } catch (const Error& e) {
      if (e.code() != Errc::OverAllocation) throw;
      invalid("allocation", e.what());
    }
    return a;
  }

  Json view_locked() const {
    const auto& s = state_;
    const auto& me = s.seats[human_];
    Json opponents = Json::array();
    const YearRecord* last = s.history.empty() ? nullptr : &s.history.back();
    for (std::size_t k = 1; k < kNumSeats; ++k) {
      const std::size_t i = (human_ + k) % kNumSeats;
      Json o = {{"seat", i},
                {"policy", info_[i].policy},
                {"portfolio", info_[i].portfolio},
                {"equity", s.seats[i].metrics.equity},
                {"cumulative_dividends", s.seats[i].cumulative_dividends}};
      o["last_dividends"] = last ? last->seats[i].dividends : 0.0;
      o["last_oil_produced"] = last ? last->seats[i].oil_produced() : 0.0;
      o["last_gas_produced"] = last ? last->seats[i].gas_produced() : 0.0;
      opponents.push_back(std::move(o));
    }
    Json v = {{"session", id_},
              {"year", s.year},
              {"stage", s.terminal ? "finished" : to_string(s.stage)},
              {"terminal", s.terminal},
              {"human_seat", human_},
              {"own",
               {{"balance_sheet", me.sheet},
                {"metrics", metrics_json(me.metrics)},
                {"levered_cash", me.levered_cash},
                {"cumulative_dividends", me.cumulative_dividends}}},
              {"scenario", {{"id", s.scenario.id}, {"year_metrics", s.metrics_now()}}},
              {"prices", s.prices},
              {"opponents", opponents}};
    if (s.terminal) {
      Json board = Json::array();
      double total = 0;
      for (const auto& seat : s.seats) total += seat.cumulative_dividends;
      for (std::size_t i = 0; i < kNumSeats; ++i)
        board.push_back({{"seat", i},
                         {"policy", info_[i].policy},
                         {"cumulative_dividends", s.seats[i].cumulative_dividends},
                         {"dividend_share", total > 0 ? s.seats[i].cumulative_dividends / total : 0.0}});
      v["scoreboard"] = board;
    } else {
      v["form"] = stage_form(s, human_);
    }
    return v;
  }

  static Json metrics_json(const DecisionMetrics& m) {
    Json j;
    to_json(j, m);
    return j;
  }

  GameLog log_locked() const {
    GameHeader h = make_header(state_);
    h.matchup = fmt::format("play-{}", request_.seed);
    h.seats = info_;
    return make_log(state_, std::move(h));
  }

  void append(const Json& event) {
    std::ofstream out(transcript_path(), std::ios::app);
    if (!out) throw Error(Errc::IoError, "cannot append to " + transcript_path().string());
    out << event.dump() << "\n";
  }

  std::string id_;
  std::size_t human_;
  PlayConfig cfg_;
  std::filesystem::path dir_;
  SessionRequest request_;
  GameState state_;
  std::array<Controller, kNumSeats> controllers_{};
  std::array<ConstraintProfile, kNumSeats> constraints_{};
  std::array<SeatInfo, kNumSeats> info_{};
  std::array<Rng, kNumSeats> rngs_{};
  std::array<Unit, kNumSeats> u_{};
  mutable std::mutex mutex_;
};

/// Owns the sessions of one server process.
class PlayService {
 public:
  PlayService(League league, ScenarioSet scenarios, PlayConfig cfg, std::filesystem::path transcripts)
      : league_(std::move(league)), scenarios_(std::move(scenarios)), cfg_(cfg), dir_(std::move(transcripts)) {}

  std::shared_ptr<PlaySession> create(const SessionRequest& req) {
    const Scenario* sc = scenarios_.find(req.scenario_id);
    if (!sc) throw Error(Errc::UnknownScenario, fmt::format("scenario '{}'", req.scenario_id));
    std::string id;
    {
      std::lock_guard lock(mutex_);
      id = fmt::format("s{:04d}", ++counter_);
    }
    auto session = std::make_shared<PlaySession>(id, *sc, league_, cache_, req, cfg_, dir_);
    std::lock_guard lock(mutex_);
    sessions_.emplace(id, session);
    return session;
  }

  std::shared_ptr<PlaySession> get(const std::string& id) const {
    std::lock_guard lock(mutex_);
    auto it = sessions_.find(id);
    if (it == sessions_.end()) throw Error(Errc::SessionNotFound, fmt::format("session '{}'", id));
    return it->second;
  }

  const ScenarioSet& scenarios() const { return scenarios_; }
  const League& league() const { return league_; }

 private:
  League league_;
  ScenarioSet scenarios_;
  PlayConfig cfg_;
  std::filesystem::path dir_;
  PolicyCache cache_;
  mutable std::mutex mutex_;
  std::size_t counter_ = 0;
  std::map<std::string, std::shared_ptr<PlaySession>> sessions_;
};

}  // namespace tl
