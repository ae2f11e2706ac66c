#pragma once

// Plays full games: one policy step per seat per year from the start-of-year
// observation, decoded stage by stage against the live state.

#include <functional>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "../core/rng.hpp"
#include "../engine/game.hpp"
#include "../engine/game_log.hpp"
#include "constraint.hpp"
#include "decode.hpp"
#include "observation.hpp"
#include "reward.hpp"

namespace tl {

struct StepOutput {
  RawAction action{};
  double log_prob = 0;
  double value = 0;
  std::vector<double> input;  // the (normalized) vector the policy consumed
};

using Controller = std::function<StepOutput(std::span<const double> observation, Rng& rng)>;

struct SeatSetup {
  Controller controller;
  ConstraintProfile constraint;
  SeatInfo info;
  bool record = false;
};

struct Transition {
  std::vector<double> input;
  std::vector<double> observation;  // raw, for normalizer updates
  RawAction action{};
  double log_prob = 0;
  double value = 0;
  double reward = 0;
  bool done = false;
};

using Trajectory = std::vector<Transition>;

struct GameSpec {
  Scenario scenario;
  SeatArray portfolios{};
  EngineConfig engine;
  ObservationConfig observation;
  RewardSpec reward;
  std::uint64_t seed = 0;
  std::string matchup;
};

struct GameResult {
  GameLog log;
  std::array<Trajectory, kNumSeats> trajectories;

  double cumulative_dividends(std::size_t seat) const { return log.cumulative_dividends(seat); }
};

inline Controller null_controller() {
  return [](std::span<const double>, Rng&) {
    StepOutput out;
    out.action.fill(-std::numeric_limits<double>::infinity());
    return out;
  };
}

/// Raw actions drawn i.i.d. standard normal: an untrained, state-blind policy.
inline Controller random_controller() {
  return [](std::span<const double>, Rng& rng) {
    StepOutput out;
    for (auto& x : out.action) x = standard_normal(rng);
    return out;
  };
}

inline std::uint64_t seat_policy_seed(std::uint64_t game_seed, std::size_t seat) {
  return derive_seed(game_seed, {static_cast<std::uint64_t>(Stream::Policy), seat});
}

inline GameResult play_game(const GameSpec& spec, std::span<const SeatSetup, kNumSeats> seats) {
  GameState s = new_game(spec.portfolios, spec.scenario, spec.engine, spec.seed);
  std::array<Rng, kNumSeats> rngs;
  for (std::size_t i = 0; i < kNumSeats; ++i) rngs[i] = Rng(seat_policy_seed(spec.seed, i));

  GameResult result;
  while (!s.terminal) {
    std::array<Unit, kNumSeats> u;
    std::array<std::size_t, kNumSeats> step_index{};
    for (std::size_t i = 0; i < kNumSeats; ++i) {
      auto o = build_observation(s, i, spec.observation);
      StepOutput step = seats[i].controller(o, rngs[i]);
      u[i] = squash_all(step.action);
      if (seats[i].record) {
        step_index[i] = result.trajectories[i].size();
        result.trajectories[i].push_back(
            {std::move(step.input), std::move(o), step.action, step.log_prob, step.value, 0.0, false});
      }
    }

    std::array<ProductionAction, kNumSeats> prod;
    for (std::size_t i = 0; i < kNumSeats; ++i) prod[i] = decode_production(u[i], s, i);
    run_production(s, prod);

    std::array<BorrowRequest, kNumSeats> borrow;
    for (std::size_t i = 0; i < kNumSeats; ++i) borrow[i] = decode_borrow(u[i], s, i);
    run_borrowing(s, borrow);

    std::array<TradingAction, kNumSeats> trade;
    for (std::size_t i = 0; i < kNumSeats; ++i) trade[i] = decode_trading(u[i], s, i, seats[i].constraint);
    run_trading(s, trade);

    std::array<AllocationAction, kNumSeats> alloc;
    for (std::size_t i = 0; i < kNumSeats; ++i) alloc[i] = decode_allocation(u[i], s, i);
    run_allocation(s, alloc);
    advance_year(s);

    for (std::size_t i = 0; i < kNumSeats; ++i) {
      if (!seats[i].record) continue;
      auto& t = result.trajectories[i][step_index[i]];
      t.reward = compute_reward(s, i, spec.reward);
      t.done = s.terminal;
    }
  }

  GameHeader header = make_header(s);
  header.matchup = spec.matchup;
  for (std::size_t i = 0; i < kNumSeats; ++i) header.seats[i] = seats[i].info;
  result.log = make_log(s, std::move(header));
  return result;
}

/// Seats whose cumulative dividends are the game maximum.
inline std::vector<std::size_t> game_winners(const GameLog& log) {
  std::array<double, kNumSeats> d;
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < kNumSeats; ++i) best = std::max(best, d[i] = log.cumulative_dividends(i));
  std::vector<std::size_t> w;
  for (std::size_t i = 0; i < kNumSeats; ++i)
    if (d[i] >= best) w.push_back(i);
  return w;
}

}  // namespace tl
