#pragma once

// League training: one learner at a time plays full games against frozen
// opponents; rollouts run in parallel, aggregation and updates do not.

#include <functional>
#include <limits>
#include <memory>
#include <numeric>

#include "../agent/runner.hpp"
#include "../core/parallel.hpp"
#include "../rl/ppo.hpp"
#include "../scenario.hpp"
#include "league.hpp"

namespace tl {

struct TrainConfig {
  int epochs = 408;
  int games_per_epoch = 1;
  PpoConfig ppo;
  int stall_epochs = 5;
  RewardSpec reward;
  ObservationConfig observation;
  EngineConfig engine;
  PortfolioConfig portfolio;
  RandomizationMargins margins;
  std::size_t workers = 1;
  bool main_first = true;  // mains before exploiters within an iteration
};

/// Desk-scale preset: fewer, larger epochs and a faster optimizer so two
/// iterations of the small roster finish in minutes on one core.
inline TrainConfig desk_train_config() {
  TrainConfig c;
  c.epochs = 200;
  c.games_per_epoch = 32;
  c.ppo.lr_actor = 1e-3;
  c.ppo.minibatch = 256;
  c.ppo.target_kl = 0.03;
  return c;
}

inline PolicyShape desk_policy_shape() {
  PolicyShape s;
  s.hidden = {64, 64};
  return s;
}

struct EpochMetrics {
  int iteration = 0;
  std::string player;
  int epoch = 0;
  int games = 0;
  double mean_reward = 0;  // mean undiscounted episode return
  double win_rate = 0;     // pairwise, over all opponent seats
  double self_play_rate = std::numeric_limits<double>::quiet_NaN();
  bool gated = false;
  Weighting past_weighting = Weighting::Hard;
  Weighting opponent_weighting = Weighting::Hard;
  PpoStats ppo;
};

struct GameTask {
  Scenario scenario;
  std::uint64_t seed = 0;
  std::size_t learner_seat = 0;
  Selection selection;
};

struct TrainHooks {
  std::function<void(const EpochMetrics&)> on_epoch;
  std::function<void(const GameTask&, const GameResult&)> on_game;
};

inline SeatInfo seat_info(const std::string& policy, PortfolioVariant v, const ConstraintProfile& c) {
  return {policy, std::string(to_string(v)), to_string(c)};
}

/// Six seats: the learner at `task.learner_seat`, opponents in order around it.
inline GameResult play_training_game(const GameTask& task, const LeaguePlayer& learner,
                                     std::shared_ptr<const PolicyParams> params, const TrainConfig& cfg) {
  GameSpec spec;
  spec.scenario = task.scenario;
  spec.engine = cfg.engine;
  spec.observation = cfg.observation;
  spec.reward = cfg.reward;
  spec.seed = task.seed;
  spec.matchup = std::string(to_string(task.selection.mode.kind));
  std::array<SeatSetup, kNumSeats> seats;
  std::size_t next = 0;
  for (std::size_t i = 0; i < kNumSeats; ++i) {
    if (i == task.learner_seat) {
      seats[i] = {policy_controller(params), learner.constraint,
                  seat_info(learner.id + "@learner", learner.variant, learner.constraint), true};
      spec.portfolios[i] = make_portfolio(learner.variant, cfg.portfolio, cfg.engine.costs);
      continue;
    }
    const Snapshot& o = task.selection.opponents[next++];
    seats[i] = {policy_controller(o.params), o.constraint, seat_info(o.key, o.variant, o.constraint), false};
    spec.portfolios[i] = make_portfolio(o.variant, cfg.portfolio, cfg.engine.costs);
  }
  return play_game(spec, seats);
}

namespace train_detail {

inline Learner initial_learner(const League& league, const LeaguePlayer& p, int iteration, std::string& start_rel) {
  if (p.kind == PlayerKind::Main || p.trained_iterations() == 0) {
    start_rel = p.checkpoints.back();
    return load_checkpoint(league.resolve(start_rel)).learner;
  }
  start_rel.clear();
  const auto idx = league.index_of(p.id);
  return Learner{make_policy(league.shape, derive_seed(league.seed, {idx, static_cast<std::uint64_t>(iteration)})),
                 {}, {}, {}};
}

}  // namespace train_detail

/// Trains one player for one iteration and registers its final checkpoint.
/// The league is only modified when the whole iteration succeeds.
inline IterationRecord train_iteration(League& league, const std::string& learner_id, int iteration,
                                       const ScenarioSet& scenarios, const TrainConfig& cfg,
                                       const TrainHooks& hooks = {}) {
  cfg.ppo.validate();
  if (scenarios.empty()) throw Error(Errc::EmptyPool, "no scenarios to train on");
  League next = league;
  LeaguePlayer& me = next.player(learner_id);
  const std::uint64_t player_idx = next.index_of(learner_id);
  PolicyCache cache;

  IterationRecord rec;
  rec.iteration = iteration;
  rec.player = learner_id;
  Learner learner = train_detail::initial_learner(next, me, iteration, rec.start_checkpoint);
  rec.start_hash = params_hash(learner.params);

  LearnerState st;
  st.learner_id = learner_id;
  st.schedule = me.kind == PlayerKind::Main ? main_schedule(iteration) : exploiter_schedule(iteration);
  st.matchmaker.stall_epochs = cfg.stall_epochs;
  if (me.kind == PlayerKind::Exploiter && rec.start_checkpoint.empty()) {
    // Reset: the fresh initialization becomes the whole past pool.
    const auto rel = checkpoint_rel(me.id, iteration, 0);
    save_checkpoint(next.resolve(rel), learner, {me.id, iteration, {{"reset", true}}});
    me.past_pool = {rel};
  }
  for (const auto& rel : me.past_pool) st.past.push_back(make_snapshot(next, me, rel, cache));
  st.self_opponent = st.past.back();
  for (const auto& id : opponent_candidates(next, learner_id))
    st.combo_players.push_back(latest_snapshot(next, next.player(id), cache));
  st.pool = CombinationPool(build_opponent_combinations(next, learner_id));

  auto sampler = make_sampler(scenarios, derive_seed(next.seed, {1, player_idx, static_cast<std::uint64_t>(iteration)}));
  Rng match_rng(derive_seed(next.seed, {2, player_idx, static_cast<std::uint64_t>(iteration)}));
  Rng update_rng(derive_seed(next.seed, {3, player_idx, static_cast<std::uint64_t>(iteration)}));
  int snapshot_count = static_cast<int>(me.past_pool.size());

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::vector<GameTask> tasks(static_cast<std::size_t>(cfg.games_per_epoch));
    for (std::size_t g = 0; g < tasks.size(); ++g) {
      auto& t = tasks[g];
      const Scenario* base = nullptr;
      std::tie(base, sampler) = next_scenario(std::move(sampler), scenarios);
      t.seed = derive_seed(next.seed, {4, player_idx, static_cast<std::uint64_t>(iteration),
                                       static_cast<std::uint64_t>(epoch), g});
      Rng noise(derive_seed(t.seed, {static_cast<std::uint64_t>(Stream::Scenario)}));
      t.scenario = perturb(*base, cfg.margins, noise);
      t.learner_seat = static_cast<std::size_t>(match_rng() % kNumSeats);
      t.selection = select_opponents(st, next.table, match_rng);
    }

    auto frozen = std::make_shared<const PolicyParams>(learner.params);
    std::vector<GameResult> results(tasks.size());
    parallel_for(tasks.size(), cfg.workers,
                 [&](std::size_t g) { results[g] = play_training_game(tasks[g], me, frozen, cfg); });

    EpochMetrics m;
    m.iteration = iteration;
    m.player = learner_id;
    m.epoch = epoch;
    m.games = static_cast<int>(tasks.size());
    double outcomes = 0, outcome_count = 0, sp_outcomes = 0, sp_count = 0;
    std::vector<Trajectory> trajs;
    for (std::size_t g = 0; g < tasks.size(); ++g) {
      const auto& t = tasks[g];
      const auto& r = results[g];
      if (hooks.on_game) hooks.on_game(t, r);
      const double mine = r.cumulative_dividends(t.learner_seat);
      double combo_sum = 0;
      std::size_t k = 0;
      for (std::size_t i = 0; i < kNumSeats; ++i) {
        if (i == t.learner_seat) continue;
        const Snapshot& o = t.selection.opponents[k++];
        const double w = pairwise_outcome(mine, r.cumulative_dividends(i));
        outcomes += w;
        outcome_count += 1;
        combo_sum += w;
        switch (t.selection.mode.kind) {
          case ModeKind::SelfPlay:
            sp_outcomes += w;
            sp_count += 1;
            break;
          case ModeKind::PfspPast: next.table.record(learner_id, o.key, w); break;
          case ModeKind::PfspOpponent: next.table.record(learner_id, o.player_id, w); break;
        }
      }
      if (t.selection.mode.kind == ModeKind::PfspOpponent)
        next.table.record(learner_id, t.selection.combination, combo_sum / kOpponentSeats);
      double ret = 0;
      for (const auto& step : r.trajectories[t.learner_seat]) ret += step.reward;
      m.mean_reward += ret / static_cast<double>(tasks.size());
      trajs.push_back(r.trajectories[t.learner_seat]);
    }
    m.win_rate = outcome_count > 0 ? outcomes / outcome_count : 0.0;

    m.ppo = ppo_update(learner, make_samples(trajs, cfg.ppo), cfg.ppo, update_rng, cfg.workers);
    for (const auto& traj : trajs)
      for (const auto& step : traj) learner.params.norm.update(step.observation);

    if (sp_count > 0) {
      m.self_play_rate = sp_outcomes / sp_count;
      if (gate_selfplay(m.self_play_rate)) {
        const auto rel = checkpoint_rel(me.id, iteration, snapshot_count++);
        save_checkpoint(next.resolve(rel), learner.params, {me.id, iteration, {{"gated", true}}});
        m.gated = apply_gate(st, m.self_play_rate, make_snapshot(next, me, rel, cache));
        me.past_pool.push_back(rel);
      }
    }
    st.matchmaker = observe_epoch(st.matchmaker, m.win_rate);
    m.past_weighting = st.matchmaker.past;
    m.opponent_weighting = st.matchmaker.opponent;
    if (hooks.on_epoch) hooks.on_epoch(m);
    rec.games += m.games;
  }

  rec.epochs = cfg.epochs;
  rec.checkpoint = checkpoint_rel(me.id, iteration);
  rec.final_hash = params_hash(learner.params);
  rec.snapshots = snapshot_count;
  CheckpointMeta meta{me.id, iteration,
                      {{"kind", to_string(me.kind)},
                       {"variant", to_string(me.variant)},
                       {"constraint", to_string(me.constraint)},
                       {"parent", rec.start_checkpoint}}};
  save_checkpoint(next.resolve(rec.checkpoint), learner, meta);
  me.checkpoints.push_back(rec.checkpoint);
  if (me.kind == PlayerKind::Main) me.past_pool.push_back(rec.checkpoint);
  next.history.push_back(rec);
  save_manifest(next);
  league = std::move(next);
  return rec;
}

/// Runs iterations completed+1 .. `iterations`: mains in roster order, then
/// exploiters (or the reverse when `main_first` is false).
inline void train_league(League& league, const ScenarioSet& scenarios, const TrainConfig& cfg, int iterations,
                         const TrainHooks& hooks = {}) {
  for (int it = league.completed_iterations + 1; it <= iterations; ++it) {
    std::vector<std::string> order;
    for (int pass = 0; pass < 2; ++pass) {
      const PlayerKind kind = (pass == 0) == cfg.main_first ? PlayerKind::Main : PlayerKind::Exploiter;
      for (const auto& p : league.players)
        if (p.kind == kind) order.push_back(p.id);
    }
    for (const auto& id : order) train_iteration(league, id, it, scenarios, cfg, hooks);
    league.completed_iterations = it;
    save_manifest(league);
  }
}

// ---------------------------------------------------------------------------
// Evaluation against an untrained random seat

struct RandomEvalResult {
  double win_rate = 0;  // learner beats the random seat (ties half)
  int games = 0;
  double mean_dividends = 0;
  double mean_random_dividends = 0;
};

/// Learner in seat 0 with its latest checkpoint, a random-action seat with
/// the same portfolio in seat 1, remaining seats filled by the other league
/// players in roster order.
inline RandomEvalResult evaluate_vs_random(const League& league, const std::string& player_id,
                                           const ScenarioSet& scenarios, int games, std::uint64_t seed,
                                           const TrainConfig& cfg) {
  PolicyCache cache;
  const auto& me = league.player(player_id);
  const Snapshot mine = latest_snapshot(league, me, cache);
  std::vector<Snapshot> others;
  for (const auto& p : league.players)
    if (p.id != player_id) others.push_back(latest_snapshot(league, p, cache));
  if (others.empty()) others.push_back(mine);

  std::vector<std::pair<double, double>> out(static_cast<std::size_t>(games));
  parallel_for(out.size(), cfg.workers, [&](std::size_t g) {
    GameSpec spec;
    const std::uint64_t game_seed = derive_seed(seed, {5, g});
    Rng noise(derive_seed(game_seed, {static_cast<std::uint64_t>(Stream::Scenario)}));
    spec.scenario = perturb(scenarios[g % scenarios.size()], cfg.margins, noise);
    spec.engine = cfg.engine;
    spec.observation = cfg.observation;
    spec.reward = cfg.reward;
    spec.seed = game_seed;
    std::array<SeatSetup, kNumSeats> seats;
    seats[0] = {policy_controller(mine.params), me.constraint, seat_info(mine.key, me.variant, me.constraint), false};
    spec.portfolios[0] = make_portfolio(me.variant, cfg.portfolio, cfg.engine.costs);
    seats[1] = {random_controller(), {}, seat_info("random", me.variant, {}), false};
    spec.portfolios[1] = spec.portfolios[0];
    for (std::size_t i = 2; i < kNumSeats; ++i) {
      const Snapshot& o = others[(i - 2) % others.size()];
      seats[i] = {policy_controller(o.params), o.constraint, seat_info(o.key, o.variant, o.constraint), false};
      spec.portfolios[i] = make_portfolio(o.variant, cfg.portfolio, cfg.engine.costs);
    }
    const auto r = play_game(spec, seats);
    out[g] = {r.cumulative_dividends(0), r.cumulative_dividends(1)};
  });
  RandomEvalResult res;
  res.games = games;
  for (const auto& [a, b] : out) {
    res.win_rate += pairwise_outcome(a, b) / games;
    res.mean_dividends += a / games;
    res.mean_random_dividends += b / games;
  }
  return res;
}

}  // namespace tl
