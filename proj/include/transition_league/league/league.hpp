#pragma once

// League roster, frozen policy pools and the JSON manifest.

#include <filesystem>
#include <json.hpp>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "../agent/constraint.hpp"
#include "../engine/portfolio.hpp"
#include "../rl/checkpoint.hpp"
#include "pfsp.hpp"

namespace tl {

inline constexpr int kLeagueManifestVersion = 1;
inline constexpr std::size_t kOpponentSeats = kNumSeats - 1;

enum class PlayerKind { Main, Exploiter };

constexpr std::string_view to_string(PlayerKind k) { return k == PlayerKind::Main ? "main" : "exploiter"; }

struct LeaguePlayer {
  std::string id;
  PlayerKind kind = PlayerKind::Main;
  PortfolioVariant variant = PortfolioVariant::Balanced;
  ConstraintProfile constraint;
  std::vector<std::string> checkpoints;  // lineage; [0] is the initialization
  std::vector<std::string> past_pool;    // frozen self snapshots for PFSP-past
  bool frozen = true;

  int trained_iterations() const { return static_cast<int>(checkpoints.size()) - 1; }
  bool operator==(const LeaguePlayer&) const = default;
};

struct IterationRecord {
  int iteration = 0;
  std::string player;
  std::string start_checkpoint;  // empty when parameters were reset
  std::string start_hash;
  std::string checkpoint;
  std::string final_hash;
  int epochs = 0;
  int games = 0;
  int snapshots = 0;

  bool operator==(const IterationRecord&) const = default;
};

struct League {
  std::filesystem::path dir;
  std::vector<LeaguePlayer> players;
  std::vector<IterationRecord> history;
  WinRateTable table;
  PolicyShape shape;
  std::uint64_t seed = 0;
  int completed_iterations = 0;

  std::size_t index_of(std::string_view id) const {
    for (std::size_t i = 0; i < players.size(); ++i)
      if (players[i].id == id) return i;
    throw Error(Errc::ConfigError, "no league player '" + std::string(id) + "'");
  }
  const LeaguePlayer& player(std::string_view id) const { return players[index_of(id)]; }
  LeaguePlayer& player(std::string_view id) { return players[index_of(id)]; }
  std::filesystem::path resolve(const std::string& rel) const { return dir / rel; }
};

/// Six mains (one per default variant) plus the BAU and delayed-2030 exploiters.
inline std::vector<LeaguePlayer> canonical_roster() {
  std::vector<LeaguePlayer> r;
  for (std::size_t i = 0; i < kMainVariants.size(); ++i)
    r.push_back({"main-" + std::to_string(i), PlayerKind::Main, kMainVariants[i], {}, {}, {}, true});
  r.push_back({"exploiter-bau", PlayerKind::Exploiter, PortfolioVariant::OilDominant, ConstraintProfile::bau(), {},
               {}, true});
  r.push_back({"exploiter-delayed", PlayerKind::Exploiter, PortfolioVariant::OilDominant,
               ConstraintProfile::delayed(2030), {}, {}, true});
  return r;
}

/// Two mains and the BAU exploiter.
inline std::vector<LeaguePlayer> desk_roster() {
  auto c = canonical_roster();
  return {c[0], c[1], c[6]};
}

// ---------------------------------------------------------------------------
// Frozen policies

struct Snapshot {
  std::string key;  // e.g. "main-0@2" or "main-0@2.s3"
  std::string player_id;
  PortfolioVariant variant = PortfolioVariant::Balanced;
  ConstraintProfile constraint;
  std::shared_ptr<const PolicyParams> params;
};

/// Loaded checkpoints shared across games; safe to use from several threads.
class PolicyCache {
 public:
  std::shared_ptr<const PolicyParams> get(const std::filesystem::path& path) {
    std::lock_guard lock(mutex_);
    auto& slot = cache_[path.string()];
    if (!slot) {
      try {
        slot = std::make_shared<const PolicyParams>(load_checkpoint(path).learner.params);
      } catch (const Error& e) {
        cache_.erase(path.string());
        throw Error(Errc::CheckpointLoadError, path.string() + ": " + e.what());
      }
    }
    return slot;
  }

 private:
  std::mutex mutex_;
  std::map<std::string, std::shared_ptr<const PolicyParams>> cache_;
};

inline std::string checkpoint_key(const std::string& rel_path) {
  // "ckpt/<player>/iter<k>[_s<n>].ckpt" -> "<player>@<k>[.s<n>]"
  std::filesystem::path p(rel_path);
  std::string stem = p.stem().string();
  const std::string player = p.parent_path().filename().string();
  if (stem.rfind("iter", 0) == 0) stem = stem.substr(4);
  if (auto u = stem.find("_s"); u != std::string::npos) stem = stem.substr(0, u) + ".s" + stem.substr(u + 2);
  return player + "@" + stem;
}

inline Snapshot make_snapshot(const League& league, const LeaguePlayer& player, const std::string& rel,
                              PolicyCache& cache) {
  try {
    return {checkpoint_key(rel), player.id, player.variant, player.constraint, cache.get(league.resolve(rel))};
  } catch (const Error& e) {
    throw Error(Errc::CheckpointLoadError, "player " + player.id + ": " + e.what());
  }
}

inline Snapshot latest_snapshot(const League& league, const LeaguePlayer& p, PolicyCache& cache) {
  if (p.checkpoints.empty()) throw Error(Errc::CheckpointLoadError, "player " + p.id + " has no checkpoint");
  return make_snapshot(league, p, p.checkpoints.back(), cache);
}

// ---------------------------------------------------------------------------
// Opponent combinations

/// Players a learner meets in PFSP-opponent games: exploiters face mains
/// only; mains face other mains plus exploiters that have finished an
/// iteration.
inline std::vector<std::string> opponent_candidates(const League& league, const std::string& learner) {
  const auto& me = league.player(learner);
  std::vector<std::string> out;
  for (const auto& p : league.players) {
    if (p.id == learner) continue;
    if (me.kind == PlayerKind::Exploiter && p.kind != PlayerKind::Main) continue;
    if (me.kind == PlayerKind::Main && p.kind == PlayerKind::Exploiter && p.trained_iterations() < 1) continue;
    out.push_back(p.id);
  }
  return out;
}

/// All 5-subsets of the candidates; fewer than five candidates yields
/// 5-multisets so every seat can still be filled.
inline std::vector<std::vector<std::string>> build_opponent_combinations(const League& league,
                                                                         const std::string& learner) {
  const auto ids = opponent_candidates(league, learner);
  std::vector<std::vector<std::string>> out;
  for (const auto& c : index_combinations(ids.size(), kOpponentSeats, ids.size() < kOpponentSeats)) {
    std::vector<std::string> combo;
    for (auto i : c) combo.push_back(ids[i]);
    out.push_back(std::move(combo));
  }
  return out;
}

inline std::string combination_key(const std::vector<std::string>& ids) {
  std::string k;
  for (const auto& id : ids) k += (k.empty() ? "" : "+") + id;
  return k;
}

struct CombinationPool {
  std::vector<std::vector<std::string>> combos;
  std::vector<int> drawn;

  explicit CombinationPool(std::vector<std::vector<std::string>> c = {})
      : combos(std::move(c)), drawn(combos.size(), 0) {}

  /// Unplayed combinations first, in order; PFSP afterwards.
  std::size_t draw(const WinRateTable& table, const std::string& learner, Weighting w, Rng& rng) {
    if (combos.empty()) throw Error(Errc::EmptyPool, "no opponent combinations for " + learner);
    for (std::size_t i = 0; i < combos.size(); ++i)
      if (drawn[i] == 0) {
        ++drawn[i];
        return i;
      }
    std::vector<double> x;
    for (const auto& c : combos) x.push_back(table.rate(learner, combination_key(c)));
    const std::size_t i = sample_index(pfsp_probabilities(x, w), rng);
    ++drawn[i];
    return i;
  }
};

// ---------------------------------------------------------------------------
// Matchmaking state for one learner during one iteration

struct LearnerState {
  std::string learner_id;
  ModeSchedule schedule;
  Snapshot self_opponent;
  std::vector<Snapshot> past;
  Matchmaker matchmaker;
  CombinationPool pool;
  std::vector<Snapshot> combo_players;  // latest snapshot of each candidate, by id
};

struct Selection {
  MatchmakingMode mode;
  std::array<Snapshot, kOpponentSeats> opponents;
  std::string combination;  // set for PFSP-opponent draws
};

inline const Snapshot& find_player_snapshot(const LearnerState& s, const std::string& id) {
  for (const auto& snap : s.combo_players)
    if (snap.player_id == id) return snap;
  throw Error(Errc::EmptyPool, "no snapshot for " + id);
}

inline Selection select_opponents(LearnerState& s, const WinRateTable& table, Rng& rng) {
  Selection sel;
  sel.mode.kind = draw_mode(s.schedule, rng);
  switch (sel.mode.kind) {
    case ModeKind::SelfPlay:
      if (!s.self_opponent.params) throw Error(Errc::EmptyPool, "no self-play opponent for " + s.learner_id);
      sel.opponents.fill(s.self_opponent);
      break;
    case ModeKind::PfspPast: {
      if (s.past.empty()) throw Error(Errc::EmptyPool, "empty past-self pool for " + s.learner_id);
      sel.mode.weighting = s.matchmaker.past;
      std::vector<double> x;
      for (const auto& p : s.past) x.push_back(table.rate(s.learner_id, p.key));
      const auto probs = pfsp_probabilities(x, sel.mode.weighting);
      for (auto& o : sel.opponents) o = s.past[sample_index(probs, rng)];
      break;
    }
    case ModeKind::PfspOpponent: {
      sel.mode.weighting = s.matchmaker.opponent;
      const auto& combo = s.pool.combos.at(s.pool.draw(table, s.learner_id, sel.mode.weighting, rng));
      sel.combination = combination_key(combo);
      for (std::size_t k = 0; k < kOpponentSeats; ++k) sel.opponents[k] = find_player_snapshot(s, combo[k]);
      break;
    }
  }
  return sel;
}

/// Gating: a win-rate of at least 0.5 against the current self-play opponent
/// freezes `candidate` into the past pool and makes it the new opponent.
inline bool apply_gate(LearnerState& s, double win_rate_vs_current, Snapshot candidate) {
  if (!gate_selfplay(win_rate_vs_current)) return false;
  s.past.push_back(candidate);
  s.self_opponent = std::move(candidate);
  return true;
}

// ---------------------------------------------------------------------------
// Manifest

inline std::string checkpoint_rel(const std::string& player, int iteration, int snapshot = -1) {
  std::string name = "iter" + std::to_string(iteration);
  if (snapshot >= 0) name += "_s" + std::to_string(snapshot);
  return "ckpt/" + player + "/" + name + ".ckpt";
}

inline nlohmann::json manifest_json(const League& l) {
  using nlohmann::json;
  json players = json::array();
  for (const auto& p : l.players)
    players.push_back({{"id", p.id},
                       {"kind", to_string(p.kind)},
                       {"variant", to_string(p.variant)},
                       {"constraint", to_string(p.constraint)},
                       {"checkpoints", p.checkpoints},
                       {"past_pool", p.past_pool},
                       {"frozen", p.frozen}});
  json history = json::array();
  for (const auto& h : l.history)
    history.push_back({{"iteration", h.iteration},
                       {"player", h.player},
                       {"start_checkpoint", h.start_checkpoint},
                       {"start_hash", h.start_hash},
                       {"checkpoint", h.checkpoint},
                       {"final_hash", h.final_hash},
                       {"epochs", h.epochs},
                       {"games", h.games},
                       {"snapshots", h.snapshots}});
  json table = json::object();
  for (const auto& [k, r] : l.table.rows()) table[k] = {{"games", r.games}, {"wins", r.wins}};
  return {{"version", kLeagueManifestVersion},
          {"seed", l.seed},
          {"completed_iterations", l.completed_iterations},
          {"shape", {{"obs_dim", l.shape.obs_dim},
                     {"act_dim", l.shape.act_dim},
                     {"hidden", l.shape.hidden},
                     {"init_log_std", l.shape.init_log_std}}},
          {"players", players},
          {"history", history},
          {"win_rates", table}};
}

inline void save_manifest(const League& l) {
  write_file_atomic(l.dir / "league.json", manifest_json(l).dump(2) + "\n");
}

inline League load_league(const std::filesystem::path& dir) {
  League l;
  l.dir = dir;
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_file(dir / "league.json"));
    if (j.at("version").get<int>() != kLeagueManifestVersion)
      throw Error(Errc::VersionMismatch, "league manifest version " + j.at("version").dump());
    l.seed = j.at("seed").get<std::uint64_t>();
    l.completed_iterations = j.at("completed_iterations").get<int>();
    const auto& sh = j.at("shape");
    l.shape = {sh.at("obs_dim").get<std::size_t>(), sh.at("act_dim").get<std::size_t>(),
               sh.at("hidden").get<std::vector<std::size_t>>(), sh.at("init_log_std").get<double>()};
    for (const auto& p : j.at("players")) {
      LeaguePlayer lp;
      lp.id = p.at("id").get<std::string>();
      lp.kind = p.at("kind").get<std::string>() == "main" ? PlayerKind::Main : PlayerKind::Exploiter;
      auto v = parse_variant(p.at("variant").get<std::string>());
      if (!v) throw Error(Errc::ConfigError, "unknown portfolio variant in manifest");
      lp.variant = *v;
      lp.constraint = parse_constraint(p.at("constraint").get<std::string>());
      lp.checkpoints = p.at("checkpoints").get<std::vector<std::string>>();
      lp.past_pool = p.at("past_pool").get<std::vector<std::string>>();
      lp.frozen = p.at("frozen").get<bool>();
      l.players.push_back(std::move(lp));
    }
    for (const auto& h : j.at("history"))
      l.history.push_back({h.at("iteration").get<int>(), h.at("player").get<std::string>(),
                           h.at("start_checkpoint").get<std::string>(), h.at("start_hash").get<std::string>(),
                           h.at("checkpoint").get<std::string>(), h.at("final_hash").get<std::string>(),
                           h.at("epochs").get<int>(), h.at("games").get<int>(), h.at("snapshots").get<int>()});
    for (const auto& [k, r] : j.at("win_rates").items())
      l.table.rows()[k] = {r.at("games").get<double>(), r.at("wins").get<double>()};
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::ConfigError, "league manifest " + (dir / "league.json").string() + ": " + e.what());
  }
  return l;
}

/// Writes an initialization checkpoint per player and the manifest.
inline League create_league(const std::filesystem::path& dir, std::vector<LeaguePlayer> roster,
                            const PolicyShape& shape, std::uint64_t seed) {
  League l;
  l.dir = dir;
  l.shape = shape;
  l.seed = seed;
  l.players = std::move(roster);
  for (std::size_t i = 0; i < l.players.size(); ++i) {
    auto& p = l.players[i];
    const auto rel = checkpoint_rel(p.id, 0);
    CheckpointMeta meta{p.id, 0, {{"kind", to_string(p.kind)}, {"variant", to_string(p.variant)}}};
    save_checkpoint(l.resolve(rel), make_policy(shape, derive_seed(seed, {i, 0})), meta);
    p.checkpoints = {rel};
    p.past_pool = {rel};
  }
  save_manifest(l);
  return l;
}

}  // namespace tl
