#pragma once

// Round-robin evaluation: every 6-player matchup of the 8-player roster plays
// every scenario once. Each game is archived as
// archive/<matchup>/<scenario>.json with an index.json manifest.

#include <fmt/format.h>

#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "../core/parallel.hpp"
#include "../engine/game_log.hpp"
#include "../league/train.hpp"

namespace tl {

inline constexpr std::size_t kRosterSize = 8;

struct Matchup {
  std::vector<std::string> players;  // one per seat

  std::string key() const { return combination_key(players); }
  bool operator==(const Matchup&) const = default;
};

/// All 6-subsets of an 8-player roster, lexicographic in roster order.
inline std::vector<Matchup> enumerate_matchups(const std::vector<std::string>& roster) {
  if (roster.size() != kRosterSize)
    throw Error(Errc::WrongRosterSize, fmt::format("tournament needs {} players, got {}", kRosterSize, roster.size()));
  std::vector<Matchup> out;
  for (const auto& c : index_combinations(roster.size(), kNumSeats, false)) {
    Matchup m;
    for (auto i : c) m.players.push_back(roster[i]);
    out.push_back(std::move(m));
  }
  return out;
}

/// A single matchup for rosters smaller than six: players fill the seats in
/// roster order, repeating as needed.
inline Matchup padded_matchup(const std::vector<std::string>& roster) {
  if (roster.empty()) throw Error(Errc::WrongRosterSize, "empty roster");
  Matchup m;
  for (std::size_t i = 0; i < kNumSeats; ++i) m.players.push_back(roster[i % roster.size()]);
  return m;
}

struct ScheduleSummary {
  std::size_t matchups = 0;
  std::size_t games = 0;
  std::map<std::string, std::size_t> appearances;     // matchups per player
  std::map<std::string, std::size_t> games_per_player;
};

/// Counts for a schedule. With `check_full`, a schedule over an 8-player
/// roster must satisfy the combinatorial identities or this throws.
inline ScheduleSummary summarize_schedule(const std::vector<Matchup>& matchups, std::size_t scenarios,
                                          bool check_full = true) {
  ScheduleSummary s;
  s.matchups = matchups.size();
  s.games = matchups.size() * scenarios;
  for (const auto& m : matchups)
    for (const auto& p : m.players) {
      ++s.appearances[p];
      s.games_per_player[p] += scenarios;
    }
  if (check_full && s.appearances.size() == kRosterSize) {
    const bool ok = s.matchups == 28 && std::all_of(s.appearances.begin(), s.appearances.end(),
                                                    [](const auto& kv) { return kv.second == 21; });
    if (!ok) throw Error(Errc::WrongRosterSize, "schedule does not cover C(8,6) matchups evenly");
  }
  return s;
}

inline RandomizationMargins evaluation_margins(RandomizationMargins training) {
  for (auto& f : training.fraction) f *= 0.5;
  return training;
}

struct TournamentConfig {
  std::uint64_t seed = 0;
  std::size_t workers = 1;
  RandomizationMargins margins = evaluation_margins(RandomizationMargins{});
  EngineConfig engine;
  ObservationConfig observation;
  RewardSpec reward;
  PortfolioConfig portfolio;
};

struct ArchiveEntry {
  std::string matchup;
  std::string scenario;
  std::string path;  // relative to the archive root
  std::string hash;
  std::uint64_t seed = 0;

  bool operator==(const ArchiveEntry&) const = default;
};

struct TournamentSummary {
  std::size_t played = 0;
  std::size_t skipped = 0;
  std::vector<ArchiveEntry> entries;
};

inline std::string path_component(std::string_view s) {
  std::string out(s);
  for (char& c : out)
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '-' && c != '_' && c != '.' && c != '+') c = '_';
  return out;
}

inline std::string archive_rel(const std::string& matchup, const std::string& scenario_id) {
  return path_component(matchup) + "/" + path_component(scenario_id) + ".json";
}

inline void save_archive_index(const std::filesystem::path& root, const std::vector<ArchiveEntry>& entries) {
  nlohmann::json games = nlohmann::json::array();
  for (const auto& e : entries)
    games.push_back({{"matchup", e.matchup}, {"scenario", e.scenario}, {"path", e.path}, {"hash", e.hash},
                     {"seed", e.seed}});
  write_file_atomic(root / "index.json", nlohmann::json{{"version", 1}, {"games", games}}.dump(2) + "\n");
}

inline std::vector<ArchiveEntry> load_archive_index(const std::filesystem::path& root) {
  std::vector<ArchiveEntry> out;
  try {
    const auto j = nlohmann::json::parse(read_file(root / "index.json"));
    for (const auto& g : j.at("games"))
      out.push_back({g.at("matchup").get<std::string>(), g.at("scenario").get<std::string>(),
                     g.at("path").get<std::string>(), g.at("hash").get<std::string>(), g.at("seed").get<std::uint64_t>()});
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::IoError, fmt::format("archive index {}: {}", (root / "index.json").string(), e.what()));
  }
  return out;
}

namespace tournament_detail {

inline bool archived(const std::filesystem::path& file, const ArchiveEntry& want, std::string& hash) {
  if (!std::filesystem::exists(file)) return false;
  try {
    const auto log = load_game_log(file);
    if (!log.complete() || log.header.matchup != want.matchup || log.header.scenario_id != want.scenario ||
        log.header.seed != want.seed)
      return false;
    hash = log_hash(log);
    return true;
  } catch (const Error&) {
    return false;
  }
}

}  // namespace tournament_detail

/// Plays every (matchup, scenario) pair not already archived. Games are
/// seeded by their position in the schedule, so a resumed or re-run
/// tournament reproduces the same archive.
inline TournamentSummary run_tournament(const League& league, const std::vector<Matchup>& matchups,
                                        const ScenarioSet& scenarios, const std::filesystem::path& archive,
                                        const TournamentConfig& cfg,
                                        const std::function<void(const ArchiveEntry&)>& on_game = {}) {
  if (scenarios.empty()) throw Error(Errc::EmptyPool, "no scenarios to evaluate on");
  PolicyCache cache;
  std::map<std::string, Snapshot> snaps;
  for (const auto& m : matchups)
    for (const auto& id : m.players)
      if (!snaps.contains(id)) snaps.emplace(id, latest_snapshot(league, league.player(id), cache));

  std::vector<ArchiveEntry> entries;
  for (std::size_t mi = 0; mi < matchups.size(); ++mi)
    for (std::size_t si = 0; si < scenarios.size(); ++si) {
      const auto key = matchups[mi].key();
      const auto& id = scenarios[si].id;
      entries.push_back({key, id, archive_rel(key, id), "", derive_seed(cfg.seed, {6, mi, si})});
    }

  std::vector<char> skipped(entries.size(), 0);
  parallel_for(entries.size(), cfg.workers, [&](std::size_t k) {
    auto& e = entries[k];
    const auto file = archive / e.path;
    if (tournament_detail::archived(file, e, e.hash)) {
      skipped[k] = 1;
      return;
    }
    const auto& m = matchups[k / scenarios.size()];
    GameSpec spec;
    Rng noise(derive_seed(e.seed, {static_cast<std::uint64_t>(Stream::Scenario)}));
    spec.scenario = perturb(scenarios[k % scenarios.size()], cfg.margins, noise);
    spec.engine = cfg.engine;
    spec.observation = cfg.observation;
    spec.reward = cfg.reward;
    spec.seed = e.seed;
    spec.matchup = e.matchup;
    std::array<SeatSetup, kNumSeats> seats;
    for (std::size_t i = 0; i < kNumSeats; ++i) {
      const Snapshot& s = snaps.at(m.players[i]);
      seats[i] = {policy_controller(s.params), s.constraint, seat_info(s.key, s.variant, s.constraint), false};
      spec.portfolios[i] = make_portfolio(s.variant, cfg.portfolio, cfg.engine.costs);
    }
    const auto log = play_game(spec, seats).log;
    save_game_log(file, log);
    e.hash = log_hash(log);
  });

  TournamentSummary out;
  for (std::size_t k = 0; k < entries.size(); ++k) {
    (skipped[k] ? out.skipped : out.played) += 1;
    if (on_game) on_game(entries[k]);
  }
  save_archive_index(archive, entries);
  out.entries = std::move(entries);
  return out;
}

/// Loads every archived game in index order.
inline void for_each_game(const std::filesystem::path& archive,
                          const std::function<void(const ArchiveEntry&, const GameLog&)>& fn) {
  for (const auto& e : load_archive_index(archive)) fn(e, load_game_log(archive / e.path));
}

}  // namespace tl
