#pragma once

// Command-line driver. Subcommands:
//
//   train               league iterations with checkpoints and metrics
//   evaluate            build or resume the tournament archive
//   report              report bundle from an archive
//   play-serve          HTTP play server
//   validate-scenarios  lint an ensemble CSV
//   print-config        reference configuration with every default
//
// Exit codes: 0 success, 1 runtime failure, 2 configuration or usage error,
// 3 empty archive. Failures print one line: "<ErrorClass>: <message>".

#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include <csignal>
#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "config.hpp"
#include "eval/reports.hpp"
#include "play/server.hpp"

namespace tl {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitNoGames = 3;

inline void init_logging() {
  const char* level = std::getenv("TRANSITION_LEAGUE_LOG");
  spdlog::set_level(level ? spdlog::level::from_str(level) : spdlog::level::info);
  spdlog::set_pattern("[%H:%M:%S] [%^%l%$] %v");
}

inline Json epoch_json(const EpochMetrics& m) {
  return {{"iteration", m.iteration},
          {"player", m.player},
          {"epoch", m.epoch},
          {"games", m.games},
          {"mean_reward", m.mean_reward},
          {"win_rate", m.win_rate},
          {"self_play_rate", finite_or_null(m.self_play_rate)},
          {"gated", m.gated},
          {"past_weighting", to_string(m.past_weighting)},
          {"opponent_weighting", to_string(m.opponent_weighting)},
          {"policy_loss", m.ppo.policy_loss},
          {"value_loss", m.ppo.value_loss},
          {"entropy", m.ppo.entropy},
          {"clip_fraction", m.ppo.clip_fraction},
          {"approx_kl", m.ppo.approx_kl},
          {"grad_norm", m.ppo.grad_norm},
          {"steps", m.ppo.steps},
          {"early_stop", m.ppo.early_stop}};
}

struct CliOptions {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> workers;
  std::string out;
  bool resume = false;
  std::string archive;
  std::string scenarios_file;
};

namespace cli_detail {

inline RunConfig resolve(const CliOptions& o) {
  RunConfig c = o.config.empty() ? RunConfig{} : load_run_config(o.config);
  if (o.seed) c.seed = *o.seed;
  if (o.workers) c.workers = *o.workers;
  if (!o.out.empty()) c.out = o.out;
  validate(c);
  return c;
}

inline League open_or_create_league(const RunConfig& c, bool resume) {
  const auto dir = c.league_dir();
  if (std::filesystem::exists(dir / "league.json")) {
    if (!resume)
      throw Error(Errc::SubcommandError, fmt::format("--resume: league already exists at {}", dir.string()));
    return load_league(dir);
  }
  spdlog::info("creating league at {} ({} roster)", dir.string(), c.roster);
  return create_league(dir, c.roster_players(), c.shape, c.seed);
}

inline int train(const CliOptions& o) {
  const RunConfig c = resolve(o);
  const auto scenarios = load_run_scenarios(c);
  League league = open_or_create_league(c, o.resume);
  write_effective_config(c, c.out);
  const auto metrics_path = c.league_dir() / "metrics.jsonl";
  std::ofstream metrics(metrics_path, std::ios::app);
  if (!metrics) throw Error(Errc::IoError, "cannot open " + metrics_path.string());

  TrainHooks hooks;
  hooks.on_epoch = [&](const EpochMetrics& m) {
    metrics << epoch_json(m).dump() << "\n";
    metrics.flush();
    spdlog::debug("it{} {} epoch {} reward {:.3f} win {:.3f}", m.iteration, m.player, m.epoch, m.mean_reward, m.win_rate);
    if ((m.epoch + 1) % 20 == 0 || m.epoch + 1 == c.epochs)
      spdlog::info("it{} {:<18} epoch {:>4} reward {:8.3f} win {:.3f}", m.iteration, m.player, m.epoch + 1,
                   m.mean_reward, m.win_rate);
  };
  spdlog::info("training {} players for {} iteration(s) on {} scenarios", league.players.size(), c.iterations,
               scenarios.size());
  const auto cfg = c.train();
  train_league(league, scenarios, cfg, c.iterations, hooks);
  for (const auto& p : league.players) {
    if (p.kind != PlayerKind::Main) continue;
    const auto r = evaluate_vs_random(league, p.id, scenarios, c.random_eval_games, derive_seed(c.seed, {7}), cfg);
    spdlog::info("{} vs random seat: win rate {:.3f} over {} games", p.id, r.win_rate, r.games);
  }
  std::cout << fmt::format("trained {} iteration(s); league at {}\n", league.completed_iterations,
                           c.league_dir().string());
  return kExitOk;
}

inline int evaluate(const CliOptions& o) {
  const RunConfig c = resolve(o);
  const auto scenarios = load_run_scenarios(c);
  const League league = load_league(c.league_dir());
  const auto archive = o.archive.empty() ? c.archive_dir() : std::filesystem::path(o.archive);
  if (std::filesystem::exists(archive / "index.json") && !o.resume)
    throw Error(Errc::SubcommandError, fmt::format("--resume: archive already exists at {}", archive.string()));

  std::vector<std::string> roster;
  for (const auto& p : league.players) roster.push_back(p.id);
  const auto matchups = roster.size() == kRosterSize ? enumerate_matchups(roster) : std::vector{padded_matchup(roster)};
  const auto schedule = summarize_schedule(matchups, scenarios.size(), roster.size() == kRosterSize);
  spdlog::info("{} matchups x {} scenarios = {} games", schedule.matchups, scenarios.size(), schedule.games);

  TournamentConfig tc;
  tc.seed = c.seed;
  tc.workers = c.workers;
  tc.margins = evaluation_margins(c);
  tc.engine = c.engine;
  tc.observation = c.observation;
  tc.reward = c.reward;
  tc.portfolio = c.portfolio;
  std::filesystem::create_directories(archive);
  write_effective_config(c, archive);
  const auto summary = run_tournament(league, matchups, scenarios, archive, tc);
  std::cout << fmt::format("{} games played, {} already archived; archive at {}\n", summary.played, summary.skipped,
                           archive.string());
  return kExitOk;
}

inline int report(const CliOptions& o) {
  const RunConfig c = resolve(o);
  const auto archive = o.archive.empty() ? c.archive_dir() : std::filesystem::path(o.archive);
  if (!std::filesystem::exists(archive / "index.json") || load_archive_index(archive).empty()) {
    std::cerr << fmt::format("no games indexed in {}\n", archive.string());
    return kExitNoGames;
  }
  ReportOptions ro;
  ro.oil_price_bin = c.oil_price_bin;
  if (!c.benchmark.empty()) ro.benchmark = c.benchmark;
  const auto bundle = build_reports(archive, ro);
  const auto dir = c.reports_dir();
  write_reports(bundle, dir);
  std::cout << fmt::format("{} games, {} tables written to {}\n", bundle.games, bundle.tables.size(), dir.string());
  return kExitOk;
}

inline httplib::Server* g_server = nullptr;

inline int play_serve(const CliOptions& o) {
  const RunConfig c = resolve(o);
  PlayConfig pc{c.engine, c.observation, c.portfolio};
  PlayService service(load_league(c.league_dir()), load_run_scenarios(c), pc, c.sessions_dir());
  httplib::Server server;
  mount_play_routes(server, service, c.cors_origin);
  g_server = &server;
  std::signal(SIGINT, [](int) {
    if (g_server) g_server->stop();
  });
  std::signal(SIGTERM, [](int) {
    if (g_server) g_server->stop();
  });
  spdlog::info("play server on http://{}:{} ({} scenarios)", c.play_host, c.play_port, service.scenarios().size());
  if (!server.listen(c.play_host, c.play_port))
    throw Error(Errc::IoError, fmt::format("cannot listen on {}:{}", c.play_host, c.play_port));
  g_server = nullptr;
  return kExitOk;
}

inline int validate_scenarios(const CliOptions& o) {
  const RunConfig c = o.config.empty() ? RunConfig{} : resolve(o);
  LoadOptions lo;
  lo.outlier_fraction = c.outlier_fraction;
  LoadReport rep;
  const auto set = load_scenarios(o.scenarios_file, lo, &rep);
  for (const auto& id : rep.excluded) spdlog::info("excluded outlier {}", id);
  std::cout << fmt::format("{} scenarios OK\n", set.size());
  return kExitOk;
}

}  // namespace cli_detail

/// Parses argv and runs one subcommand; never throws.
inline int run_command(int argc, const char* const* argv) {
  init_logging();
  CliOptions o;
  CLI::App app{"Oil-and-gas transition wargame: league training, tournaments, reports and human play",
               "transition_league"};
  app.require_subcommand(1);
  app.fallthrough();
  app.add_option("--config", o.config, "run configuration file (key = value)");
  app.add_option("--seed", o.seed, "master seed, overrides the config");
  app.add_option("--workers", o.workers, "worker threads, overrides the config")->check(CLI::PositiveNumber);
  app.add_option("--out", o.out, "output directory, overrides the config");
  app.add_flag("--resume", o.resume, "continue an existing league or archive");

  auto* train = app.add_subcommand("train", "run league training iterations");
  auto* evaluate = app.add_subcommand("evaluate", "play the round-robin tournament into an archive");
  evaluate->add_option("--archive", o.archive, "archive directory (default <out>/archive)");
  auto* report = app.add_subcommand("report", "build the report bundle from an archive");
  report->add_option("--archive", o.archive, "archive directory (default <out>/archive)");
  auto* serve = app.add_subcommand("play-serve", "serve human-versus-league games over HTTP");
  auto* lint = app.add_subcommand("validate-scenarios", "check a scenario ensemble file");
  lint->add_option("file", o.scenarios_file, "ensemble CSV")->required();
  auto* print = app.add_subcommand("print-config", "print the reference configuration");
  auto* print_desk = print->add_flag("--desk", "print the desk-scale preset instead");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "SubcommandError: " << e.what() << "\n";
    return kExitUsage;
  }

  try {
    if (*train) return cli_detail::train(o);
    if (*evaluate) return cli_detail::evaluate(o);
    if (*report) return cli_detail::report(o);
    if (*serve) return cli_detail::play_serve(o);
    if (*lint) return cli_detail::validate_scenarios(o);
    if (*print) {
      std::cout << reference_config(*print_desk ? desk_run_config() : RunConfig{});
      return kExitOk;
    }
  } catch (const Error& e) {
    std::cerr << e.what() << "\n";
    return e.code() == Errc::ConfigError || e.code() == Errc::SubcommandError ? kExitUsage : kExitFailure;
  } catch (const std::exception& e) {
    std::cerr << "IoError: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitUsage;
}

}  // namespace tl
