#pragma once

// RunConfig: every tunable of a run as one flat `key = value` file. `#`
// starts a comment. Unknown keys are rejected. `reference_config()` prints
// every key with its default and a one-line description.

#include <fmt/format.h>

#include <charconv>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "core/error.hpp"
#include "core/io.hpp"
#include "league/train.hpp"
#include "scenario.hpp"
#include "synthetic.hpp"

namespace tl {

struct RunConfig {
  // scenarios
  std::string scenarios;                     // ensemble CSV; empty = synthetic ensemble
  std::size_t synthetic_count = 408;
  std::uint64_t synthetic_seed = 2020;
  std::optional<double> outlier_fraction;
  RandomizationMargins margins;
  double eval_margin_scale = 0.5;

  // game
  EngineConfig engine;
  PortfolioConfig portfolio;
  ObservationConfig observation;
  RewardSpec reward;

  // learning
  PpoConfig ppo;
  PolicyShape shape;

  // league
  std::string roster = "canonical";  // canonical | desk
  int iterations = 1;
  int epochs = 408;
  int games_per_epoch = 1;
  int stall_epochs = 5;
  bool main_first = true;

  // evaluation and reports
  int random_eval_games = 64;
  double oil_price_bin = 10.0;
  std::string benchmark;  // empty = no investment-contribution table

  // play server
  std::string play_host = "127.0.0.1";
  int play_port = 8080;
  std::string cors_origin = "*";

  // run
  std::uint64_t seed = 0;
  std::size_t workers = 1;
  std::string out = "run";

  std::filesystem::path league_dir() const { return std::filesystem::path(out) / "league"; }
  std::filesystem::path archive_dir() const { return std::filesystem::path(out) / "archive"; }
  std::filesystem::path reports_dir() const { return std::filesystem::path(out) / "reports"; }
  std::filesystem::path sessions_dir() const { return std::filesystem::path(out) / "sessions"; }

  TrainConfig train() const {
    TrainConfig t;
    t.epochs = epochs;
    t.games_per_epoch = games_per_epoch;
    t.ppo = ppo;
    t.stall_epochs = stall_epochs;
    t.reward = reward;
    t.observation = observation;
    t.engine = engine;
    t.portfolio = portfolio;
    t.margins = margins;
    t.workers = workers;
    t.main_first = main_first;
    return t;
  }

  std::vector<LeaguePlayer> roster_players() const { return roster == "desk" ? desk_roster() : canonical_roster(); }
};

/// The desk-scale preset as a RunConfig.
inline RunConfig desk_run_config() {
  RunConfig c;
  const auto t = desk_train_config();
  c.roster = "desk";
  c.synthetic_count = 8;
  c.iterations = 2;
  c.epochs = t.epochs;
  c.games_per_epoch = t.games_per_epoch;
  c.ppo = t.ppo;
  c.shape = desk_policy_shape();
  return c;
}

namespace config_detail {

struct Field {
  std::string key;
  std::string doc;
  std::function<std::string(const RunConfig&)> get;
  std::function<void(RunConfig&, std::string_view)> set;
};

[[noreturn]] inline void bad(const std::string& key, std::string_view value, std::string_view want) {
  throw Error(Errc::ConfigError, fmt::format("{}: '{}' is not {}", key, value, want));
}

inline double to_double(const std::string& key, std::string_view v) {
  const auto d = detail::parse_double(v);
  if (!d) bad(key, v, "a number");
  return *d;
}

template <class Int>
Int to_int(const std::string& key, std::string_view v) {
  Int x{};
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
  if (ec != std::errc{} || p != v.data() + v.size()) bad(key, v, "an integer");
  return x;
}

inline bool to_bool(const std::string& key, std::string_view v) {
  if (v == "true") return true;
  if (v == "false") return false;
  bad(key, v, "true or false");
}

inline Field number(std::string key, std::string doc, std::function<double&(RunConfig&)> ref) {
  return {key, std::move(doc), [=](const RunConfig& c) { return fmt::format("{}", ref(const_cast<RunConfig&>(c))); },
          [=](RunConfig& c, std::string_view v) { ref(c) = to_double(key, v); }};
}

template <class Int>
Field integer(std::string key, std::string doc, Int RunConfig::*member) {
  return {key, std::move(doc), [=](const RunConfig& c) { return fmt::format("{}", c.*member); },
          [=](RunConfig& c, std::string_view v) { c.*member = to_int<Int>(key, v); }};
}

inline Field text(std::string key, std::string doc, std::string RunConfig::*member) {
  return {key, std::move(doc), [=](const RunConfig& c) { return c.*member; },
          [=](RunConfig& c, std::string_view v) { c.*member = std::string(v); }};
}

inline Field flag(std::string key, std::string doc, std::function<bool&(RunConfig&)> ref) {
  return {key, std::move(doc), [=](const RunConfig& c) { return ref(const_cast<RunConfig&>(c)) ? "true" : "false"; },
          [=](RunConfig& c, std::string_view v) { ref(c) = to_bool(key, v); }};
}

inline Field optional_number(std::string key, std::string doc, std::function<std::optional<double>&(RunConfig&)> ref) {
  return {key, std::move(doc),
          [=](const RunConfig& c) {
            const auto& o = ref(const_cast<RunConfig&>(c));
            return o ? fmt::format("{}", *o) : std::string();
          },
          [=](RunConfig& c, std::string_view v) {
            if (v.empty())
              ref(c).reset();
            else
              ref(c) = to_double(key, v);
          }};
}

inline std::string lower(std::string_view s) {
  std::string out;
  for (char ch : s) {
    if (std::isupper(static_cast<unsigned char>(ch)) && !out.empty()) out += '_';
    out += static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
  }
  return out;
}

#define TL_REF(type, expr) [](RunConfig& c) -> type& { return expr; }

inline const std::vector<Field>& fields() {
  static const std::vector<Field> all = [] {
    std::vector<Field> f;
    auto num = [&](std::string key, std::string doc, std::function<double&(RunConfig&)> ref) {
      f.push_back(number(std::move(key), std::move(doc), std::move(ref)));
    };
    auto flg = [&](std::string key, std::string doc, std::function<bool&(RunConfig&)> ref) {
      f.push_back(flag(std::move(key), std::move(doc), std::move(ref)));
    };

    f.push_back(text("scenarios", "scenario ensemble CSV; empty uses the synthetic ensemble", &RunConfig::scenarios));
    f.push_back(integer("scenarios.synthetic_count", "synthetic ensemble size", &RunConfig::synthetic_count));
    f.push_back(integer("scenarios.synthetic_seed", "synthetic ensemble seed", &RunConfig::synthetic_seed));
    f.push_back(optional_number("scenarios.outlier_fraction",
                                "drop scenarios whose 2020 oil demand is below this fraction of the median; empty keeps all",
                                TL_REF(std::optional<double>, c.outlier_fraction)));
    const std::array<std::string_view, kNumMetrics> metric = {"oil_demand", "gas_demand", "lc_roi", "lc_supply",
                                                              "opec_share"};
    for (std::size_t m = 0; m < kNumMetrics; ++m)
      num(fmt::format("scenarios.margin.{}", metric[m]), "training perturbation half-width, fraction of the value",
          [m](RunConfig& c) -> double& { return c.margins.fraction[m]; });
    num("scenarios.eval_margin_scale", "tournament margins as a multiple of the training margins",
        TL_REF(double, c.eval_margin_scale));

    num("engine.price.oil_ref", "oil price at a balanced market, $/bbl", TL_REF(double, c.engine.prices.oil_ref));
    num("engine.price.gas_oil_ratio", "gas reference price as a fraction of oil", TL_REF(double, c.engine.prices.gas_oil_ratio));
    num("engine.price.elasticity", "price response to the demand/supply ratio", TL_REF(double, c.engine.prices.elasticity));
    num("engine.price.floor", "minimum price, $/bbl", TL_REF(double, c.engine.prices.floor));
    num("engine.price.cap", "maximum price, $/bbl", TL_REF(double, c.engine.prices.cap));
    num("engine.price.supply_epsilon", "supply floor in the price ratio", TL_REF(double, c.engine.prices.supply_epsilon));
    num("engine.price.volume_per_demand_unit", "bn boe per year per Mb/d of demand",
        TL_REF(double, c.engine.prices.volume_per_demand_unit));
    for (auto t : kAllTiers) {
      const auto name = lower(to_string(t));
      const auto i = index(t);
      num(fmt::format("engine.cost.{}.explore", name), "exploration cost, $/boe",
          [i](RunConfig& c) -> double& { return c.engine.costs.tiers[i].explore; });
      num(fmt::format("engine.cost.{}.develop", name), "development cost, $/boe",
          [i](RunConfig& c) -> double& { return c.engine.costs.tiers[i].develop; });
      num(fmt::format("engine.cost.{}.lift", name), "lifting cost, $/boe",
          [i](RunConfig& c) -> double& { return c.engine.costs.tiers[i].lift; });
    }
    num("engine.finance.tax_rate", "corporate tax rate", TL_REF(double, c.engine.finance.tax_rate));
    num("engine.finance.max_debt_to_equity", "borrowing cap on D/E", TL_REF(double, c.engine.finance.max_debt_to_equity));
    num("engine.finance.cost_of_debt_base", "cost of debt at zero leverage", TL_REF(double, c.engine.finance.cost_of_debt_base));
    num("engine.finance.cost_of_debt_slope", "cost of debt per unit D/E", TL_REF(double, c.engine.finance.cost_of_debt_slope));
    num("engine.finance.cost_of_debt_cap", "cost of debt ceiling", TL_REF(double, c.engine.finance.cost_of_debt_cap));
    num("engine.finance.risk_free", "risk-free rate", TL_REF(double, c.engine.finance.risk_free));
    num("engine.finance.beta", "equity beta", TL_REF(double, c.engine.finance.beta));
    num("engine.finance.equity_risk_premium", "equity risk premium", TL_REF(double, c.engine.finance.equity_risk_premium));
    num("engine.portfolio_value_tolerance", "allowed relative spread of initial equity across seats",
        TL_REF(double, c.engine.portfolio_value_tolerance));
    flg("engine.check_accounting", "verify the cash identity after every stage", TL_REF(bool, c.engine.check_accounting));

    num("portfolio.equity", "initial equity per seat, $bn", TL_REF(double, c.portfolio.equity));
    num("portfolio.debt", "initial debt per seat, $bn", TL_REF(double, c.portfolio.debt));
    num("portfolio.cash_fraction", "cash share of total assets", TL_REF(double, c.portfolio.cash_fraction));
    num("portfolio.developed_fraction", "developed share of each hydrocarbon market", TL_REF(double, c.portfolio.developed_fraction));
    num("portfolio.low_tier_share", "low-cost tier share of each reserve block", TL_REF(double, c.portfolio.low_tier_share));
    num("portfolio.skew", "non-cash value moved into a variant's named markets", TL_REF(double, c.portfolio.skew));
    num("portfolio.dominant_share", "oil share of the exploiters' oil-dominant book", TL_REF(double, c.portfolio.dominant_share));

    num("observation.horizon_noise", "std-dev of the shared horizon-feature noise", TL_REF(double, c.observation.horizon_noise));
    f.push_back(optional_number("reward.dividend_scale", "dividend divisor; empty uses the seat's initial equity",
                                TL_REF(std::optional<double>, c.reward.dividend_scale)));
    num("reward.engulfment_penalty", "reward added for each engulfed year", TL_REF(double, c.reward.engulfment_penalty));

    num("ppo.clip", "surrogate clip epsilon", TL_REF(double, c.ppo.clip));
    num("ppo.gamma", "discount", TL_REF(double, c.ppo.gamma));
    num("ppo.lambda", "GAE lambda", TL_REF(double, c.ppo.lambda));
    num("ppo.lr_actor", "actor learning rate", TL_REF(double, c.ppo.lr_actor));
    num("ppo.lr_critic", "critic learning rate", TL_REF(double, c.ppo.lr_critic));
    f.push_back({"ppo.epochs", "optimization passes per batch",
                 [](const RunConfig& c) { return fmt::format("{}", c.ppo.epochs); },
                 [](RunConfig& c, std::string_view v) { c.ppo.epochs = to_int<int>("ppo.epochs", v); }});
    f.push_back({"ppo.minibatch", "samples per gradient step; 0 uses the whole batch",
                 [](const RunConfig& c) { return fmt::format("{}", c.ppo.minibatch); },
                 [](RunConfig& c, std::string_view v) { c.ppo.minibatch = to_int<std::size_t>("ppo.minibatch", v); }});
    num("ppo.entropy_coef", "entropy bonus weight", TL_REF(double, c.ppo.entropy_coef));
    num("ppo.value_coef", "value loss weight", TL_REF(double, c.ppo.value_coef));
    num("ppo.max_grad_norm", "gradient norm cap; 0 disables", TL_REF(double, c.ppo.max_grad_norm));
    flg("ppo.clip_enabled", "use the clipped surrogate", TL_REF(bool, c.ppo.clip_enabled));
    flg("ppo.normalize_advantages", "standardize advantages per batch", TL_REF(bool, c.ppo.normalize_advantages));
    num("ppo.target_kl", "stop a batch once minibatch KL exceeds 1.5x this; 0 disables", TL_REF(double, c.ppo.target_kl));
    f.push_back({"policy.hidden", "hidden layer widths, comma separated",
                 [](const RunConfig& c) { return fmt::format("{}", fmt::join(c.shape.hidden, ",")); },
                 [](RunConfig& c, std::string_view v) {
                   std::vector<std::size_t> h;
                   for (auto part : detail::split(v, ',')) h.push_back(to_int<std::size_t>("policy.hidden", detail::trim(part)));
                   if (h.empty()) bad("policy.hidden", v, "a list of widths");
                   c.shape.hidden = h;
                 }});
    num("policy.init_log_std", "initial log standard deviation", TL_REF(double, c.shape.init_log_std));

    f.push_back(text("league.roster", "canonical (6 mains, 2 exploiters) or desk (2 mains, BAU exploiter)",
                     &RunConfig::roster));
    f.push_back(integer("league.iterations", "training iterations", &RunConfig::iterations));
    f.push_back(integer("league.epochs", "epochs per player-iteration", &RunConfig::epochs));
    f.push_back(integer("league.games_per_epoch", "games per epoch", &RunConfig::games_per_epoch));
    f.push_back(integer("league.stall_epochs", "losing epochs before switching PFSP weighting", &RunConfig::stall_epochs));
    flg("league.main_first", "train mains before exploiters within an iteration", TL_REF(bool, c.main_first));

    f.push_back(integer("eval.random_games", "games in the win-rate check against a random seat", &RunConfig::random_eval_games));
    num("report.oil_price_bin", "oil price bin width for sensitivity tables, $/bbl", TL_REF(double, c.oil_price_bin));
    f.push_back(text("report.benchmark", "required-investment CSV; empty skips the contribution table", &RunConfig::benchmark));

    f.push_back(text("play.host", "play server bind address", &RunConfig::play_host));
    f.push_back(integer("play.port", "play server port", &RunConfig::play_port));
    f.push_back(text("play.cors_origin", "allowed browser origin", &RunConfig::cors_origin));

    f.push_back(integer("seed", "master seed", &RunConfig::seed));
    f.push_back(integer("workers", "worker threads", &RunConfig::workers));
    f.push_back(text("out", "output directory for league, archive, reports and sessions", &RunConfig::out));
    return f;
  }();
  return all;
}

#undef TL_REF

}  // namespace config_detail

/// Every key with its default, grouped by prefix.
inline std::string reference_config(const RunConfig& c = {}) {
  std::string out = "# transition-league run configuration\n# key = value; '#' starts a comment; unknown keys are errors\n";
  std::string group;
  for (const auto& f : config_detail::fields()) {
    const auto g = f.key.substr(0, f.key.find('.'));
    if (g != group) {
      out += "\n";
      group = g;
    }
    out += fmt::format("# {}\n{} = {}\n", f.doc, f.key, f.get(c));
  }
  return out;
}

inline void validate(const RunConfig& c) {
  auto bad = [](const std::string& key, const std::string& what) {
    throw Error(Errc::ConfigError, fmt::format("{}: {}", key, what));
  };
  if (c.roster != "canonical" && c.roster != "desk") bad("league.roster", "must be canonical or desk");
  if (c.iterations < 1) bad("league.iterations", "must be at least 1");
  if (c.epochs < 1) bad("league.epochs", "must be at least 1");
  if (c.games_per_epoch < 1) bad("league.games_per_epoch", "must be at least 1");
  if (c.stall_epochs < 1) bad("league.stall_epochs", "must be at least 1");
  if (c.workers < 1) bad("workers", "must be at least 1");
  if (c.random_eval_games < 1) bad("eval.random_games", "must be at least 1");
  if (!(c.oil_price_bin > 0)) bad("report.oil_price_bin", "must be positive");
  if (!(c.eval_margin_scale >= 0)) bad("scenarios.eval_margin_scale", "must be non-negative");
  if (c.synthetic_count < 1) bad("scenarios.synthetic_count", "must be at least 1");
  if (c.play_port < 0 || c.play_port > 65535) bad("play.port", "must be 0-65535");
  for (double m : c.margins.fraction)
    if (!(m >= 0 && m < 1)) bad("scenarios.margin", "fractions must be in [0,1)");
  if (c.shape.hidden.empty()) bad("policy.hidden", "needs at least one layer");
  if (c.ppo.minibatch > 0 && c.ppo.minibatch < 2) bad("ppo.minibatch", "must be 0 or at least 2");
  c.ppo.validate();
}

inline RunConfig parse_run_config(std::istream& in, RunConfig c = {}) {
  std::set<std::string> seen;
  std::string line;
  for (int lineno = 1; std::getline(in, line); ++lineno) {
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const auto body = detail::trim(line);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string_view::npos)
      throw Error(Errc::ConfigError, fmt::format("line {}: expected 'key = value'", lineno));
    const std::string key(detail::trim(body.substr(0, eq)));
    const auto value = detail::trim(body.substr(eq + 1));
    const auto& fs = config_detail::fields();
    auto it = std::find_if(fs.begin(), fs.end(), [&](const auto& f) { return f.key == key; });
    if (it == fs.end()) throw Error(Errc::ConfigError, fmt::format("{}: unknown key (line {})", key, lineno));
    if (!seen.insert(key).second) throw Error(Errc::ConfigError, fmt::format("{}: set twice (line {})", key, lineno));
    it->set(c, value);
  }
  validate(c);
  return c;
}

inline RunConfig load_run_config(const std::filesystem::path& path, RunConfig base = {}) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::ConfigError, fmt::format("--config: cannot open '{}'", path.string()));
  return parse_run_config(in, std::move(base));
}

/// Writes the fully resolved configuration next to a run's outputs.
inline void write_effective_config(const RunConfig& c, const std::filesystem::path& dir) {
  write_file_atomic(dir / "effective_config.txt", reference_config(c));
}

inline RandomizationMargins evaluation_margins(const RunConfig& c) {
  RandomizationMargins m = c.margins;
  for (auto& f : m.fraction) f *= c.eval_margin_scale;
  return m;
}

inline ScenarioSet load_run_scenarios(const RunConfig& c) {
  if (c.scenarios.empty()) {
    SyntheticOptions o;
    o.count = c.synthetic_count;
    o.seed = c.synthetic_seed;
    return synthetic_ensemble(o);
  }
  LoadOptions lo;
  lo.outlier_fraction = c.outlier_fraction;
  return load_scenarios(c.scenarios, lo);
}

}  // namespace tl
