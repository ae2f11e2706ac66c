#pragma once

// Matchmaking primitives: PFSP weightings, the per-iteration mode schedule,
// self-play gating, stall handling and win-rate bookkeeping.

#include <algorithm>
#include <cmath>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "../core/error.hpp"
#include "../core/rng.hpp"

namespace tl {

enum class Weighting { Hard, Var, Uniform };
enum class ModeKind { SelfPlay, PfspPast, PfspOpponent };

constexpr std::string_view to_string(Weighting w) {
  switch (w) {
    case Weighting::Hard: return "hard";
    case Weighting::Var: return "var";
    case Weighting::Uniform: return "uniform";
  }
  return "?";
}

constexpr std::string_view to_string(ModeKind m) {
  switch (m) {
    case ModeKind::SelfPlay: return "self-play";
    case ModeKind::PfspPast: return "pfsp-past";
    case ModeKind::PfspOpponent: return "pfsp-opponent";
  }
  return "?";
}

struct MatchmakingMode {
  ModeKind kind = ModeKind::SelfPlay;
  Weighting weighting = Weighting::Hard;

  bool operator==(const MatchmakingMode&) const = default;
};

inline double pfsp_weight(double x, Weighting w) {
  switch (w) {
    case Weighting::Hard: return (1.0 - x) * (1.0 - x);
    case Weighting::Var: return x * (1.0 - x);
    case Weighting::Uniform: return 0.0;
  }
  return 0.0;
}

/// Softmax of f(x_i) over the pool.
inline std::vector<double> pfsp_probabilities(std::span<const double> win_rates, Weighting w) {
  if (win_rates.empty()) throw Error(Errc::EmptyPool, "pfsp over an empty pool");
  std::vector<double> p(win_rates.size());
  double top = -1e300;
  for (std::size_t i = 0; i < p.size(); ++i) top = std::max(top, p[i] = pfsp_weight(win_rates[i], w));
  double sum = 0;
  for (double& v : p) sum += v = std::exp(v - top);
  for (double& v : p) v /= sum;
  return p;
}

inline std::size_t sample_index(std::span<const double> probabilities, Rng& rng) {
  const double u = uniform(rng, 0.0, 1.0);
  double acc = 0;
  for (std::size_t i = 0; i < probabilities.size(); ++i) {
    acc += probabilities[i];
    if (u < acc) return i;
  }
  return probabilities.size() - 1;
}

struct ModeSchedule {
  double self_play = 0.8;
  double pfsp_past = 0.2;
  double pfsp_opponent = 0.0;

  bool operator==(const ModeSchedule&) const = default;
};

/// Main-agent schedule: 80/20/0 in iteration 1; from iteration 2 the
/// opponent share rises linearly from 35% to 100% at iteration 5, with the
/// rest split 50:15 between self-play and past selves.
inline ModeSchedule main_schedule(int iteration) {
  if (iteration <= 1) return {0.8, 0.2, 0.0};
  const double opp = std::min(1.0, 0.35 + (iteration - 2) * (1.0 - 0.35) / 3.0);
  const double rest = 1.0 - opp;
  return {rest * 50.0 / 65.0, rest * 15.0 / 65.0, opp};
}

inline ModeSchedule exploiter_schedule(int) { return {0.0, 0.0, 1.0}; }

inline ModeKind draw_mode(const ModeSchedule& s, Rng& rng) {
  const double p[] = {s.self_play, s.pfsp_past, s.pfsp_opponent};
  return static_cast<ModeKind>(sample_index(p, rng));
}

inline bool gate_selfplay(double win_rate_vs_current) { return win_rate_vs_current >= 0.5; }

/// Falls back from Hard weighting after `stall_epochs` consecutive losing
/// epochs and restores Hard on the next winning one.
struct Matchmaker {
  Weighting past = Weighting::Hard;
  Weighting opponent = Weighting::Hard;
  int losing_streak = 0;
  int stall_epochs = 5;

  bool operator==(const Matchmaker&) const = default;
};

inline Matchmaker stall_reset(Matchmaker m, bool stall_detected) {
  if (!stall_detected) return m;
  m.past = Weighting::Var;
  m.opponent = Weighting::Uniform;
  return m;
}

inline Matchmaker observe_epoch(Matchmaker m, double epoch_win_rate) {
  if (epoch_win_rate >= 0.5) {
    m.losing_streak = 0;
    m.past = m.opponent = Weighting::Hard;
    return m;
  }
  ++m.losing_streak;
  return stall_reset(m, m.losing_streak >= m.stall_epochs);
}

struct WinRecord {
  double games = 0;
  double wins = 0;  // ties count half

  double rate(double prior = 0.5) const { return games > 0 ? wins / games : prior; }
  bool operator==(const WinRecord&) const = default;
};

class WinRateTable {
 public:
  static std::string key(std::string_view learner, std::string_view opponent) {
    return std::string(learner) + "|" + std::string(opponent);
  }

  void record(std::string_view learner, std::string_view opponent, double outcome) {
    auto& r = rows_[key(learner, opponent)];
    r.games += 1;
    r.wins += outcome;
  }

  WinRecord get(std::string_view learner, std::string_view opponent) const {
    auto it = rows_.find(key(learner, opponent));
    return it == rows_.end() ? WinRecord{} : it->second;
  }

  double rate(std::string_view learner, std::string_view opponent, double prior = 0.5) const {
    return get(learner, opponent).rate(prior);
  }

  const std::map<std::string, WinRecord>& rows() const { return rows_; }
  std::map<std::string, WinRecord>& rows() { return rows_; }

  bool operator==(const WinRateTable&) const = default;

 private:
  std::map<std::string, WinRecord> rows_;
};

/// Pairwise outcome for the learner against one opponent seat.
inline double pairwise_outcome(double learner_dividends, double opponent_dividends) {
  if (learner_dividends > opponent_dividends) return 1.0;
  if (learner_dividends < opponent_dividends) return 0.0;
  return 0.5;
}

/// k-element combinations of {0..n-1} in lexicographic order; with
/// `repetition`, multisets (non-decreasing index tuples).
inline std::vector<std::vector<std::size_t>> index_combinations(std::size_t n, std::size_t k, bool repetition) {
  std::vector<std::vector<std::size_t>> out;
  if (k == 0) return {{}};
  if (n == 0 || (!repetition && k > n)) return out;
  std::vector<std::size_t> c(k);
  for (std::size_t i = 0; i < k; ++i) c[i] = repetition ? 0 : i;
  while (true) {
    out.push_back(c);
    std::size_t i = k;
    while (i-- > 0) {
      const std::size_t limit = repetition ? n - 1 : n - k + i;
      if (c[i] < limit) break;
      if (i == 0) return out;
    }
    ++c[i];
    for (std::size_t j = i + 1; j < k; ++j) c[j] = repetition ? c[i] : c[j - 1] + 1;
  }
}

}  // namespace tl
