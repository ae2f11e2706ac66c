#pragma once

#include <optional>

#include "../engine/game.hpp"

namespace tl {

struct RewardSpec {
  std::optional<double> dividend_scale;  // defaults to the seat's initial equity
  double engulfment_penalty = -1.0;

  bool operator==(const RewardSpec&) const = default;
};

/// Debt engulfment at year end: equity gone, or leverage at the cap with no
/// cash to pay it back under the cap.
inline bool engulfed(const BalanceSheet& bs, const DecisionMetrics& m, const FinanceConfig& f) {
  if (m.equity <= 0.0) return true;
  if (m.debt_to_equity < f.max_debt_to_equity) return false;
  return bs.cash < bs.debt - f.max_debt_to_equity * m.equity;
}

/// Reward for the year held in `record` (a completed year from the history).
inline double compute_reward(const YearRecord& record, std::size_t seat, double initial_equity, const RewardSpec& spec,
                             const FinanceConfig& f) {
  const auto& r = record.seats[seat];
  const double scale = spec.dividend_scale.value_or(initial_equity);
  double reward = scale > 0.0 ? r.dividends / scale : 0.0;
  if (engulfed(r.end_sheet, r.metrics, f)) reward += spec.engulfment_penalty;
  return reward;
}

inline double compute_reward(const GameState& cur, std::size_t seat, const RewardSpec& spec) {
  return compute_reward(cur.history.back(), seat, cur.seats[seat].initial_equity, spec, cur.config.finance);
}

}  // namespace tl
