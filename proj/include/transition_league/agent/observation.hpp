#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "../core/error.hpp"
#include "../core/rng.hpp"
#include "../engine/game.hpp"

namespace tl {

namespace obs {

inline constexpr std::size_t kOwnOnHand = 0;    // cash, debt, 9 holdings
inline constexpr std::size_t kOwnPipeline = 11; // 8 track totals
inline constexpr std::size_t kOwnMetrics = 19;  // 7 decision metrics
inline constexpr std::size_t kScenario = 26;    // 5 current-year metrics
inline constexpr std::size_t kLastPrices = 31;  // oil, gas
inline constexpr std::size_t kOpponents = 33;   // 5 x (equity, dividends, oil produced, gas produced)
inline constexpr std::size_t kHorizon = 53;     // 3 noised horizon features
inline constexpr std::size_t kDim = 56;

inline constexpr std::size_t kOpponentStride = 4;
inline constexpr std::size_t kLookahead = 5;  // years
inline constexpr double kMaxDebtToEquity = 10.0;

}  // namespace obs

struct ObservationConfig {
  double horizon_noise = 0.1;  // std-dev of the shared per-year horizon noise
};

/// Horizon features: remaining-game fraction and lookahead demand and return
/// ratios, each perturbed by noise that is drawn once per game-year and shared
/// by every seat.
inline std::array<double, 3> horizon_features(const GameState& s, const ObservationConfig& cfg) {
  const int ahead = std::min(s.year + static_cast<int>(obs::kLookahead), kLastYear);
  const auto& now = s.metrics_now();
  const auto& later = s.scenario.at(ahead);
  std::array<double, 3> h = {
      static_cast<double>(kLastYear - s.year) / (kNumYears - 1),
      later.oil_demand / std::max(now.oil_demand, 1e-9),
      later.lc_roi - now.lc_roi,
  };
  if (cfg.horizon_noise > 0.0) {
    Rng rng(s.stream_seed(Stream::Observation));
    for (auto& v : h) v += cfg.horizon_noise * standard_normal(rng);
  }
  return h;
}

/// Raw (unnormalized) observation for `seat`. Opponents appear in seat order
/// starting after the observer and expose only public aggregates.
inline std::vector<double> build_observation(const GameState& s, std::size_t seat, const ObservationConfig& cfg = {}) {
  std::vector<double> o(obs::kDim, 0.0);
  const auto& me = s.seats[seat];
  o[obs::kOwnOnHand + 0] = me.sheet.cash;
  o[obs::kOwnOnHand + 1] = me.sheet.debt;
  for (std::size_t a = 0; a < kNumTradable; ++a) o[obs::kOwnOnHand + 2 + a] = me.sheet.holdings[a];
  for (std::size_t t = 0; t < kNumTracks; ++t) o[obs::kOwnPipeline + t] = me.sheet.pipeline_total(t);

  const auto& m = me.metrics;
  const double de = std::isfinite(m.debt_to_equity) ? m.debt_to_equity : obs::kMaxDebtToEquity;
  const std::array<double, kNumDecisionMetrics> metrics = {
      m.equity, std::min(de, obs::kMaxDebtToEquity), m.cost_of_debt, m.cost_of_equity, m.cost_of_capital,
      m.net_income, m.cumulative_dividends};
  std::copy(metrics.begin(), metrics.end(), o.begin() + obs::kOwnMetrics);

  const auto& y = s.metrics_now();
  o[obs::kScenario + 0] = y.oil_demand;
  o[obs::kScenario + 1] = y.gas_demand;
  o[obs::kScenario + 2] = y.lc_roi;
  o[obs::kScenario + 3] = y.lc_supply;
  o[obs::kScenario + 4] = y.opec_share;
  o[obs::kLastPrices + 0] = s.prices.oil;
  o[obs::kLastPrices + 1] = s.prices.gas;

  const YearRecord* last = s.history.empty() ? nullptr : &s.history.back();
  for (std::size_t k = 1; k < kNumSeats; ++k) {
    const std::size_t other = (seat + k) % kNumSeats;
    const std::size_t base = obs::kOpponents + (k - 1) * obs::kOpponentStride;
    o[base + 0] = s.seats[other].metrics.equity;
    if (last) {
      o[base + 1] = last->seats[other].dividends;
      o[base + 2] = last->seats[other].oil_produced();
      o[base + 3] = last->seats[other].gas_produced();
    }
  }
  const auto h = horizon_features(s, cfg);
  std::copy(h.begin(), h.end(), o.begin() + obs::kHorizon);
  return o;
}

/// Per-dimension running mean and variance (Welford), used to standardize
/// observations. Rollouts read a frozen copy; the learner merges batches.
struct RunningNorm {
  std::vector<double> mean;
  std::vector<double> m2;
  double count = 0;
  double clip = 10.0;

  RunningNorm() = default;
  explicit RunningNorm(std::size_t dim) : mean(dim, 0.0), m2(dim, 0.0) {}

  std::size_t dim() const { return mean.size(); }

  void update(std::span<const double> x) {
    if (x.size() != dim()) throw Error(Errc::DimensionMismatch, "observation size differs from normalizer");
    count += 1;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double d = x[i] - mean[i];
      mean[i] += d / count;
      m2[i] += d * (x[i] - mean[i]);
    }
  }

  double variance(std::size_t i) const { return count > 1 ? m2[i] / (count - 1) : 1.0; }

  std::vector<double> normalize(std::span<const double> x) const {
    if (x.size() != dim()) throw Error(Errc::DimensionMismatch, "observation size differs from normalizer");
    std::vector<double> out(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double sd = std::sqrt(variance(i) + 1e-8);
      out[i] = std::clamp((x[i] - mean[i]) / sd, -clip, clip);
    }
    return out;
  }

  bool operator==(const RunningNorm&) const = default;
};

}  // namespace tl
