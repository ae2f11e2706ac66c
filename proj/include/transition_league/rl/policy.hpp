#pragma once

// Gaussian actor with a separate critic. Inputs are normalized with the
// params' frozen RunningNorm snapshot before either network sees them.

#include <algorithm>
#include <cmath>
#include <memory>
#include <numbers>
#include <span>
#include <vector>

#include "../agent/observation.hpp"
#include "../agent/runner.hpp"
#include "mlp.hpp"

namespace tl {

inline constexpr double kMinLogStd = -5.0;
inline constexpr double kMaxLogStd = 2.0;

struct PolicyParams {
  Mlp actor;
  std::vector<double> log_std;
  Mlp critic;
  RunningNorm norm;
  std::uint64_t version = 0;

  std::size_t obs_dim() const { return actor.inputs(); }
  std::size_t act_dim() const { return actor.outputs(); }

  bool operator==(const PolicyParams&) const = default;
};

struct PolicyShape {
  std::size_t obs_dim = obs::kDim;
  std::size_t act_dim = kActionDim;
  std::vector<std::size_t> hidden = {128, 128};
  double init_log_std = -0.5;
};

inline PolicyParams make_policy(const PolicyShape& shape, std::uint64_t seed) {
  auto sizes = [&](std::size_t out) {
    std::vector<std::size_t> s{shape.obs_dim};
    s.insert(s.end(), shape.hidden.begin(), shape.hidden.end());
    s.push_back(out);
    return s;
  };
  PolicyParams p;
  p.actor = Mlp(sizes(shape.act_dim));
  p.critic = Mlp(sizes(1));
  Rng rng(seed);
  p.actor.init(rng, 1.0, 0.01);
  p.critic.init(rng, 1.0, 1.0);
  p.log_std.assign(shape.act_dim, std::clamp(shape.init_log_std, kMinLogStd, kMaxLogStd));
  p.norm = RunningNorm(shape.obs_dim);
  return p;
}

inline double clamped_log_std(double x) { return std::clamp(x, kMinLogStd, kMaxLogStd); }

/// Diagonal Gaussian log-density.
inline double gaussian_log_prob(std::span<const double> mean, std::span<const double> log_std,
                                std::span<const double> x) {
  static const double kHalfLog2Pi = 0.5 * std::log(2.0 * std::numbers::pi);
  double lp = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double ls = clamped_log_std(log_std[i]);
    const double z = (x[i] - mean[i]) / std::exp(ls);
    lp += -0.5 * z * z - ls - kHalfLog2Pi;
  }
  return lp;
}

inline double gaussian_entropy(std::span<const double> log_std) {
  static const double kConst = 0.5 * std::log(2.0 * std::numbers::pi * std::numbers::e);
  double h = 0;
  for (double ls : log_std) h += clamped_log_std(ls) + kConst;
  return h;
}

struct PolicyOutput {
  std::vector<double> action;
  double log_prob = 0;
  double value = 0;
  std::vector<double> input;  // normalized observation
};

inline PolicyOutput policy_step(const PolicyParams& p, std::span<const double> observation, Rng& rng,
                                bool deterministic = false) {
  if (observation.size() != p.obs_dim())
    throw Error(Errc::DimensionMismatch, "policy expects " + std::to_string(p.obs_dim()) +
                                             " observation features, got " + std::to_string(observation.size()));
  PolicyOutput out;
  out.input = p.norm.normalize(observation);
  const auto mean = p.actor.forward(out.input);
  out.action.resize(mean.size());
  for (std::size_t i = 0; i < mean.size(); ++i) {
    const double noise = deterministic ? 0.0 : standard_normal(rng);
    out.action[i] = mean[i] + std::exp(clamped_log_std(p.log_std[i])) * noise;
  }
  out.log_prob = gaussian_log_prob(mean, p.log_std, out.action);
  out.value = p.critic.forward(out.input)[0];
  return out;
}

/// Game controller over a shared, immutable params snapshot.
inline Controller policy_controller(std::shared_ptr<const PolicyParams> params, bool deterministic = false) {
  if (params->act_dim() != kActionDim)
    throw Error(Errc::DimensionMismatch, "game policies need " + std::to_string(kActionDim) + " action outputs");
  return [params = std::move(params), deterministic](std::span<const double> o, Rng& rng) {
    PolicyOutput p = policy_step(*params, o, rng, deterministic);
    StepOutput s;
    std::copy(p.action.begin(), p.action.end(), s.action.begin());
    s.log_prob = p.log_prob;
    s.value = p.value;
    s.input = std::move(p.input);
    return s;
  };
}

}  // namespace tl
