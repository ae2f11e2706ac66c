#pragma once

// Clipped-surrogate actor-critic updates. One epoch with clipping disabled is
// plain A2C.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <vector>

#include "../agent/runner.hpp"
#include "../core/parallel.hpp"
#include "gae.hpp"
#include "policy.hpp"

namespace tl {

struct PpoConfig {
  double clip = 0.2;
  double gamma = 0.99;
  double lambda = 0.95;
  double lr_actor = 3e-4;
  double lr_critic = 1e-3;
  int epochs = 4;
  std::size_t minibatch = 64;  // 0 = whole batch
  double entropy_coef = 0.0;
  double value_coef = 0.5;
  double max_grad_norm = 0.5;  // <= 0 disables the cap
  bool clip_enabled = true;
  bool normalize_advantages = true;
  double target_kl = 0.0;  // > 0 stops the update once a mini-batch KL exceeds 1.5x this

  static PpoConfig a2c() {
    PpoConfig c;
    c.epochs = 1;
    c.minibatch = 0;
    c.clip_enabled = false;
    return c;
  }

  void validate() const {
    auto bad = [](const std::string& m) { throw Error(Errc::ConfigError, m); };
    if (!(clip > 0.0 && clip < 1.0)) bad("ppo clip must be in (0,1)");
    if (!(gamma > 0.0 && gamma <= 1.0)) bad("gamma must be in (0,1]");
    if (!(lambda > 0.0 && lambda <= 1.0)) bad("gae lambda must be in (0,1]");
    if (!(lr_actor > 0.0) || !(lr_critic > 0.0)) bad("learning rates must be positive");
    if (epochs < 1) bad("epochs must be at least 1");
  }

  bool operator==(const PpoConfig&) const = default;
};

struct Sample {
  std::vector<double> input;  // normalized observation
  std::vector<double> action;
  double old_log_prob = 0;
  double advantage = 0;
  double ret = 0;
};

struct Adam {
  std::vector<double> m, v;
  std::uint64_t t = 0;
  double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;

  void step(std::span<double> params, std::span<const double> grad, double lr) {
    if (m.size() != params.size()) {
      m.assign(params.size(), 0.0);
      v.assign(params.size(), 0.0);
      t = 0;
    }
    ++t;
    const double c1 = 1.0 - std::pow(beta1, static_cast<double>(t));
    const double c2 = 1.0 - std::pow(beta2, static_cast<double>(t));
    for (std::size_t i = 0; i < params.size(); ++i) {
      m[i] = beta1 * m[i] + (1 - beta1) * grad[i];
      v[i] = beta2 * v[i] + (1 - beta2) * grad[i] * grad[i];
      params[i] -= lr * (m[i] / c1) / (std::sqrt(v[i] / c2) + eps);
    }
  }

  bool operator==(const Adam&) const = default;
};

struct Learner {
  PolicyParams params;
  Adam actor_opt, log_std_opt, critic_opt;

  bool operator==(const Learner&) const = default;
};

struct Gradients {
  std::vector<double> actor, log_std, critic;
};

struct LossTerms {
  double policy_loss = 0;  // -mean clipped surrogate
  double value_loss = 0;   // mean 0.5 (V - R)^2
  double entropy = 0;
  double clip_fraction = 0;
  double approx_kl = 0;

  double total(const PpoConfig& c) const {
    return policy_loss - c.entropy_coef * entropy + c.value_coef * value_loss;
  }
};

/// Batch-mean losses; when `grad` is given, fills d(total)/d(params).
inline LossTerms ppo_loss(const PolicyParams& p, std::span<const Sample> batch, const PpoConfig& cfg,
                          Gradients* grad = nullptr) {
  LossTerms L;
  const std::size_t n = batch.size();
  if (n == 0) return L;
  const double inv_n = 1.0 / static_cast<double>(n);
  if (grad) {
    grad->actor.assign(p.actor.num_params(), 0.0);
    grad->log_std.assign(p.log_std.size(), 0.0);
    grad->critic.assign(p.critic.num_params(), 0.0);
  }
  const std::size_t d = p.act_dim();
  std::vector<double> sigma(d);
  std::vector<bool> free_std(d);
  for (std::size_t i = 0; i < d; ++i) {
    sigma[i] = std::exp(clamped_log_std(p.log_std[i]));
    free_std[i] = p.log_std[i] > kMinLogStd && p.log_std[i] < kMaxLogStd;
  }
  Mlp::Cache actor_cache, critic_cache;
  std::vector<double> dmean(d);
  for (const auto& s : batch) {
    if (s.action.size() != d)
      throw Error(Errc::DimensionMismatch, "sample action size differs from policy output");
    const auto mean = p.actor.forward(s.input, grad ? &actor_cache : nullptr);
    const double logp = gaussian_log_prob(mean, p.log_std, s.action);
    const double ratio = std::exp(logp - s.old_log_prob);
    const double A = s.advantage;
    double surrogate = ratio * A;
    bool ratio_active = true;
    if (cfg.clip_enabled) {
      const double clipped = std::clamp(ratio, 1.0 - cfg.clip, 1.0 + cfg.clip) * A;
      if (clipped < surrogate) {
        surrogate = clipped;
        ratio_active = false;
      }
      if (std::abs(ratio - 1.0) > cfg.clip) L.clip_fraction += inv_n;
    }
    L.policy_loss -= surrogate * inv_n;
    L.approx_kl += (ratio - 1.0 - std::log(ratio)) * inv_n;

    const double v = p.critic.forward(s.input, grad ? &critic_cache : nullptr)[0];
    const double err = v - s.ret;
    L.value_loss += 0.5 * err * err * inv_n;

    if (!grad) continue;
    // d(-surrogate)/d(logp) = -ratio * A while the unclipped term is active.
    const double g_logp = ratio_active ? -ratio * A * inv_n : 0.0;
    if (g_logp != 0.0) {
      for (std::size_t i = 0; i < d; ++i) {
        const double z = (s.action[i] - mean[i]) / sigma[i];
        dmean[i] = g_logp * z / sigma[i];
        if (free_std[i]) grad->log_std[i] += g_logp * (z * z - 1.0);
      }
      p.actor.backward(actor_cache, dmean, grad->actor);
    }
    const double dv = cfg.value_coef * err * inv_n;
    p.critic.backward(critic_cache, std::span<const double>(&dv, 1), grad->critic);
  }
  L.entropy = gaussian_entropy(p.log_std);
  if (grad)
    for (std::size_t i = 0; i < d; ++i)
      if (free_std[i]) grad->log_std[i] -= cfg.entropy_coef;
  return L;
}

struct PpoStats {
  double policy_loss = 0;
  double value_loss = 0;
  double entropy = 0;
  double clip_fraction = 0;
  double approx_kl = 0;
  double grad_norm = 0;  // actor, pre-cap, averaged over steps
  std::size_t steps = 0;
  bool early_stop = false;
};

namespace ppo_detail {

inline double norm2(std::initializer_list<const std::vector<double>*> vs) {
  double s = 0;
  for (const auto* v : vs)
    for (double x : *v) s += x * x;
  return std::sqrt(s);
}

inline void scale(std::initializer_list<std::vector<double>*> vs, double k) {
  for (auto* v : vs)
    for (double& x : *v) x *= k;
}

inline bool all_finite(std::initializer_list<const std::vector<double>*> vs) {
  for (const auto* v : vs)
    for (double x : *v)
      if (!std::isfinite(x)) return false;
  return true;
}

}  // namespace ppo_detail

/// ppo_loss over fixed 32-sample slices evaluated in parallel and summed in
/// slice order, so the result does not depend on the worker count.
inline LossTerms sliced_ppo_loss(const PolicyParams& p, std::span<const Sample> batch, const PpoConfig& cfg,
                                 Gradients& grad, std::size_t workers) {
  constexpr std::size_t kSlice = 32;
  const std::size_t n = batch.size();
  const std::size_t slices = (n + kSlice - 1) / kSlice;
  std::vector<LossTerms> parts(slices);
  std::vector<Gradients> grads(slices);
  parallel_for(slices, workers, [&](std::size_t i) {
    const std::size_t start = i * kSlice;
    parts[i] = ppo_loss(p, batch.subspan(start, std::min(kSlice, n - start)), cfg, &grads[i]);
  });
  LossTerms total;
  grad.actor.assign(p.actor.num_params(), 0.0);
  grad.log_std.assign(p.log_std.size(), 0.0);
  grad.critic.assign(p.critic.num_params(), 0.0);
  auto add = [](std::vector<double>& dst, const std::vector<double>& src, double w) {
    for (std::size_t k = 0; k < dst.size(); ++k) dst[k] += w * src[k];
  };
  for (std::size_t i = 0; i < slices; ++i) {
    const double w = static_cast<double>(std::min(kSlice, n - i * kSlice)) / static_cast<double>(n);
    total.policy_loss += w * parts[i].policy_loss;
    total.value_loss += w * parts[i].value_loss;
    total.entropy += w * parts[i].entropy;
    total.clip_fraction += w * parts[i].clip_fraction;
    total.approx_kl += w * parts[i].approx_kl;
    add(grad.actor, grads[i].actor, w);
    add(grad.log_std, grads[i].log_std, w);
    add(grad.critic, grads[i].critic, w);
  }
  return total;
}

/// Several epochs of shuffled mini-batch Adam steps. On a non-finite gradient
/// the learner is restored to its entry state and NonFiniteGradient is thrown.
inline PpoStats ppo_update(Learner& learner, std::vector<Sample> batch, const PpoConfig& cfg, Rng& rng,
                           std::size_t workers = 1) {
  using namespace ppo_detail;
  cfg.validate();
  if (batch.empty()) throw Error(Errc::EmptyPool, "ppo update needs at least one sample");
  if (cfg.normalize_advantages && batch.size() > 1) {
    double mean = 0, sq = 0;
    for (const auto& s : batch) mean += s.advantage;
    mean /= static_cast<double>(batch.size());
    for (const auto& s : batch) sq += (s.advantage - mean) * (s.advantage - mean);
    const double sd = std::sqrt(sq / static_cast<double>(batch.size()));
    for (auto& s : batch) s.advantage = (s.advantage - mean) / (sd + 1e-8);
  }

  const Learner entry = learner;
  PolicyParams& p = learner.params;
  const std::size_t n = batch.size();
  const std::size_t mb = (cfg.minibatch == 0 || cfg.minibatch > n) ? n : cfg.minibatch;
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::vector<Sample> chunk;
  PpoStats stats;
  Gradients g;
  bool stop = false;
  for (int epoch = 0; epoch < cfg.epochs && !stop; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t start = 0; start < n; start += mb) {
      chunk.clear();
      for (std::size_t k = start; k < std::min(n, start + mb); ++k) chunk.push_back(batch[order[k]]);
      const LossTerms L = sliced_ppo_loss(p, chunk, cfg, g, workers);
      if (cfg.target_kl > 0 && stats.steps > 0 && L.approx_kl > 1.5 * cfg.target_kl) {
        stop = true;
        break;
      }
      if (!all_finite({&g.actor, &g.log_std, &g.critic}) || !std::isfinite(L.total(cfg))) {
        learner = entry;
        throw Error(Errc::NonFiniteGradient, "gradient contains NaN or infinity; update discarded");
      }
      const double an = norm2({&g.actor, &g.log_std});
      const double cn = norm2({&g.critic});
      if (cfg.max_grad_norm > 0) {
        if (an > cfg.max_grad_norm) scale({&g.actor, &g.log_std}, cfg.max_grad_norm / an);
        if (cn > cfg.max_grad_norm) scale({&g.critic}, cfg.max_grad_norm / cn);
      }
      learner.actor_opt.step(p.actor.params(), g.actor, cfg.lr_actor);
      learner.log_std_opt.step(p.log_std, g.log_std, cfg.lr_actor);
      learner.critic_opt.step(p.critic.params(), g.critic, cfg.lr_critic);
      for (double& ls : p.log_std) ls = clamped_log_std(ls);

      stats.policy_loss += L.policy_loss;
      stats.value_loss += L.value_loss;
      stats.entropy += L.entropy;
      stats.clip_fraction += L.clip_fraction;
      stats.approx_kl += L.approx_kl;
      stats.grad_norm += an;
      ++stats.steps;
    }
  }
  stats.early_stop = stop;
  const double k = 1.0 / static_cast<double>(stats.steps);
  stats.policy_loss *= k;
  stats.value_loss *= k;
  stats.entropy *= k;
  stats.clip_fraction *= k;
  stats.approx_kl *= k;
  stats.grad_norm *= k;
  ++p.version;
  return stats;
}

/// Flattens recorded game trajectories into samples with GAE targets.
inline std::vector<Sample> make_samples(std::span<const Trajectory> trajectories, const PpoConfig& cfg) {
  std::vector<Sample> out;
  for (const auto& traj : trajectories) {
    std::vector<double> r, v;
    std::vector<bool> dones;
    for (const auto& t : traj) {
      r.push_back(t.reward);
      v.push_back(t.value);
      dones.push_back(t.done);
    }
    const auto gae = compute_gae(r, v, dones, cfg.gamma, cfg.lambda);
    for (std::size_t i = 0; i < traj.size(); ++i) {
      const auto& t = traj[i];
      out.push_back({t.input, std::vector<double>(t.action.begin(), t.action.end()), t.log_prob, gae.advantages[i],
                     gae.returns[i]});
    }
  }
  return out;
}

}  // namespace tl
