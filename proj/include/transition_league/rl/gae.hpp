#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace tl {

struct GaeResult {
  std::vector<double> advantages;
  std::vector<double> returns;
};

/// Generalized advantage estimates for one episode segment. `dones[t]` cuts
/// the bootstrap after step t; a segment that ends without a done
/// bootstraps from `last_value`.
inline GaeResult compute_gae(std::span<const double> rewards, std::span<const double> values,
                             const std::vector<bool>& dones, double gamma, double lambda, double last_value = 0.0) {
  const std::size_t n = rewards.size();
  GaeResult r{std::vector<double>(n), std::vector<double>(n)};
  double next_adv = 0, next_value = last_value;
  for (std::size_t t = n; t-- > 0;) {
    const double keep = dones[t] ? 0.0 : 1.0;
    const double delta = rewards[t] + gamma * next_value * keep - values[t];
    next_adv = delta + gamma * lambda * keep * next_adv;
    r.advantages[t] = next_adv;
    r.returns[t] = next_adv + values[t];
    next_value = values[t];
  }
  return r;
}

}  // namespace tl
