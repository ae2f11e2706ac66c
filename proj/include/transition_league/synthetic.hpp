#pragma once

// Seeded synthetic scenario ensembles shaped like IAM pathways: demand
// trajectories bend down faster in cooler warming buckets while low-carbon
// returns and auction supply grow.

#include <fmt/format.h>

#include <cmath>
#include <cstdint>
#include <vector>

#include "core/rng.hpp"
#include "scenario.hpp"

namespace tl {

struct SyntheticOptions {
  std::size_t count = 408;
  std::uint64_t seed = 2020;
  double oil_demand_2020 = 100.0;  // Mb/d
  double gas_demand_2020 = 65.0;   // Mboe/d
  double opec_share = 0.9;
};

inline Scenario synthetic_scenario(std::size_t index, const SyntheticOptions& o) {
  Rng rng(derive_seed(o.seed, {index}));
  Scenario s;
  s.id = fmt::format("S{:04d}", index);
  static constexpr std::array<std::string_view, 6> models = {"AIM", "GCAM", "IMAGE", "MESSAGE", "REMIND", "WITCH"};
  s.model_name = std::string(models[index % models.size()]);
  s.bucket = kAllBuckets[index % kAllBuckets.size()];

  // Annual demand drift by bucket, coolest first.
  static constexpr std::array<double, 6> oil_drift = {-0.035, -0.025, -0.015, 0.0, 0.008, 0.015};
  static constexpr std::array<double, 6> gas_drift = {-0.025, -0.015, -0.005, 0.008, 0.015, 0.02};
  const auto b = static_cast<std::size_t>(s.bucket);
  const double oil_g = oil_drift[b] + uniform(rng, -0.005, 0.005);
  const double gas_g = gas_drift[b] + uniform(rng, -0.005, 0.005);
  const double oil0 = o.oil_demand_2020 * uniform(rng, 0.95, 1.05);
  const double gas0 = o.gas_demand_2020 * uniform(rng, 0.95, 1.05);
  const double roi0 = uniform(rng, 0.04, 0.07);
  const double roi_g = (0.12 - roi0) * (1.0 - 0.12 * static_cast<double>(b));
  const double supply0 = uniform(rng, 8.0, 14.0);
  const double supply_g = uniform(rng, 0.04, 0.09) * (1.0 - 0.1 * static_cast<double>(b));
  const double opec0 = std::clamp(o.opec_share + uniform(rng, -0.01, 0.01), 0.02, 0.98);

  for (int y = kFirstYear; y <= kLastYear; ++y) {
    const double t = y - kFirstYear;
    auto& m = s.at(y);
    m.oil_demand = oil0 * std::exp(oil_g * t);
    m.gas_demand = gas0 * std::exp(gas_g * t);
    m.lc_roi = std::clamp(roi0 + roi_g * t / (kNumYears - 1), 0.0, 0.5);
    m.lc_supply = supply0 * std::exp(supply_g * t);
    m.opec_share = opec0;
  }
  return s;
}

inline ScenarioSet synthetic_ensemble(const SyntheticOptions& o = {}) {
  std::vector<Scenario> v;
  v.reserve(o.count);
  for (std::size_t i = 0; i < o.count; ++i) v.push_back(synthetic_scenario(i, o));
  return ScenarioSet(std::move(v));
}

}  // namespace tl
