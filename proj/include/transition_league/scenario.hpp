#pragma once

// Energy-futures scenario ensemble: CSV ingestion, validation, perturbation
// and no-repeat sampling.

#include <fmt/format.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "core/error.hpp"
#include "core/rng.hpp"

namespace tl {

inline constexpr int kFirstYear = 2020;
inline constexpr int kLastYear = 2050;
inline constexpr int kNumYears = kLastYear - kFirstYear + 1;

enum class WarmingBucket { LE1_5, LE1_75, LE2, LE3, LE4, GT4 };
inline constexpr std::array<WarmingBucket, 6> kAllBuckets = {WarmingBucket::LE1_5, WarmingBucket::LE1_75,
                                                              WarmingBucket::LE2,   WarmingBucket::LE3,
                                                              WarmingBucket::LE4,   WarmingBucket::GT4};

constexpr std::string_view to_string(WarmingBucket b) {
  switch (b) {
    case WarmingBucket::LE1_5: return "LE1.5";
    case WarmingBucket::LE1_75: return "LE1.75";
    case WarmingBucket::LE2: return "LE2";
    case WarmingBucket::LE3: return "LE3";
    case WarmingBucket::LE4: return "LE4";
    case WarmingBucket::GT4: return "GT4";
  }
  return "GT4";
}

/// Missing metadata maps to GT4; an unrecognized label is an error.
inline std::optional<WarmingBucket> parse_bucket(std::string_view s) {
  if (s.empty()) return WarmingBucket::GT4;
  for (auto b : kAllBuckets)
    if (to_string(b) == s) return b;
  return std::nullopt;
}

enum class Metric { OilDemand, GasDemand, LcRoi, LcSupply, OpecShare };
inline constexpr std::size_t kNumMetrics = 5;

struct YearMetrics {
  double oil_demand = 0;  // Mb/d
  double gas_demand = 0;  // Mboe/d
  double lc_roi = 0;      // annual return fraction
  double lc_supply = 0;   // auctionable low-carbon assets, $bn
  double opec_share = 0;  // share of hydrocarbon supply from non-players

  double& operator[](Metric m) {
    switch (m) {
      case Metric::OilDemand: return oil_demand;
      case Metric::GasDemand: return gas_demand;
      case Metric::LcRoi: return lc_roi;
      case Metric::LcSupply: return lc_supply;
      case Metric::OpecShare: return opec_share;
    }
    return oil_demand;
  }
  double operator[](Metric m) const { return const_cast<YearMetrics&>(*this)[m]; }

  bool operator==(const YearMetrics&) const = default;
};

struct Scenario {
  std::string id;
  std::string model_name;
  WarmingBucket bucket = WarmingBucket::GT4;
  std::array<YearMetrics, kNumYears> years{};

  const YearMetrics& at(int year) const { return years.at(static_cast<std::size_t>(year - kFirstYear)); }
  YearMetrics& at(int year) { return years.at(static_cast<std::size_t>(year - kFirstYear)); }

  bool operator==(const Scenario&) const = default;
};

struct RandomizationMargins {
  std::array<double, kNumMetrics> fraction{0.05, 0.05, 0.05, 0.0, 0.10};

  double& operator[](Metric m) { return fraction[static_cast<std::size_t>(m)]; }
  double operator[](Metric m) const { return fraction[static_cast<std::size_t>(m)]; }

  static RandomizationMargins zero() { return RandomizationMargins{{0, 0, 0, 0, 0}}; }

  RandomizationMargins scaled(double k) const {
    RandomizationMargins out = *this;
    for (auto& f : out.fraction) f = std::clamp(f * k, 0.0, 1.0);
    return out;
  }

  bool valid() const {
    return std::all_of(fraction.begin(), fraction.end(), [](double f) { return f >= 0.0 && f <= 1.0; });
  }
};

class ScenarioSet {
 public:
  ScenarioSet() = default;
  explicit ScenarioSet(std::vector<Scenario> scenarios) : scenarios_(std::move(scenarios)) {}

  std::size_t size() const { return scenarios_.size(); }
  bool empty() const { return scenarios_.empty(); }
  const Scenario& operator[](std::size_t i) const { return scenarios_[i]; }
  auto begin() const { return scenarios_.begin(); }
  auto end() const { return scenarios_.end(); }

  const Scenario* find(std::string_view id) const {
    auto it = std::find_if(scenarios_.begin(), scenarios_.end(), [&](const Scenario& s) { return s.id == id; });
    return it == scenarios_.end() ? nullptr : &*it;
  }

  bool operator==(const ScenarioSet&) const = default;

 private:
  std::vector<Scenario> scenarios_;
};

inline constexpr std::array<std::string_view, 9> kScenarioColumns = {
    "scenario_id", "model", "warming_bucket", "year", "oil_demand", "gas_demand", "lc_roi", "lc_supply", "opec_share"};

struct LoadOptions {
  // Drops scenarios whose 2020 oil demand is below this fraction of the
  // ensemble median 2020 oil demand. Disabled when unset.
  std::optional<double> outlier_fraction;
};

struct LoadReport {
  std::size_t accepted = 0;
  std::vector<std::string> excluded;
  double median_2020_oil_demand = 0;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

inline std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    auto pos = line.find(sep, start);
    out.push_back(trim(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

inline std::optional<double> parse_double(std::string_view s) {
  if (s.empty()) return std::nullopt;
  std::string tmp(s);
  char* end = nullptr;
  double v = std::strtod(tmp.c_str(), &end);
  if (end != tmp.c_str() + tmp.size()) return std::nullopt;
  return v;
}

inline double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace detail

inline void validate_year(const Scenario& s, int year, const YearMetrics& m) {
  auto fail = [&](std::string_view field, double v) {
    throw Error(Errc::OutOfRangeMetric, fmt::format("scenario {} year {}: {}={} out of range", s.id, year, field, v));
  };
  for (auto metric : {Metric::OilDemand, Metric::GasDemand, Metric::LcRoi, Metric::LcSupply, Metric::OpecShare})
    if (!std::isfinite(m[metric])) fail(kScenarioColumns[4 + static_cast<std::size_t>(metric)], m[metric]);
  if (m.oil_demand <= 0) fail("oil_demand", m.oil_demand);
  if (m.gas_demand <= 0) fail("gas_demand", m.gas_demand);
  if (m.lc_roi < 0 || m.lc_roi > 0.5) fail("lc_roi", m.lc_roi);
  if (m.lc_supply < 0) fail("lc_supply", m.lc_supply);
  if (m.opec_share <= 0 || m.opec_share >= 1) fail("opec_share", m.opec_share);
}

/// Parses the scenario CSV. Rows of one scenario must be contiguous in year
/// order 2020..2050 without gaps.
inline ScenarioSet parse_scenarios(std::istream& in, const LoadOptions& options = {}, LoadReport* report = nullptr) {
  std::string header_line;
  if (!std::getline(in, header_line)) throw Error(Errc::MissingColumn, "empty scenario file (no header)");
  auto header = detail::split(header_line, ',');
  if (!header.empty() && header[0].starts_with("\xEF\xBB\xBF")) header[0].remove_prefix(3);
  std::array<std::size_t, kScenarioColumns.size()> col{};
  for (std::size_t c = 0; c < kScenarioColumns.size(); ++c) {
    auto it = std::find(header.begin(), header.end(), kScenarioColumns[c]);
    if (it == header.end()) throw Error(Errc::MissingColumn, fmt::format("column '{}' not in header", kScenarioColumns[c]));
    col[c] = static_cast<std::size_t>(it - header.begin());
  }

  struct Partial {
    Scenario scenario;
    int next_year = kFirstYear;
  };
  std::vector<Partial> partials;
  std::map<std::string, std::size_t, std::less<>> index;

  std::string line;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (detail::trim(line).empty()) continue;
    auto fields = detail::split(line, ',');
    if (fields.size() != header.size())
      throw Error(Errc::MalformedRow, fmt::format("row {}: expected {} fields, got {}", row, header.size(), fields.size()));
    std::string id(fields[col[0]]);
    if (id.empty()) throw Error(Errc::MalformedRow, fmt::format("row {}: empty scenario_id", row));

    auto year_value = detail::parse_double(fields[col[3]]);
    if (!year_value || *year_value != std::floor(*year_value))
      throw Error(Errc::MalformedRow, fmt::format("row {}: scenario {} has invalid year '{}'", row, id, fields[col[3]]));
    const int year = static_cast<int>(*year_value);

    auto it = index.find(id);
    if (it == index.end()) {
      Partial p;
      p.scenario.id = id;
      p.scenario.model_name = std::string(fields[col[1]]);
      auto bucket = parse_bucket(fields[col[2]]);
      if (!bucket)
        throw Error(Errc::MalformedRow, fmt::format("row {}: scenario {} has unknown warming_bucket '{}'", row, id, fields[col[2]]));
      p.scenario.bucket = *bucket;
      it = index.emplace(id, partials.size()).first;
      partials.push_back(std::move(p));
    }
    Partial& p = partials[it->second];
    if (year != p.next_year || year > kLastYear)
      throw Error(Errc::NonMonotonicYears,
                  fmt::format("scenario {} year {}: expected year {} (row {})", id, year, p.next_year, row));

    YearMetrics m;
    for (auto metric : {Metric::OilDemand, Metric::GasDemand, Metric::LcRoi, Metric::LcSupply, Metric::OpecShare}) {
      const std::size_t c = col[4 + static_cast<std::size_t>(metric)];
      auto v = detail::parse_double(fields[c]);
      if (!v)
        throw Error(Errc::OutOfRangeMetric,
                    fmt::format("scenario {} year {}: {}='{}' is not a number", id, year, kScenarioColumns[4 + static_cast<std::size_t>(metric)], fields[c]));
      m[metric] = *v;
    }
    validate_year(p.scenario, year, m);
    p.scenario.at(year) = m;
    ++p.next_year;
  }

  std::vector<Scenario> scenarios;
  scenarios.reserve(partials.size());
  for (auto& p : partials) {
    if (p.next_year != kLastYear + 1)
      throw Error(Errc::NonMonotonicYears,
                  fmt::format("scenario {} year {}: missing (series ends at {})", p.scenario.id, p.next_year, p.next_year - 1));
    scenarios.push_back(std::move(p.scenario));
  }

  std::vector<double> oil2020;
  for (const auto& s : scenarios) oil2020.push_back(s.at(kFirstYear).oil_demand);
  const double med = detail::median(oil2020);
  LoadReport local;
  local.median_2020_oil_demand = med;
  if (options.outlier_fraction) {
    const double threshold = *options.outlier_fraction * med;
    std::erase_if(scenarios, [&](const Scenario& s) {
      if (s.at(kFirstYear).oil_demand < threshold) {
        local.excluded.push_back(s.id);
        return true;
      }
      return false;
    });
  }
  local.accepted = scenarios.size();
  if (report) *report = local;
  return ScenarioSet(std::move(scenarios));
}

inline ScenarioSet load_scenarios(const std::filesystem::path& path, const LoadOptions& options = {},
                                  LoadReport* report = nullptr) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::IoError, fmt::format("cannot open scenario file {}", path.string()));
  return parse_scenarios(in, options, report);
}

/// Writes the ensemble in the CSV schema with round-trip precision.
inline void write_scenarios(std::ostream& out, const ScenarioSet& set) {
  for (std::size_t c = 0; c < kScenarioColumns.size(); ++c) out << (c ? "," : "") << kScenarioColumns[c];
  out << '\n';
  for (const auto& s : set)
    for (int y = kFirstYear; y <= kLastYear; ++y) {
      const auto& m = s.at(y);
      out << fmt::format("{},{},{},{},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g}\n", s.id, s.model_name,
                         to_string(s.bucket), y, m.oil_demand, m.gas_demand, m.lc_roi, m.lc_supply, m.opec_share);
    }
}

inline void save_scenarios(const std::filesystem::path& path, const ScenarioSet& set) {
  std::ofstream out(path);
  if (!out) throw Error(Errc::IoError, fmt::format("cannot write scenario file {}", path.string()));
  write_scenarios(out, set);
}

// ---------------------------------------------------------------------------
// Sampling

struct SamplerState {
  std::vector<std::size_t> permutation;  // indices into the ScenarioSet
  std::size_t cursor = 0;
  std::uint64_t epoch_count = 0;
  std::uint64_t rng_seed = 0;

  bool operator==(const SamplerState&) const = default;
};

namespace detail {
inline std::vector<std::size_t> shuffled_indices(std::size_t n, std::uint64_t seed) {
  std::vector<std::size_t> perm(n);
  for (std::size_t i = 0; i < n; ++i) perm[i] = i;
  Rng rng(seed);
  std::shuffle(perm.begin(), perm.end(), rng);
  return perm;
}
}  // namespace detail

inline SamplerState make_sampler(const ScenarioSet& set, std::uint64_t seed) {
  SamplerState s;
  s.rng_seed = seed;
  s.permutation = detail::shuffled_indices(set.size(), derive_seed(seed, {0}));
  return s;
}

/// Draws the next scenario. Within one pass of the permutation no scenario
/// repeats; an exhausted permutation is reshuffled with a fresh sub-seed.
inline std::pair<const Scenario*, SamplerState> next_scenario(SamplerState state, const ScenarioSet& set) {
  if (set.empty()) throw Error(Errc::EmptyPool, "scenario set is empty");
  if (state.permutation.size() != set.size()) state = make_sampler(set, state.rng_seed);
  if (state.cursor >= state.permutation.size()) {
    ++state.epoch_count;
    state.permutation = detail::shuffled_indices(set.size(), derive_seed(state.rng_seed, {state.epoch_count}));
    state.cursor = 0;
  }
  const Scenario* s = &set[state.permutation[state.cursor++]];
  return {s, std::move(state)};
}

/// Multiplies every metric at every year by an independent draw in
/// [1-margin, 1+margin]; range clamps are re-applied afterwards.
inline Scenario perturb(const Scenario& scenario, const RandomizationMargins& margins, Rng& rng) {
  Scenario out = scenario;
  for (auto& y : out.years) {
    for (auto metric : {Metric::OilDemand, Metric::GasDemand, Metric::LcRoi, Metric::LcSupply, Metric::OpecShare}) {
      const double m = margins[metric];
      if (m <= 0.0) continue;
      double& v = y[metric];
      v *= uniform(rng, 1.0 - m, 1.0 + m);
      switch (metric) {
        case Metric::OpecShare: v = std::clamp(v, 0.01, 0.99); break;
        case Metric::LcRoi: v = std::clamp(v, 0.0, 0.5); break;
        case Metric::LcSupply: v = std::max(v, 0.0); break;
        default: v = std::max(v, 1e-9); break;
      }
    }
  }
  return out;
}

}  // namespace tl
