#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace tl {

// Error classes surfaced across module boundaries. Every diagnostic carries
// one of these so the CLI can print a single-line class name.
enum class Errc {
  MissingColumn,
  NonMonotonicYears,
  OutOfRangeMetric,
  MalformedRow,
  UnequalPortfolioValue,
  InvalidPortfolio,
  OverProduction,
  OverAllocation,
  WrongStage,
  AccountingViolation,
  DimensionMismatch,
  NonFiniteGradient,
  VersionMismatch,
  CorruptChecksum,
  EmptyPool,
  WrongRosterSize,
  CheckpointLoadError,
  MissingBenchmark,
  ConfigError,
  SubcommandError,
  UnknownScenario,
  SessionNotFound,
  InvalidSubmission,
  IoError,
};

constexpr std::string_view errc_name(Errc code) {
  switch (code) {
    case Errc::MissingColumn: return "MissingColumn";
    case Errc::NonMonotonicYears: return "NonMonotonicYears";
    case Errc::OutOfRangeMetric: return "OutOfRangeMetric";
    case Errc::MalformedRow: return "MalformedRow";
    case Errc::UnequalPortfolioValue: return "UnequalPortfolioValue";
    case Errc::InvalidPortfolio: return "InvalidPortfolio";
    case Errc::OverProduction: return "OverProduction";
    case Errc::OverAllocation: return "OverAllocation";
    case Errc::WrongStage: return "WrongStage";
    case Errc::AccountingViolation: return "AccountingViolation";
    case Errc::DimensionMismatch: return "DimensionMismatch";
    case Errc::NonFiniteGradient: return "NonFiniteGradient";
    case Errc::VersionMismatch: return "VersionMismatch";
    case Errc::CorruptChecksum: return "CorruptChecksum";
    case Errc::EmptyPool: return "EmptyPool";
    case Errc::WrongRosterSize: return "WrongRosterSize";
    case Errc::CheckpointLoadError: return "CheckpointLoadError";
    case Errc::MissingBenchmark: return "MissingBenchmark";
    case Errc::ConfigError: return "ConfigError";
    case Errc::SubcommandError: return "SubcommandError";
    case Errc::UnknownScenario: return "UnknownScenario";
    case Errc::SessionNotFound: return "SessionNotFound";
    case Errc::InvalidSubmission: return "InvalidSubmission";
    case Errc::IoError: return "IoError";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message)
      : std::runtime_error(std::string(errc_name(code)) + ": " + message), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace tl
