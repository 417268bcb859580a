#pragma once

// Deterministic synthetic access logs with a ground-truth sidecar: which
// records cleaning must drop, which user and session every record belongs to.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "logprep/record.hpp"

namespace logprep {

struct FixtureSpec {
  std::uint64_t n_records = 500;
  std::uint64_t n_irrelevant = 59;
  std::uint64_t n_users = 52;
  double sessions_per_user_mean = 2.0;
  std::uint64_t seed = 42;
  FormatKind format = FormatKind::NcsaCombined;
};

struct PlannedRecord {
  std::uint64_t line_no = 0;
  bool removed = false;
  std::optional<std::string> removal_reason;  // "SUFFIX:<suffix>" under the default policy
  std::optional<std::uint64_t> user_id;       // owner; absent only when n_users == 0
  std::optional<std::uint64_t> session_id;    // kept records only
};

struct Fixture {
  FixtureSpec spec;
  std::vector<std::string> lines;  // the log file, one entry per line
  std::vector<PlannedRecord> truth;
  std::uint64_t sessions = 0;

  std::string log_text() const;
  nlohmann::ordered_json sidecar() const;
};

/// Throws Error(InfeasibleFixture) when the counts cannot be met: more
/// irrelevant records than records, more users than kept records, kept
/// records but no users, or a non-positive session mean.
Fixture generate_fixture(const FixtureSpec& spec);

inline constexpr const char* kFixtureLogName = "access.log";
inline constexpr const char* kFixtureTruthName = "access.truth.json";

/// Writes <dir>/access.log and <dir>/access.truth.json.
void write_fixture(const Fixture& fixture, const std::filesystem::path& dir);

}  // namespace logprep
