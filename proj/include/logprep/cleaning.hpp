#pragma once

// Removal of records that do not represent page views (embedded images,
// stylesheets, and optionally failed requests).

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "logprep/record.hpp"

namespace logprep {

struct CleaningVerdict {
  bool irrelevant = false;
  std::string reason;  // "SUFFIX:<suffix>", "FAILED_STATUS", or empty

  bool operator==(const CleaningVerdict&) const = default;
};

/// Suffix rules are checked first, in policy order, against the lowercased
/// URI path; the status rule applies only when remove_failed_status is set.
CleaningVerdict is_irrelevant(const LogRecord& r, const CleaningPolicy& policy);

struct CleanResult {
  std::vector<LogRecord> kept;
  std::map<std::string, std::uint64_t> removed_by_reason;
};

CleanResult clean(std::vector<LogRecord> records, const CleaningPolicy& policy);

}  // namespace logprep
