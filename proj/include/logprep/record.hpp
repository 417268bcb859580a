#pragma once

// Normalized access-log record and the small value types shared by every
// pipeline stage (format descriptor, cleaning policy, statistics).

#include <chrono>
#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

namespace logprep {

using Millis = std::chrono::milliseconds;
using Instant = std::chrono::sys_time<Millis>;

/// Builds a UTC instant from calendar fields; nullopt when any field is out
/// of range (including day-of-month validity).
std::optional<Instant> make_instant(int year, int month, int day, int hour, int minute, int second,
                                    int millis = 0);

/// "2012-01-09T03:56:27Z", with ".mmm" only when the millisecond part is non-zero.
std::string format_iso_utc(Instant t);
std::optional<Instant> parse_iso_utc(std::string_view text);

struct CivilTime {
  int year, month, day, hour, minute, second, millis;
};
CivilTime to_civil(Instant t);

/// A UTC instant plus the UTC offset of the wall clock that produced it.
struct Timestamp {
  Instant utc{};
  int offset_minutes = 0;

  Instant local() const { return utc + std::chrono::minutes(offset_minutes); }
  bool operator==(const Timestamp&) const = default;
};

struct RecordKey {
  std::string source_file;
  std::uint64_t line_no = 0;
  int sub_ordinal = 0;  // 0 for real records, negative for inferred ones

  auto operator<=>(const RecordKey&) const = default;
};

struct LogRecord {
  std::uint64_t line_no = 0;
  int sub_ordinal = 0;
  std::string source_file;
  std::string ip;
  Timestamp timestamp;
  std::string method;
  std::string uri;
  std::optional<std::string> protocol;
  std::optional<int> status;
  std::optional<std::int64_t> bytes_sent;
  std::optional<std::int64_t> bytes_received;
  std::optional<std::string> username;
  std::optional<std::string> user_agent;
  std::optional<std::string> referrer;

  // IIS-only
  std::optional<std::string> service_name;
  std::optional<std::string> server_name;
  std::optional<std::string> server_ip;
  std::optional<std::int64_t> time_taken_ms;
  std::optional<std::int64_t> windows_status;

  // Source columns without a normalized slot (unknown W3C tokens, NCSA ident),
  // kept verbatim in source order.
  std::vector<std::pair<std::string, std::string>> extras;

  bool inferred = false;

  bool operator==(const LogRecord&) const = default;

  const std::string* extra(std::string_view name) const;
};

RecordKey record_key(const LogRecord& r);

/// Orders by record_key; the comparator every stage uses for "file order".
struct ByRecordKey {
  bool operator()(const LogRecord& a, const LogRecord& b) const;
};

enum class FormatKind { W3cExtended, NcsaCommon, NcsaCombined, Iis };

std::string_view to_string(FormatKind kind);
/// Accepts the CLI spellings: w3c, ncsa, ncsa-combined, iis.
std::optional<FormatKind> parse_format_kind(std::string_view text);

struct LogFormat {
  FormatKind kind = FormatKind::NcsaCommon;
  std::vector<std::string> field_map;  // W3C only, from "#Fields:"

  bool operator==(const LogFormat&) const = default;
};

struct StatusRange {
  int lo = 0;
  int hi = 0;
  bool contains(int status) const { return status >= lo && status <= hi; }
  bool operator==(const StatusRange&) const = default;
};

struct CleaningPolicy {
  std::vector<std::string> irrelevant_suffixes{".jpg", ".jpeg", ".gif", ".css"};
  bool remove_failed_status = false;
  std::vector<StatusRange> failed_status{{100, 199}, {400, 599}};
  bool strip_query_before_match = true;

  /// Default suffixes plus common script/image/plugin assets.
  static CleaningPolicy web_assets_preset();

  /// Lowercases suffixes, drops duplicates; throws Error(Config) when a
  /// suffix does not start with '.'.
  void set_suffixes(const std::vector<std::string>& suffixes);
  void validate() const;

  bool operator==(const CleaningPolicy&) const = default;
};

struct PipelineStats {
  std::uint64_t lines_read = 0;
  std::uint64_t lines_directive = 0;
  std::uint64_t lines_blank = 0;
  std::uint64_t lines_skipped_malformed = 0;
  std::map<std::string, std::uint64_t> skipped_by_reason;
  std::uint64_t records_parsed = 0;
  std::map<std::string, std::uint64_t> records_removed_by_reason;
  std::uint64_t records_after_cleaning = 0;
  std::uint64_t users_identified = 0;
  std::uint64_t sessions_identified = 0;
  std::uint64_t records_inferred = 0;

  /// Human-readable descriptions of every broken arithmetic identity; empty
  /// when the stats are consistent.
  std::vector<std::string> identity_violations() const;

  /// The subset of identity_violations() that holds after extraction alone,
  /// before cleaning has run: every line read is accounted for exactly once.
  std::vector<std::string> line_accounting_violations() const;

  /// Adds the line/parse counters of another partial (per-file) result.
  void merge_parse_counts(const PipelineStats& other);

  nlohmann::ordered_json to_json() const;
  bool operator==(const PipelineStats&) const = default;
};

// Canonical tabular form of a record. The first fourteen columns are the
// fixed public schema; the remaining ones carry the fields needed for an
// exact round trip.
const std::vector<std::string>& record_columns();
std::vector<std::optional<std::string>> record_to_row(const LogRecord& r);
/// Throws Error(MalformedTable) on a row that does not match record_columns().
LogRecord record_from_row(const std::vector<std::optional<std::string>>& row);

nlohmann::ordered_json record_to_json(const LogRecord& r);
LogRecord record_from_json(const nlohmann::json& j);

}  // namespace logprep
