#pragma once

// Time-oriented sessionization and referrer/graph path completion.

#include <chrono>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "logprep/identity.hpp"
#include "logprep/record.hpp"

namespace logprep {

struct SessionOptions {
  Millis timeout = std::chrono::minutes(30);
  std::optional<Millis> max_page_stay;
};

struct Session {
  std::uint64_t session_id = 0;
  std::uint64_t user_id = 0;
  std::vector<LogRecord> entries;  // real and inferred, in visit order
  Instant start_utc{};
  Instant end_utc{};  // last real entry

  std::vector<RecordKey> record_keys() const;
  std::size_t real_count() const;
  std::size_t inferred_count() const;
};

/// Splits one user's records into sessions. A gap strictly greater than the
/// timeout (or than max_page_stay, when set) starts a new session; equal
/// timestamps keep record_key order. Session ids are 1..n for this call.
/// Throws Error(Config) for a non-positive timeout.
std::vector<Session> sessionize(const UserAssignment& user, std::span<const LogRecord> user_records,
                                const SessionOptions& options = {});

/// Renumbers sessions 1..n ordered by (user_id, start_utc).
void assign_session_ids(std::vector<Session>& sessions);

/// Inserts inferred page views that explain each real request. With referrer
/// data, a request whose referrer is an earlier page other than the previous
/// one gets the backtrack from the previous page to that referrer inserted in
/// front of it. Without any referrer in the session, the interior of the
/// shortest graph path between consecutive pages is inserted instead.
/// Inferred timestamps are spread evenly inside the open gap; a gap too
/// narrow to hold them at millisecond resolution is left alone.
Session complete_paths(const Session& session, const SiteGraph& graph);

}  // namespace logprep
