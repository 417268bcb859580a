#include "logprep/sessions.hpp"

#include <algorithm>

#include "logprep/error.hpp"

namespace logprep {

std::vector<RecordKey> Session::record_keys() const {
  std::vector<RecordKey> keys;
  keys.reserve(entries.size());
  for (const auto& e : entries) keys.push_back(record_key(e));
  return keys;
}

std::size_t Session::real_count() const {
  return static_cast<std::size_t>(
      std::count_if(entries.begin(), entries.end(), [](const LogRecord& r) { return !r.inferred; }));
}

std::size_t Session::inferred_count() const { return entries.size() - real_count(); }

namespace {

void close_session(std::vector<Session>& out, Session& current) {
  if (current.entries.empty()) return;
  current.start_utc = current.entries.front().timestamp.utc;
  for (auto it = current.entries.rbegin(); it != current.entries.rend(); ++it) {
    if (!it->inferred) {
      current.end_utc = it->timestamp.utc;
      break;
    }
  }
  current.session_id = out.size() + 1;
  out.push_back(std::move(current));
  current = Session{};
}

}  // namespace

std::vector<Session> sessionize(const UserAssignment& user, std::span<const LogRecord> user_records,
                                const SessionOptions& options) {
  if (options.timeout <= Millis::zero()) throw Error(ErrorCode::Config, "session timeout must be positive");
  if (options.max_page_stay && *options.max_page_stay <= Millis::zero()) {
    throw Error(ErrorCode::Config, "max page stay must be positive");
  }
  const Millis limit = options.max_page_stay ? std::min(options.timeout, *options.max_page_stay) : options.timeout;

  std::vector<const LogRecord*> order;
  order.reserve(user_records.size());
  for (const auto& r : user_records) order.push_back(&r);
  std::stable_sort(order.begin(), order.end(), [](const LogRecord* a, const LogRecord* b) {
    if (a->timestamp.utc != b->timestamp.utc) return a->timestamp.utc < b->timestamp.utc;
    return ByRecordKey{}(*a, *b);
  });

  std::vector<Session> out;
  Session current;
  current.user_id = user.user_id;
  for (const LogRecord* r : order) {
    if (!current.entries.empty() && r->timestamp.utc - current.entries.back().timestamp.utc > limit) {
      close_session(out, current);
      current.user_id = user.user_id;
    }
    current.entries.push_back(*r);
  }
  close_session(out, current);
  return out;
}

void assign_session_ids(std::vector<Session>& sessions) {
  std::stable_sort(sessions.begin(), sessions.end(), [](const Session& a, const Session& b) {
    if (a.user_id != b.user_id) return a.user_id < b.user_id;
    return a.start_utc < b.start_utc;
  });
  for (std::size_t i = 0; i < sessions.size(); ++i) sessions[i].session_id = i + 1;
}

namespace {

struct Visit {
  std::string page;  // canonical
  std::string uri;   // as it should appear on the inferred record
};

// Pages walked back from `history.back()` to the most recent earlier visit of
// `target`, loops cut; empty when target was never visited before.
std::vector<Visit> backtrack(const std::vector<LogRecord>& history, const std::string& target) {
  const std::size_t p = history.size() - 1;
  std::size_t found = p;
  for (std::size_t k = p; k-- > 0;) {
    if (canonical_page(history[k].uri) == target) {
      found = k;
      break;
    }
  }
  if (found == p) return {};

  std::vector<Visit> walk{{canonical_page(history[p].uri), history[p].uri}};
  for (std::size_t k = p; k-- > found;) {
    Visit v{canonical_page(history[k].uri), history[k].uri};
    auto seen = std::find_if(walk.begin(), walk.end(), [&](const Visit& w) { return w.page == v.page; });
    if (seen != walk.end()) {
      walk.erase(std::next(seen), walk.end());
    } else {
      walk.push_back(std::move(v));
    }
  }
  walk.erase(walk.begin());
  return walk;
}

}  // namespace

Session complete_paths(const Session& session, const SiteGraph& graph) {
  const bool has_referrers = std::any_of(session.entries.begin(), session.entries.end(), [](const LogRecord& r) {
    return !r.inferred && r.referrer.has_value();
  });

  Session out = session;
  out.entries.clear();
  out.entries.reserve(session.entries.size());

  for (const LogRecord& q : session.entries) {
    if (out.entries.empty() || q.inferred) {
      out.entries.push_back(q);
      continue;
    }
    const LogRecord& p = out.entries.back();
    const std::string p_page = canonical_page(p.uri);
    std::vector<Visit> missing;
    if (has_referrers) {
      if (q.referrer) {
        const std::string r = canonical_page(*q.referrer);
        if (r != p_page) missing = backtrack(out.entries, r);
      }
    } else {
      const std::string q_page = canonical_page(q.uri);
      if (q_page != p_page) {
        if (auto path = graph.shortest_path(p_page, q_page); path && path->size() > 2) {
          for (std::size_t i = 1; i + 1 < path->size(); ++i) missing.push_back({(*path)[i], (*path)[i]});
        }
      }
    }

    const auto gap = (q.timestamp.utc - p.timestamp.utc).count();
    const auto k = static_cast<long long>(missing.size());
    if (k > 0 && gap >= k + 1) {
      const Instant t0 = p.timestamp.utc;
      for (long long i = 0; i < k; ++i) {
        LogRecord x;
        x.source_file = q.source_file;
        x.line_no = q.line_no;
        x.sub_ordinal = static_cast<int>(i - k);
        x.ip = q.ip;
        x.user_agent = q.user_agent;
        x.method = "GET";
        x.uri = missing[static_cast<std::size_t>(i)].uri;
        x.timestamp = Timestamp{t0 + Millis{gap * (i + 1) / (k + 1)}, q.timestamp.offset_minutes};
        x.inferred = true;
        out.entries.push_back(std::move(x));
      }
    }
    out.entries.push_back(q);
  }
  return out;
}

}  // namespace logprep
