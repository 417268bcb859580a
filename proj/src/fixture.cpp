#include "logprep/fixture.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <limits>
#include <random>

#include "logprep/error.hpp"
#include "logprep/parsers.hpp"

namespace logprep {

namespace {

// std::mt19937_64's output sequence is fixed by the standard; the
// distributions are not, so bounded draws are done here.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t below(std::uint64_t n) {
    const std::uint64_t threshold = (0 - n) % n;
    for (;;) {
      const std::uint64_t x = engine_();
      if (x >= threshold) return x % n;
    }
  }
  std::int64_t between(std::int64_t lo, std::int64_t hi) {
    return lo + static_cast<std::int64_t>(below(static_cast<std::uint64_t>(hi - lo) + 1));
  }
  bool one_in(std::uint64_t n) { return below(n) == 0; }

 private:
  std::mt19937_64 engine_;
};

// Splits `total` into `parts` positive counts.
std::vector<std::uint64_t> spread(std::uint64_t total, std::size_t parts, Rng& rng) {
  std::vector<std::uint64_t> out(parts, 1);
  for (std::uint64_t i = parts; i < total; ++i) ++out[rng.below(parts)];
  return out;
}

const std::vector<std::string>& agent_pool() {
  static const std::vector<std::string> pool{
      "Mozilla/5.0 (Windows NT 6.1) AppleWebKit/537.36 (KHTML, like Gecko) Chrome/47.0.2526.106 Safari/537.36",
      "Mozilla/5.0 (X11; Ubuntu; Linux x86_64; rv:38.0) Gecko/20100101 Firefox/38.0",
      "Mozilla/5.0 (compatible; MSIE 9.0; Windows NT 6.1; Trident/5.0)",
      "Mozilla/5.0 (Macintosh; Intel Mac OS X 10_11_2) AppleWebKit/601.3.9 (KHTML, like Gecko) Version/9.0.2 "
      "Safari/601.3.9",
      "Mozilla/5.0 (iPhone; CPU iPhone OS 9_2 like Mac OS X) AppleWebKit/601.1.46 (KHTML, like Gecko) "
      "Version/9.0 Mobile/13C75 Safari/601.1",
      "Mozilla/5.0 (Linux; Android 5.1.1; Nexus 5 Build/LMY48B) AppleWebKit/537.36 (KHTML, like Gecko) "
      "Chrome/46.0.2490.76 Mobile Safari/537.36",
      "Opera/9.80 (Windows NT 6.1; WOW64) Presto/2.12.388 Version/12.16",
      "Mozilla/5.0 (Windows NT 10.0; Win64; x64) AppleWebKit/537.36 (KHTML, like Gecko) Chrome/46.0.2486.0 "
      "Safari/537.36 Edge/13.10586",
      "Mozilla/5.0 (Windows NT 6.1; WOW64; rv:43.0) Gecko/20100101 Firefox/43.0",
  };
  return pool;
}

const std::vector<std::string>& entry_pages() {
  static const std::vector<std::string> pages{"/", "/index.html", "/Website/", "/products/", "/blog/"};
  return pages;
}

const std::vector<std::string>& all_pages() {
  static const std::vector<std::string> pages = [] {
    std::vector<std::string> p = entry_pages();
    for (const char* s : {"/about.html", "/contact.php", "/cart.aspx", "/docs/guide.pdf", "/search.php?q=shoes",
                          "/search.php?q=lamps", "/account/login.php"}) {
      p.emplace_back(s);
    }
    for (int i = 1; i <= 12; ++i) p.push_back("/products/item" + std::to_string(i) + ".html");
    for (int i = 1; i <= 8; ++i) p.push_back("/blog/post-" + std::to_string(i) + ".html");
    return p;
  }();
  return pages;
}

constexpr const char* kSiteOrigin = "http://www.example.org";
constexpr std::array<const char*, 4> kIrrelevantSuffixes{".gif", ".jpg", ".jpeg", ".css"};

std::string resource_uri(const std::string& suffix, std::uint64_t n, Rng& rng) {
  std::string dir = suffix == ".css" ? "/css/style" : suffix == ".gif" ? "/images/banner" : "/images/photo";
  std::string ext = suffix;
  if (rng.one_in(6)) {
    std::transform(ext.begin(), ext.end(), ext.begin(),
                   [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
  }
  std::string uri = dir + std::to_string(n) + ext;
  if (rng.one_in(6)) uri += "?v=" + std::to_string(rng.between(1, 9));
  return uri;
}

struct Event {
  Instant utc;
  std::size_t owner;
  std::uint64_t seq;
  LogRecord record;
  std::optional<std::string> removal_reason;
  std::optional<std::size_t> session_slot;
};

struct PlannedSession {
  std::size_t owner;
  Instant start;
};

struct Owner {
  std::string ip;
  std::string agent;
  std::vector<std::pair<Instant, std::string>> pages;  // kept page views (time, uri)
};

}  // namespace

Fixture generate_fixture(const FixtureSpec& spec) {
  if (spec.n_irrelevant > spec.n_records) {
    throw Error(ErrorCode::InfeasibleFixture, "more irrelevant records (" + std::to_string(spec.n_irrelevant) +
                                                  ") than records (" + std::to_string(spec.n_records) + ")");
  }
  const std::uint64_t kept = spec.n_records - spec.n_irrelevant;
  if (spec.n_users > kept) {
    throw Error(ErrorCode::InfeasibleFixture, std::to_string(spec.n_users) + " users cannot each own one of " +
                                                  std::to_string(kept) + " kept records");
  }
  if (kept > 0 && spec.n_users == 0) {
    throw Error(ErrorCode::InfeasibleFixture, "kept records need at least one user");
  }
  if (spec.n_users > 60000) throw Error(ErrorCode::InfeasibleFixture, "at most 60000 users are supported");
  if (!(spec.sessions_per_user_mean >= 1.0) || !std::isfinite(spec.sessions_per_user_mean)) {
    throw Error(ErrorCode::InfeasibleFixture, "sessions per user mean must be >= 1");
  }

  Rng rng(spec.seed);
  const int offset = (spec.format == FormatKind::NcsaCommon || spec.format == FormatKind::NcsaCombined) ? 330 : 0;
  const Instant base = *make_instant(2012, 1, 19, 2, 30, 0);

  // Distinct addresses from 172.16.0.0/16.
  std::vector<std::uint32_t> addresses;
  for (std::uint32_t a = 0; a < 256; ++a) {
    for (std::uint32_t b = 1; b < 255; ++b) addresses.push_back((a << 8) | b);
  }
  std::vector<Owner> owners(spec.n_users);
  for (std::size_t u = 0; u < owners.size(); ++u) {
    std::swap(addresses[u], addresses[u + rng.below(addresses.size() - u)]);
    owners[u].ip = "172.16." + std::to_string(addresses[u] >> 8) + "." + std::to_string(addresses[u] & 0xff);
    owners[u].agent = agent_pool()[rng.below(agent_pool().size())];
  }

  std::vector<Event> events;
  std::vector<PlannedSession> sessions;
  std::uint64_t seq = 0;

  auto make_record = [&](const Owner& o, Instant t, std::string uri, std::optional<std::string> referrer) {
    LogRecord r;
    r.ip = o.ip;
    r.timestamp = Timestamp{t, offset};
    r.method = "GET";
    r.uri = std::move(uri);
    r.protocol = "HTTP/1.1";
    r.status = rng.one_in(10) ? 304 : 200;
    r.bytes_sent = *r.status == 304 ? 0 : rng.between(200, 20000);
    r.user_agent = o.agent;
    r.referrer = std::move(referrer);
    if (spec.format == FormatKind::Iis) {
      r.service_name = "W3SVC1";
      r.server_name = "WEB01";
      r.server_ip = "10.0.0.1";
      r.time_taken_ms = rng.between(10, 900);
      r.bytes_received = rng.between(150, 900);
      r.windows_status = 0;
    }
    return r;
  };

  const std::vector<std::uint64_t> per_user = spec.n_users ? spread(kept, spec.n_users, rng) : std::vector<std::uint64_t>{};
  const auto session_span = static_cast<std::uint64_t>(std::max(1.0, std::round(2 * spec.sessions_per_user_mean - 1)));
  for (std::size_t u = 0; u < owners.size(); ++u) {
    Owner& o = owners[u];
    const std::uint64_t n_sessions = std::min<std::uint64_t>(per_user[u], 1 + rng.below(session_span));
    const auto sizes = spread(per_user[u], n_sessions, rng);
    Instant t = base + std::chrono::seconds(rng.between(0, 8 * 3600));
    for (std::size_t s = 0; s < sizes.size(); ++s) {
      if (s > 0) t += std::chrono::seconds(rng.between(40 * 60, 4 * 3600));
      sessions.push_back({u, t});
      std::vector<std::string> path;
      for (std::uint64_t i = 0; i < sizes[s]; ++i) {
        if (i > 0) t += std::chrono::seconds(rng.between(5, 25 * 60));
        const std::string page = i == 0 ? entry_pages()[rng.below(entry_pages().size())]
                                        : all_pages()[rng.below(all_pages().size())];
        std::optional<std::string> referrer;
        if (i == 0) {
          if (rng.one_in(2)) referrer = "http://www.google.com/search?q=example";
        } else if (i >= 2 && path[i - 2] != path[i - 1] && rng.one_in(8)) {
          referrer = kSiteOrigin + path[i - 2];  // came back from a cached page
        } else {
          referrer = kSiteOrigin + path[i - 1];
        }
        path.push_back(page);
        o.pages.emplace_back(t, page);
        events.push_back({t, u, seq++, make_record(o, t, page, std::move(referrer)), std::nullopt, sessions.size() - 1});
      }
    }
  }

  if (spec.n_irrelevant > 0 && owners.empty()) {
    Owner ghost{"10.255.255.254", agent_pool().front(), {}};
    ghost.pages.emplace_back(base, "/");
    owners.push_back(std::move(ghost));
  }
  for (std::uint64_t j = 0; j < spec.n_irrelevant; ++j) {
    const std::size_t u = rng.below(owners.size());
    const auto& [anchor_time, anchor_page] = owners[u].pages[rng.below(owners[u].pages.size())];
    const std::string suffix = kIrrelevantSuffixes[rng.below(kIrrelevantSuffixes.size())];
    const Instant t = anchor_time + std::chrono::seconds(rng.between(1, 4));
    LogRecord r = make_record(owners[u], t, resource_uri(suffix, rng.between(1, 40), rng), kSiteOrigin + anchor_page);
    events.push_back({t, u, seq++, std::move(r), "SUFFIX:" + suffix, std::nullopt});
  }

  std::sort(events.begin(), events.end(), [](const Event& a, const Event& b) {
    if (a.utc != b.utc) return a.utc < b.utc;
    if (a.owner != b.owner) return a.owner < b.owner;
    return a.seq < b.seq;
  });

  // Users are numbered by the first appearance of a kept record.
  std::vector<std::optional<std::uint64_t>> user_id(owners.size());
  std::uint64_t next_user = 1;
  for (const auto& e : events) {
    if (!e.removal_reason && !user_id[e.owner]) user_id[e.owner] = next_user++;
  }

  std::vector<std::size_t> session_order(sessions.size());
  for (std::size_t i = 0; i < sessions.size(); ++i) session_order[i] = i;
  std::sort(session_order.begin(), session_order.end(), [&](std::size_t a, std::size_t b) {
    const auto ua = *user_id[sessions[a].owner], ub = *user_id[sessions[b].owner];
    if (ua != ub) return ua < ub;
    return sessions[a].start < sessions[b].start;
  });
  std::vector<std::uint64_t> session_id(sessions.size());
  for (std::size_t i = 0; i < session_order.size(); ++i) session_id[session_order[i]] = i + 1;

  Fixture fx;
  fx.spec = spec;
  fx.sessions = sessions.size();
  LogFormat format{spec.format, {}};
  if (spec.format == FormatKind::W3cExtended) {
    format.field_map = {"date",        "time",       "c-ip",      "cs-username", "cs-method",      "cs-uri-stem",
                        "cs-uri-query", "sc-status", "sc-bytes",  "cs-version",  "cs(User-Agent)", "cs(Referer)"};
    fx.lines = render_w3c_header(format.field_map, events.empty() ? base : events.front().utc);
  }
  for (auto& e : events) {
    e.record.line_no = fx.lines.size() + 1;
    fx.lines.push_back(render_line(e.record, format));
    PlannedRecord p;
    p.line_no = e.record.line_no;
    p.removed = e.removal_reason.has_value();
    p.removal_reason = e.removal_reason;
    p.user_id = user_id[e.owner];
    if (e.session_slot) p.session_id = session_id[*e.session_slot];
    fx.truth.push_back(p);
  }
  return fx;
}

std::string Fixture::log_text() const {
  std::string out;
  for (const auto& l : lines) {
    out += l;
    out += '\n';
  }
  return out;
}

nlohmann::ordered_json Fixture::sidecar() const {
  nlohmann::ordered_json j;
  j["spec"] = {{"records", spec.n_records},
               {"irrelevant", spec.n_irrelevant},
               {"users", spec.n_users},
               {"sessions_per_user_mean", spec.sessions_per_user_mean},
               {"seed", spec.seed},
               {"format", std::string(to_string(spec.format))}};
  j["summary"] = {{"records", truth.size()},
                  {"irrelevant", std::count_if(truth.begin(), truth.end(), [](const PlannedRecord& p) { return p.removed; })},
                  {"users", spec.n_users},
                  {"sessions", sessions}};
  j["records"] = nlohmann::ordered_json::array();
  for (const auto& p : truth) {
    nlohmann::ordered_json r;
    r["line_no"] = p.line_no;
    r["removed"] = p.removed;
    r["removal_reason"] = p.removal_reason ? nlohmann::ordered_json(*p.removal_reason) : nlohmann::ordered_json(nullptr);
    r["user_id"] = p.user_id ? nlohmann::ordered_json(*p.user_id) : nlohmann::ordered_json(nullptr);
    r["session_id"] = p.session_id ? nlohmann::ordered_json(*p.session_id) : nlohmann::ordered_json(nullptr);
    j["records"].push_back(std::move(r));
  }
  return j;
}

void write_fixture(const Fixture& fixture, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::Io, "cannot create " + dir.string() + ": " + ec.message());
  {
    std::ofstream log(dir / kFixtureLogName, std::ios::binary);
    log << fixture.log_text();
    if (!log) throw Error(ErrorCode::Io, "write failure on " + (dir / kFixtureLogName).string());
  }
  std::ofstream truth(dir / kFixtureTruthName, std::ios::binary);
  truth << fixture.sidecar().dump(2) << '\n';
  if (!truth) throw Error(ErrorCode::Io, "write failure on " + (dir / kFixtureTruthName).string());
}

}  // namespace logprep
