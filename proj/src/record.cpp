#include "logprep/record.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <set>

#include "logprep/error.hpp"

namespace logprep {

namespace chr = std::chrono;

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::EmptyInput: return "EMPTY_INPUT";
    case ErrorCode::MissingFieldsDirective: return "MISSING_FIELDS_DIRECTIVE";
    case ErrorCode::MalformedEdgeLine: return "MALFORMED_EDGE_LINE";
    case ErrorCode::MissingGraph: return "MISSING_GRAPH";
    case ErrorCode::Io: return "IO_ERROR";
    case ErrorCode::Config: return "CONFIG_ERROR";
    case ErrorCode::InfeasibleFixture: return "INFEASIBLE_FIXTURE";
    case ErrorCode::InvariantViolation: return "INVARIANT_VIOLATION";
    case ErrorCode::MalformedTable: return "MALFORMED_TABLE";
  }
  return "UNKNOWN";
}

// ---------------------------------------------------------------------------
// Time

std::optional<Instant> make_instant(int year, int month, int day, int hour, int minute, int second,
                                    int millis) {
  if (month < 1 || month > 12 || day < 1 || day > 31) return std::nullopt;
  if (hour < 0 || hour > 23 || minute < 0 || minute > 59 || second < 0 || second > 60) {
    return std::nullopt;
  }
  if (millis < 0 || millis > 999) return std::nullopt;
  const chr::year_month_day ymd{chr::year{year}, chr::month{static_cast<unsigned>(month)},
                                chr::day{static_cast<unsigned>(day)}};
  if (!ymd.ok()) return std::nullopt;
  return Instant{chr::sys_days{ymd}} + chr::hours{hour} + chr::minutes{minute} +
         chr::seconds{second} + Millis{millis};
}

CivilTime to_civil(Instant t) {
  const auto days = chr::floor<chr::days>(t);
  const chr::year_month_day ymd{days};
  const chr::hh_mm_ss<Millis> hms{t - days};
  return CivilTime{static_cast<int>(ymd.year()),
                   static_cast<int>(static_cast<unsigned>(ymd.month())),
                   static_cast<int>(static_cast<unsigned>(ymd.day())),
                   static_cast<int>(hms.hours().count()),
                   static_cast<int>(hms.minutes().count()),
                   static_cast<int>(hms.seconds().count()),
                   static_cast<int>(hms.subseconds().count())};
}

std::string format_iso_utc(Instant t) {
  const CivilTime c = to_civil(t);
  char buf[40];
  if (c.millis == 0) {
    std::snprintf(buf, sizeof buf, "%04d-%02d-%02dT%02d:%02d:%02dZ", c.year, c.month, c.day,
                  c.hour, c.minute, c.second);
  } else {
    std::snprintf(buf, sizeof buf, "%04d-%02d-%02dT%02d:%02d:%02d.%03dZ", c.year, c.month, c.day,
                  c.hour, c.minute, c.second, c.millis);
  }
  return buf;
}

namespace {

bool fixed_digits(std::string_view s, std::size_t pos, std::size_t n, int& out) {
  if (pos + n > s.size()) return false;
  int v = 0;
  for (std::size_t i = pos; i < pos + n; ++i) {
    if (!std::isdigit(static_cast<unsigned char>(s[i]))) return false;
    v = v * 10 + (s[i] - '0');
  }
  out = v;
  return true;
}

}  // namespace

std::optional<Instant> parse_iso_utc(std::string_view s) {
  // YYYY-MM-DDTHH:MM:SS[.mmm]Z
  int y, mo, d, h, mi, se, ms = 0;
  if (s.size() < 20) return std::nullopt;
  if (!fixed_digits(s, 0, 4, y) || s[4] != '-' || !fixed_digits(s, 5, 2, mo) || s[7] != '-' ||
      !fixed_digits(s, 8, 2, d) || s[10] != 'T' || !fixed_digits(s, 11, 2, h) || s[13] != ':' ||
      !fixed_digits(s, 14, 2, mi) || s[16] != ':' || !fixed_digits(s, 17, 2, se)) {
    return std::nullopt;
  }
  std::size_t pos = 19;
  if (s[pos] == '.') {
    if (!fixed_digits(s, pos + 1, 3, ms)) return std::nullopt;
    pos += 4;
  }
  if (pos + 1 != s.size() || s[pos] != 'Z') return std::nullopt;
  return make_instant(y, mo, d, h, mi, se, ms);
}

// ---------------------------------------------------------------------------
// Records

const std::string* LogRecord::extra(std::string_view name) const {
  for (const auto& [k, v] : extras) {
    if (k == name) return &v;
  }
  return nullptr;
}

RecordKey record_key(const LogRecord& r) { return RecordKey{r.source_file, r.line_no, r.sub_ordinal}; }

bool ByRecordKey::operator()(const LogRecord& a, const LogRecord& b) const {
  if (a.source_file != b.source_file) return a.source_file < b.source_file;
  if (a.line_no != b.line_no) return a.line_no < b.line_no;
  return a.sub_ordinal < b.sub_ordinal;
}

std::string_view to_string(FormatKind kind) {
  switch (kind) {
    case FormatKind::W3cExtended: return "w3c";
    case FormatKind::NcsaCommon: return "ncsa";
    case FormatKind::NcsaCombined: return "ncsa-combined";
    case FormatKind::Iis: return "iis";
  }
  return "unknown";
}

std::optional<FormatKind> parse_format_kind(std::string_view text) {
  if (text == "w3c") return FormatKind::W3cExtended;
  if (text == "ncsa") return FormatKind::NcsaCommon;
  if (text == "ncsa-combined") return FormatKind::NcsaCombined;
  if (text == "iis") return FormatKind::Iis;
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Cleaning policy

CleaningPolicy CleaningPolicy::web_assets_preset() {
  CleaningPolicy p;
  p.set_suffixes({".jpg", ".jpeg", ".gif", ".css", ".js", ".png", ".ico", ".bmp", ".swf"});
  return p;
}

void CleaningPolicy::set_suffixes(const std::vector<std::string>& suffixes) {
  std::vector<std::string> out;
  for (std::string s : suffixes) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (s.size() < 2 || s.front() != '.') {
      throw Error(ErrorCode::Config, "cleaning suffix must start with '.': \"" + s + "\"");
    }
    if (std::find(out.begin(), out.end(), s) == out.end()) out.push_back(std::move(s));
  }
  irrelevant_suffixes = std::move(out);
}

void CleaningPolicy::validate() const {
  for (const auto& s : irrelevant_suffixes) {
    if (s.size() < 2 || s.front() != '.') {
      throw Error(ErrorCode::Config, "cleaning suffix must start with '.': \"" + s + "\"");
    }
    for (char c : s) {
      if (std::isupper(static_cast<unsigned char>(c))) {
        throw Error(ErrorCode::Config, "cleaning suffix must be lowercase: \"" + s + "\"");
      }
    }
  }
  for (const auto& r : failed_status) {
    if (r.lo > r.hi) throw Error(ErrorCode::Config, "empty failed-status range");
  }
}

// ---------------------------------------------------------------------------
// Stats

std::vector<std::string> PipelineStats::line_accounting_violations() const {
  std::vector<std::string> out;
  const std::uint64_t accounted = records_parsed + lines_skipped_malformed + lines_directive + lines_blank;
  if (lines_read != accounted) {
    out.push_back("lines_read (" + std::to_string(lines_read) +
                  ") != parsed + malformed + directive + blank (" + std::to_string(accounted) + ")");
  }
  std::uint64_t malformed = 0;
  for (const auto& [_, n] : skipped_by_reason) malformed += n;
  if (malformed != lines_skipped_malformed) {
    out.push_back("skipped_by_reason sums to " + std::to_string(malformed) +
                  ", lines_skipped_malformed is " + std::to_string(lines_skipped_malformed));
  }
  return out;
}

std::vector<std::string> PipelineStats::identity_violations() const {
  std::vector<std::string> out = line_accounting_violations();
  std::uint64_t removed = 0;
  for (const auto& [_, n] : records_removed_by_reason) removed += n;
  if (records_parsed != records_after_cleaning + removed) {
    out.push_back("records_parsed (" + std::to_string(records_parsed) +
                  ") != records_after_cleaning + removed (" +
                  std::to_string(records_after_cleaning) + " + " + std::to_string(removed) + ")");
  }
  if (users_identified > records_after_cleaning) {
    out.push_back("more users than cleaned records");
  }
  if (sessions_identified < users_identified) {
    out.push_back("fewer sessions than users");
  }
  return out;
}

void PipelineStats::merge_parse_counts(const PipelineStats& o) {
  lines_read += o.lines_read;
  lines_directive += o.lines_directive;
  lines_blank += o.lines_blank;
  lines_skipped_malformed += o.lines_skipped_malformed;
  for (const auto& [k, n] : o.skipped_by_reason) skipped_by_reason[k] += n;
  records_parsed += o.records_parsed;
}

nlohmann::ordered_json PipelineStats::to_json() const {
  nlohmann::ordered_json j;
  j["lines_read"] = lines_read;
  j["lines_directive"] = lines_directive;
  j["lines_blank"] = lines_blank;
  j["lines_skipped_malformed"] = lines_skipped_malformed;
  j["skipped_by_reason"] = nlohmann::ordered_json::object();
  for (const auto& [k, n] : skipped_by_reason) j["skipped_by_reason"][k] = n;
  j["records_parsed"] = records_parsed;
  j["records_removed_by_reason"] = nlohmann::ordered_json::object();
  for (const auto& [k, n] : records_removed_by_reason) j["records_removed_by_reason"][k] = n;
  j["records_after_cleaning"] = records_after_cleaning;
  j["users_identified"] = users_identified;
  j["sessions_identified"] = sessions_identified;
  j["records_inferred"] = records_inferred;
  return j;
}

// ---------------------------------------------------------------------------
// Tabular form

namespace {

using Cell = std::optional<std::string>;

Cell opt_int(const std::optional<std::int64_t>& v) {
  return v ? Cell{std::to_string(*v)} : std::nullopt;
}

template <typename Int>
Int to_int(const std::string& text, const char* column) {
  Int v{};
  const auto* end = text.data() + text.size();
  auto [p, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc{} || p != end) {
    throw Error(ErrorCode::MalformedTable,
                std::string("column ") + column + ": not an integer: \"" + text + "\"");
  }
  return v;
}

std::string required(const Cell& c, const char* column) {
  if (!c) throw Error(ErrorCode::MalformedTable, std::string("column ") + column + " is empty");
  return *c;
}

std::string extras_to_text(const LogRecord& r) {
  nlohmann::json a = nlohmann::json::array();
  for (const auto& [k, v] : r.extras) a.push_back({k, v});
  return a.dump();
}

std::vector<std::pair<std::string, std::string>> extras_from_json(const nlohmann::json& a) {
  std::vector<std::pair<std::string, std::string>> out;
  if (!a.is_array()) throw Error(ErrorCode::MalformedTable, "extras must be an array");
  for (const auto& kv : a) {
    if (!kv.is_array() || kv.size() != 2) {
      throw Error(ErrorCode::MalformedTable, "extras entries must be [name, value] pairs");
    }
    out.emplace_back(kv[0].get<std::string>(), kv[1].get<std::string>());
  }
  return out;
}

Timestamp timestamp_from(const std::string& iso, std::int64_t offset) {
  auto t = parse_iso_utc(iso);
  if (!t) throw Error(ErrorCode::MalformedTable, "bad timestamp_utc \"" + iso + "\"");
  return Timestamp{*t, static_cast<int>(offset)};
}

}  // namespace

const std::vector<std::string>& record_columns() {
  static const std::vector<std::string> cols{
      "line_no",        "source_file", "ip",          "timestamp_utc", "offset_minutes",
      "method",         "uri",         "protocol",    "status",        "bytes_sent",
      "username",       "user_agent",  "referrer",    "inferred",      "sub_ordinal",
      "bytes_received", "service_name", "server_name", "server_ip",    "time_taken_ms",
      "windows_status", "extras"};
  return cols;
}

std::vector<Cell> record_to_row(const LogRecord& r) {
  return {std::to_string(r.line_no),
          r.source_file,
          r.ip,
          format_iso_utc(r.timestamp.utc),
          std::to_string(r.timestamp.offset_minutes),
          r.method,
          r.uri,
          r.protocol,
          r.status ? Cell{std::to_string(*r.status)} : std::nullopt,
          opt_int(r.bytes_sent),
          r.username,
          r.user_agent,
          r.referrer,
          r.inferred ? "true" : "false",
          std::to_string(r.sub_ordinal),
          opt_int(r.bytes_received),
          r.service_name,
          r.server_name,
          r.server_ip,
          opt_int(r.time_taken_ms),
          opt_int(r.windows_status),
          r.extras.empty() ? std::nullopt : Cell{extras_to_text(r)}};
}

LogRecord record_from_row(const std::vector<Cell>& row) {
  if (row.size() < record_columns().size()) {
    throw Error(ErrorCode::MalformedTable, "record row has " + std::to_string(row.size()) +
                                                " columns, expected " +
                                                std::to_string(record_columns().size()));
  }
  auto opt_i64 = [&](std::size_t i) -> std::optional<std::int64_t> {
    if (!row[i]) return std::nullopt;
    return to_int<std::int64_t>(*row[i], record_columns()[i].c_str());
  };
  LogRecord r;
  r.line_no = to_int<std::uint64_t>(required(row[0], "line_no"), "line_no");
  r.source_file = row[1].value_or("");
  r.ip = required(row[2], "ip");
  r.timestamp = timestamp_from(required(row[3], "timestamp_utc"),
                               to_int<std::int64_t>(required(row[4], "offset_minutes"), "offset_minutes"));
  r.method = row[5].value_or("");
  r.uri = row[6].value_or("");
  r.protocol = row[7];
  if (row[8]) r.status = to_int<int>(*row[8], "status");
  r.bytes_sent = opt_i64(9);
  r.username = row[10];
  r.user_agent = row[11];
  r.referrer = row[12];
  const std::string inferred = required(row[13], "inferred");
  if (inferred != "true" && inferred != "false") {
    throw Error(ErrorCode::MalformedTable, "inferred must be true/false");
  }
  r.inferred = inferred == "true";
  r.sub_ordinal = to_int<int>(required(row[14], "sub_ordinal"), "sub_ordinal");
  r.bytes_received = opt_i64(15);
  r.service_name = row[16];
  r.server_name = row[17];
  r.server_ip = row[18];
  r.time_taken_ms = opt_i64(19);
  r.windows_status = opt_i64(20);
  if (row[21]) {
    try {
      r.extras = extras_from_json(nlohmann::json::parse(*row[21]));
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::MalformedTable, std::string("extras: ") + e.what());
    }
  }
  return r;
}

nlohmann::ordered_json record_to_json(const LogRecord& r) {
  nlohmann::ordered_json j;
  const auto row = record_to_row(r);
  const auto& cols = record_columns();
  for (std::size_t i = 0; i < cols.size(); ++i) {
    const auto& name = cols[i];
    const auto& cell = row[i];
    if (name == "extras") {
      j[name] = nlohmann::ordered_json::array();
      for (const auto& [k, v] : r.extras) j[name].push_back({k, v});
    } else if (name == "inferred") {
      j[name] = r.inferred;
    } else if (!cell) {
      j[name] = nullptr;
    } else if (name == "line_no") {
      j[name] = r.line_no;
    } else if (name == "offset_minutes") {
      j[name] = r.timestamp.offset_minutes;
    } else if (name == "status") {
      j[name] = *r.status;
    } else if (name == "sub_ordinal") {
      j[name] = r.sub_ordinal;
    } else if (name == "bytes_sent" || name == "bytes_received" || name == "time_taken_ms" ||
               name == "windows_status") {
      j[name] = to_int<std::int64_t>(*cell, name.c_str());
    } else {
      j[name] = *cell;
    }
  }
  return j;
}

LogRecord record_from_json(const nlohmann::json& j) {
  try {
    auto str = [&](const char* k) -> Cell {
      if (!j.contains(k) || j.at(k).is_null()) return std::nullopt;
      return j.at(k).get<std::string>();
    };
    auto i64 = [&](const char* k) -> std::optional<std::int64_t> {
      if (!j.contains(k) || j.at(k).is_null()) return std::nullopt;
      return j.at(k).get<std::int64_t>();
    };
    LogRecord r;
    r.line_no = j.at("line_no").get<std::uint64_t>();
    r.source_file = str("source_file").value_or("");
    r.ip = j.at("ip").get<std::string>();
    r.timestamp = timestamp_from(j.at("timestamp_utc").get<std::string>(),
                                 j.at("offset_minutes").get<std::int64_t>());
    r.method = str("method").value_or("");
    r.uri = str("uri").value_or("");
    r.protocol = str("protocol");
    if (auto s = i64("status")) r.status = static_cast<int>(*s);
    r.bytes_sent = i64("bytes_sent");
    r.username = str("username");
    r.user_agent = str("user_agent");
    r.referrer = str("referrer");
    r.inferred = j.at("inferred").get<bool>();
    r.sub_ordinal = static_cast<int>(i64("sub_ordinal").value_or(0));
    r.bytes_received = i64("bytes_received");
    r.service_name = str("service_name");
    r.server_name = str("server_name");
    r.server_ip = str("server_ip");
    r.time_taken_ms = i64("time_taken_ms");
    r.windows_status = i64("windows_status");
    if (j.contains("extras") && !j.at("extras").is_null()) r.extras = extras_from_json(j.at("extras"));
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::MalformedTable, std::string("record json: ") + e.what());
  }
}

}  // namespace logprep
