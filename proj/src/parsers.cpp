#include "logprep/parsers.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <optional>

#include "logprep/error.hpp"

namespace logprep {

std::string_view to_string(SkipReason reason) {
  switch (reason) {
    case SkipReason::Directive: return "DIRECTIVE";
    case SkipReason::Blank: return "BLANK";
    case SkipReason::MalformedFieldCount: return "MALFORMED_FIELD_COUNT";
    case SkipReason::MalformedTimestamp: return "MALFORMED_TIMESTAMP";
    case SkipReason::MalformedStatus: return "MALFORMED_STATUS";
  }
  return "UNKNOWN";
}

const std::vector<IisField>& default_iis_field_order() {
  static const std::vector<IisField> order{
      IisField::ClientIp,    IisField::Username,      IisField::Date,      IisField::Time,
      IisField::ServiceName, IisField::ServerName,    IisField::ServerIp,  IisField::TimeTaken,
      IisField::BytesReceived, IisField::BytesSent,   IisField::Status,    IisField::WindowsStatus,
      IisField::Method,      IisField::Uri,           IisField::Parameters};
  return order;
}

namespace {

constexpr std::array<std::pair<IisField, std::string_view>, 15> kIisNames{{
    {IisField::ClientIp, "client-ip"},
    {IisField::Username, "username"},
    {IisField::Date, "date"},
    {IisField::Time, "time"},
    {IisField::ServiceName, "service-name"},
    {IisField::ServerName, "server-name"},
    {IisField::ServerIp, "server-ip"},
    {IisField::TimeTaken, "time-taken-ms"},
    {IisField::BytesReceived, "bytes-received"},
    {IisField::BytesSent, "bytes-sent"},
    {IisField::Status, "status"},
    {IisField::WindowsStatus, "windows-status"},
    {IisField::Method, "method"},
    {IisField::Uri, "uri"},
    {IisField::Parameters, "parameters"},
}};

}  // namespace

std::string_view to_string(IisField f) {
  for (const auto& [field, name] : kIisNames) {
    if (field == f) return name;
  }
  return "unknown";
}

std::optional<IisField> parse_iis_field(std::string_view name) {
  for (const auto& [field, n] : kIisNames) {
    if (n == name) return field;
  }
  return std::nullopt;
}

namespace {

constexpr std::array<std::string_view, 12> kMonths{"Jan", "Feb", "Mar", "Apr", "May", "Jun",
                                                   "Jul", "Aug", "Sep", "Oct", "Nov", "Dec"};

bool is_space(char c) { return c == ' ' || c == '\t'; }

std::string_view trim(std::string_view s) {
  while (!s.empty() && (is_space(s.front()) || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (is_space(s.back()) || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

bool is_blank(std::string_view s) { return trim(s).empty(); }

std::vector<std::string_view> split_spaces(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && is_space(s[i])) ++i;
    const std::size_t start = i;
    while (i < s.size() && !is_space(s[i])) ++i;
    if (i > start) out.push_back(s.substr(start, i - start));
  }
  return out;
}

template <typename Int>
std::optional<Int> to_number(std::string_view s) {
  if (s.empty()) return std::nullopt;
  Int v{};
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || p != s.data() + s.size()) return std::nullopt;
  return v;
}

std::optional<int> digits(std::string_view s, std::size_t min_len, std::size_t max_len) {
  if (s.size() < min_len || s.size() > max_len) return std::nullopt;
  for (char c : s) {
    if (!std::isdigit(static_cast<unsigned char>(c))) return std::nullopt;
  }
  return to_number<int>(s);
}

std::optional<std::string> absent_if_dash(std::string_view s) {
  if (s == "-" || s.empty()) return std::nullopt;
  return std::string(s);
}

// Numeric field: "-" is absent, anything else must be a non-negative integer.
struct NumberField {
  bool ok = true;
  std::optional<std::int64_t> value;
};

NumberField number_field(std::string_view s) {
  if (s == "-") return {};
  auto v = to_number<std::int64_t>(s);
  if (!v || *v < 0) return {false, std::nullopt};
  return {true, v};
}

NumberField status_field(std::string_view s) {
  if (s == "-") return {};
  auto v = digits(s, 3, 3);
  if (!v || *v < 100 || *v > 599) return {false, std::nullopt};
  return {true, *v};
}

bool valid_method(std::string_view m) {
  if (m.empty() || m.size() > 32) return false;
  return std::all_of(m.begin(), m.end(), [](unsigned char c) { return std::isalpha(c) || c == '-' || c == '_'; });
}

std::string upper(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
  return out;
}

// H:MM:SS or HH:MM:SS, optional .f to .fff fraction.
struct ClockTime {
  int hour, minute, second, millis;
};

std::optional<ClockTime> parse_clock(std::string_view s) {
  const auto c1 = s.find(':');
  if (c1 == std::string_view::npos) return std::nullopt;
  const auto c2 = s.find(':', c1 + 1);
  if (c2 == std::string_view::npos) return std::nullopt;
  auto h = digits(s.substr(0, c1), 1, 2);
  auto m = digits(s.substr(c1 + 1, c2 - c1 - 1), 2, 2);
  std::string_view rest = s.substr(c2 + 1);
  int millis = 0;
  if (const auto dot = rest.find('.'); dot != std::string_view::npos) {
    std::string_view frac = rest.substr(dot + 1);
    auto f = digits(frac, 1, 3);
    if (!f) return std::nullopt;
    millis = *f;
    for (std::size_t i = frac.size(); i < 3; ++i) millis *= 10;
    rest = rest.substr(0, dot);
  }
  auto sec = digits(rest, 2, 2);
  if (!h || !m || !sec) return std::nullopt;
  return ClockTime{*h, *m, *sec, millis};
}

ParseOutcome skip(std::uint64_t line_no, SkipReason reason, std::string_view raw) {
  return Skip{line_no, reason, std::string(raw)};
}

LogRecord base_record(std::uint64_t line_no, const std::string& source_file) {
  LogRecord r;
  r.line_no = line_no;
  r.source_file = source_file;
  return r;
}

// ---------------------------------------------------------------------------
// W3C Extended

struct W3cDate {
  int year, month, day;
};

std::optional<W3cDate> parse_w3c_date(std::string_view s) {
  if (s.size() != 10 || s[4] != '-' || s[7] != '-') return std::nullopt;
  auto y = digits(s.substr(0, 4), 4, 4);
  auto m = digits(s.substr(5, 2), 2, 2);
  auto d = digits(s.substr(8, 2), 2, 2);
  if (!y || !m || !d) return std::nullopt;
  return W3cDate{*y, *m, *d};
}

ParseOutcome parse_w3c(std::string_view line, const LogFormat& format, std::uint64_t line_no,
                       const std::string& source_file, std::string_view default_date) {
  if (format.field_map.empty()) {
    throw Error(ErrorCode::MissingFieldsDirective,
                source_file + ":" + std::to_string(line_no) + ": data line before any #Fields: directive");
  }
  const auto values = split_spaces(line);
  if (values.size() != format.field_map.size()) {
    return skip(line_no, SkipReason::MalformedFieldCount, line);
  }

  LogRecord r = base_record(line_no, source_file);
  std::optional<std::string_view> date_text, time_text, stem, query;
  bool have_ip = false, have_method = false;

  for (std::size_t i = 0; i < values.size(); ++i) {
    const std::string& name = format.field_map[i];
    const std::string_view v = values[i];
    if (name == "date") {
      date_text = v;
    } else if (name == "time") {
      time_text = v;
    } else if (name == "c-ip") {
      if (v == "-") return skip(line_no, SkipReason::MalformedFieldCount, line);
      r.ip = std::string(v);
      have_ip = true;
    } else if (name == "cs-username") {
      r.username = absent_if_dash(v);
    } else if (name == "s-sitename") {
      r.service_name = absent_if_dash(v);
    } else if (name == "s-computername") {
      r.server_name = absent_if_dash(v);
    } else if (name == "s-ip") {
      r.server_ip = absent_if_dash(v);
    } else if (name == "cs-method") {
      if (!valid_method(v)) return skip(line_no, SkipReason::MalformedFieldCount, line);
      r.method = upper(v);
      have_method = true;
    } else if (name == "cs-uri-stem") {
      if (v == "-") return skip(line_no, SkipReason::MalformedFieldCount, line);
      stem = v;
    } else if (name == "cs-uri-query") {
      if (v != "-") query = v;
    } else if (name == "sc-status") {
      auto s = status_field(v);
      if (!s.ok) return skip(line_no, SkipReason::MalformedStatus, line);
      if (s.value) r.status = static_cast<int>(*s.value);
    } else if (name == "sc-bytes" || name == "cs-bytes" || name == "time-taken") {
      auto n = number_field(v);
      if (!n.ok) return skip(line_no, SkipReason::MalformedFieldCount, line);
      (name == "sc-bytes" ? r.bytes_sent : name == "cs-bytes" ? r.bytes_received : r.time_taken_ms) = n.value;
    } else if (name == "cs-version") {
      r.protocol = absent_if_dash(v);
    } else if (name == "cs(User-Agent)") {
      r.user_agent = absent_if_dash(v);
    } else if (name == "cs(Referer)") {
      r.referrer = absent_if_dash(v);
    } else {
      // s-port and unrecognized tokens
      r.extras.emplace_back(name, std::string(v));
    }
  }

  if (!have_ip || !have_method || !stem) return skip(line_no, SkipReason::MalformedFieldCount, line);
  if (!time_text) return skip(line_no, SkipReason::MalformedTimestamp, line);
  if (!date_text) {
    if (default_date.empty()) return skip(line_no, SkipReason::MalformedTimestamp, line);
    date_text = default_date;
  }
  auto date = parse_w3c_date(*date_text);
  auto clock = parse_clock(*time_text);
  if (!date || !clock) return skip(line_no, SkipReason::MalformedTimestamp, line);
  auto utc = make_instant(date->year, date->month, date->day, clock->hour, clock->minute,
                          clock->second, clock->millis);
  if (!utc) return skip(line_no, SkipReason::MalformedTimestamp, line);
  r.timestamp = Timestamp{*utc, 0};

  r.uri = std::string(*stem);
  if (query) {
    r.uri += '?';
    r.uri += *query;
  }
  return r;
}

// ---------------------------------------------------------------------------
// NCSA Common / Combined

class Cursor {
 public:
  explicit Cursor(std::string_view s) : s_(s) {}

  void skip_spaces() {
    while (pos_ < s_.size() && is_space(s_[pos_])) ++pos_;
  }
  bool at_end() {
    skip_spaces();
    return pos_ >= s_.size();
  }
  char peek() const { return pos_ < s_.size() ? s_[pos_] : '\0'; }

  std::string_view token() {
    skip_spaces();
    const std::size_t start = pos_;
    while (pos_ < s_.size() && !is_space(s_[pos_])) ++pos_;
    return s_.substr(start, pos_ - start);
  }

  // [ ... ]
  std::optional<std::string_view> bracketed() {
    skip_spaces();
    if (peek() != '[') return std::nullopt;
    const auto close = s_.find(']', pos_);
    if (close == std::string_view::npos) return std::nullopt;
    auto out = s_.substr(pos_ + 1, close - pos_ - 1);
    pos_ = close + 1;
    return out;
  }

  // "..." with \" and \\ escapes
  std::optional<std::string> quoted() {
    skip_spaces();
    if (peek() != '"') return std::nullopt;
    std::string out;
    for (std::size_t i = pos_ + 1; i < s_.size(); ++i) {
      const char c = s_[i];
      if (c == '\\' && i + 1 < s_.size() && (s_[i + 1] == '"' || s_[i + 1] == '\\')) {
        out.push_back(s_[++i]);
      } else if (c == '"') {
        pos_ = i + 1;
        return out;
      } else {
        out.push_back(c);
      }
    }
    return std::nullopt;
  }

 private:
  std::string_view s_;
  std::size_t pos_ = 0;
};

// DD/MMM/YYYY:HH:MM:SS +ZZZZ
std::optional<Timestamp> parse_ncsa_time(std::string_view s) {
  const auto parts = split_spaces(s);
  if (parts.size() != 2) return std::nullopt;
  const std::string_view dt = parts[0];
  const std::string_view zone = parts[1];
  if (dt.size() != 20 || dt[2] != '/' || dt[6] != '/' || dt[11] != ':') return std::nullopt;
  auto day = digits(dt.substr(0, 2), 2, 2);
  const auto mon_it = std::find(kMonths.begin(), kMonths.end(), dt.substr(3, 3));
  auto year = digits(dt.substr(7, 4), 4, 4);
  auto clock = parse_clock(dt.substr(12));
  if (!day || mon_it == kMonths.end() || !year || !clock || clock->millis != 0) return std::nullopt;
  if (dt.substr(12, 2).find(':') != std::string_view::npos) return std::nullopt;  // HH is 2 digits

  if (zone.size() != 5 || (zone[0] != '+' && zone[0] != '-')) return std::nullopt;
  auto zh = digits(zone.substr(1, 2), 2, 2);
  auto zm = digits(zone.substr(3, 2), 2, 2);
  if (!zh || !zm || *zh > 23 || *zm > 59) return std::nullopt;
  const int offset = (zone[0] == '-' ? -1 : 1) * (*zh * 60 + *zm);

  const int month = static_cast<int>(mon_it - kMonths.begin()) + 1;
  auto local = make_instant(*year, month, *day, clock->hour, clock->minute, clock->second);
  if (!local) return std::nullopt;
  return Timestamp{*local - std::chrono::minutes(offset), offset};
}

struct NcsaParse {
  ParseOutcome outcome;
  bool combined_tail = false;
};

NcsaParse parse_ncsa(std::string_view line, std::uint64_t line_no, const std::string& source_file) {
  auto fail = [&](SkipReason reason) { return NcsaParse{skip(line_no, reason, line), false}; };
  Cursor cur(line);
  LogRecord r = base_record(line_no, source_file);

  r.ip = std::string(cur.token());
  if (r.ip.empty() || r.ip.front() == '[' || r.ip.front() == '"') return fail(SkipReason::MalformedFieldCount);

  std::vector<std::string_view> idents;
  while (!cur.at_end() && cur.peek() != '[') idents.push_back(cur.token());
  if (idents.size() == 2) {
    if (idents[0] != "-") r.extras.emplace_back("ident", std::string(idents[0]));
    r.username = absent_if_dash(idents[1]);
  } else if (!(idents.size() == 1 && idents[0] == "--")) {
    return fail(SkipReason::MalformedFieldCount);
  }

  auto when = cur.bracketed();
  if (!when) return fail(SkipReason::MalformedFieldCount);
  auto ts = parse_ncsa_time(*when);
  if (!ts) return fail(SkipReason::MalformedTimestamp);
  r.timestamp = *ts;

  auto request = cur.quoted();
  if (!request) return fail(SkipReason::MalformedFieldCount);
  const auto parts = split_spaces(*request);
  if (parts.size() < 2 || !valid_method(parts[0])) return fail(SkipReason::MalformedFieldCount);
  r.method = upper(parts[0]);
  if (parts.size() == 2) {
    r.uri = std::string(parts[1]);
  } else if (parts.back().starts_with("HTTP/")) {
    r.protocol = std::string(parts.back());
    r.uri = std::string(parts[1]);
    for (std::size_t i = 2; i + 1 < parts.size(); ++i) {
      r.uri += ' ';
      r.uri += parts[i];
    }
  } else {
    return fail(SkipReason::MalformedFieldCount);
  }

  const auto status_text = cur.token();
  if (status_text.empty()) return fail(SkipReason::MalformedFieldCount);
  auto status = status_field(status_text);
  if (!status.ok) return fail(SkipReason::MalformedStatus);
  if (status.value) r.status = static_cast<int>(*status.value);

  const auto bytes_text = cur.token();
  if (bytes_text.empty()) return fail(SkipReason::MalformedFieldCount);
  auto bytes = number_field(bytes_text);
  if (!bytes.ok) return fail(SkipReason::MalformedFieldCount);
  r.bytes_sent = bytes.value;

  bool tail = false;
  if (!cur.at_end()) {
    auto referrer = cur.quoted();
    auto agent = referrer ? cur.quoted() : std::nullopt;
    if (!referrer || !agent || !cur.at_end()) return fail(SkipReason::MalformedFieldCount);
    r.referrer = absent_if_dash(*referrer);
    r.user_agent = absent_if_dash(*agent);
    tail = true;
  }
  return NcsaParse{std::move(r), tail};
}

// ---------------------------------------------------------------------------
// IIS

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const auto comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      out.push_back(trim(line.substr(start)));
      break;
    }
    out.push_back(trim(line.substr(start, comma - start)));
    start = comma + 1;
  }
  return out;
}

ParseOutcome parse_iis(std::string_view line, std::uint64_t line_no, const std::string& source_file,
                       const ParserOptions& options) {
  auto fields = split_commas(line);
  if (fields.size() == options.iis_field_order.size() + 1 && fields.back().empty()) fields.pop_back();
  if (fields.size() != options.iis_field_order.size()) {
    return skip(line_no, SkipReason::MalformedFieldCount, line);
  }

  LogRecord r = base_record(line_no, source_file);
  std::optional<std::string_view> date_text, time_text, target, params;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    const std::string_view v = fields[i];
    NumberField n;
    switch (options.iis_field_order[i]) {
      case IisField::ClientIp:
        if (v.empty() || v == "-") return skip(line_no, SkipReason::MalformedFieldCount, line);
        r.ip = std::string(v);
        break;
      case IisField::Username: r.username = absent_if_dash(v); break;
      case IisField::Date: date_text = v; break;
      case IisField::Time: time_text = v; break;
      case IisField::ServiceName: r.service_name = absent_if_dash(v); break;
      case IisField::ServerName: r.server_name = absent_if_dash(v); break;
      case IisField::ServerIp: r.server_ip = absent_if_dash(v); break;
      case IisField::TimeTaken:
      case IisField::BytesReceived:
      case IisField::BytesSent:
      case IisField::WindowsStatus:
        n = number_field(v);
        if (!n.ok) return skip(line_no, SkipReason::MalformedFieldCount, line);
        if (options.iis_field_order[i] == IisField::TimeTaken) r.time_taken_ms = n.value;
        if (options.iis_field_order[i] == IisField::BytesReceived) r.bytes_received = n.value;
        if (options.iis_field_order[i] == IisField::BytesSent) r.bytes_sent = n.value;
        if (options.iis_field_order[i] == IisField::WindowsStatus) r.windows_status = n.value;
        break;
      case IisField::Status:
        n = status_field(v);
        if (!n.ok) return skip(line_no, SkipReason::MalformedStatus, line);
        if (n.value) r.status = static_cast<int>(*n.value);
        break;
      case IisField::Method:
        if (!valid_method(v)) return skip(line_no, SkipReason::MalformedFieldCount, line);
        r.method = upper(v);
        break;
      case IisField::Uri:
        if (v.empty() || v == "-") return skip(line_no, SkipReason::MalformedFieldCount, line);
        target = v;
        break;
      case IisField::Parameters:
        if (!v.empty() && v != "-") params = v;
        break;
    }
  }
  if (r.method.empty() || !target) return skip(line_no, SkipReason::MalformedFieldCount, line);
  if (!date_text || !time_text) return skip(line_no, SkipReason::MalformedTimestamp, line);

  // M/D/YYYY
  const auto s1 = date_text->find('/');
  const auto s2 = s1 == std::string_view::npos ? s1 : date_text->find('/', s1 + 1);
  if (s2 == std::string_view::npos) return skip(line_no, SkipReason::MalformedTimestamp, line);
  auto month = digits(date_text->substr(0, s1), 1, 2);
  auto day = digits(date_text->substr(s1 + 1, s2 - s1 - 1), 1, 2);
  auto year = digits(date_text->substr(s2 + 1), 4, 4);
  auto clock = parse_clock(*time_text);
  if (!month || !day || !year || !clock) return skip(line_no, SkipReason::MalformedTimestamp, line);
  auto local = make_instant(*year, *month, *day, clock->hour, clock->minute, clock->second, clock->millis);
  if (!local) return skip(line_no, SkipReason::MalformedTimestamp, line);
  r.timestamp = Timestamp{*local - std::chrono::minutes(options.iis_offset_minutes), options.iis_offset_minutes};

  r.uri = std::string(*target);
  if (params) {
    r.uri += '?';
    r.uri += *params;
  }
  return r;
}

ParseOutcome parse_data_line(std::string_view line, const LogFormat& format, std::uint64_t line_no,
                             const std::string& source_file, const ParserOptions& options,
                             std::string_view default_date) {
  switch (format.kind) {
    case FormatKind::W3cExtended: return parse_w3c(line, format, line_no, source_file, default_date);
    case FormatKind::NcsaCommon:
    case FormatKind::NcsaCombined: return parse_ncsa(line, line_no, source_file).outcome;
    case FormatKind::Iis: return parse_iis(line, line_no, source_file, options);
  }
  return skip(line_no, SkipReason::MalformedFieldCount, line);
}

std::optional<std::vector<std::string>> fields_directive(std::string_view line) {
  constexpr std::string_view kPrefix = "#Fields:";
  if (!line.starts_with(kPrefix)) return std::nullopt;
  std::vector<std::string> out;
  for (auto tok : split_spaces(line.substr(kPrefix.size()))) out.emplace_back(tok);
  return out;
}

}  // namespace

std::vector<std::string> parse_w3c_directives(std::span<const std::string> header_lines) {
  std::vector<std::string> map;
  for (const auto& line : header_lines) {
    if (auto fields = fields_directive(trim(line))) map = std::move(*fields);
  }
  return map;
}

LogFormat detect_format(std::span<const std::string> sample) {
  std::vector<std::string_view> lines;
  for (const auto& l : sample) {
    if (!is_blank(l)) lines.push_back(trim(l));
  }
  if (lines.empty()) throw Error(ErrorCode::EmptyInput, "no non-blank line to detect a format from");

  if (std::any_of(lines.begin(), lines.end(), [](std::string_view l) { return l.starts_with('#'); })) {
    LogFormat f{FormatKind::W3cExtended, {}};
    for (auto l : lines) {
      if (!l.starts_with('#')) break;
      if (auto fields = fields_directive(l)) f.field_map = std::move(*fields);
    }
    return f;
  }
  if (split_commas(lines.front()).size() >= 10) return LogFormat{FormatKind::Iis, {}};
  const std::string no_file;
  for (auto l : lines) {
    if (parse_ncsa(l, 1, no_file).combined_tail) return LogFormat{FormatKind::NcsaCombined, {}};
  }
  return LogFormat{FormatKind::NcsaCommon, {}};
}

LogFormat detect_format(std::istream& in) {
  std::vector<std::string> sample;
  std::string line;
  while (sample.size() < kDetectSampleLines && std::getline(in, line)) {
    if (!is_blank(line)) sample.push_back(line);
  }
  if (in.bad()) throw Error(ErrorCode::Io, "read failure during format detection");
  return detect_format(sample);
}

ParseOutcome parse_line(std::string_view line, const LogFormat& format, std::uint64_t line_no,
                        const std::string& source_file, const ParserOptions& options) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  if (is_blank(line)) return skip(line_no, SkipReason::Blank, line);
  if (trim(line).starts_with('#')) return skip(line_no, SkipReason::Directive, line);
  return parse_data_line(line, format, line_no, source_file, options, {});
}

LineParser::LineParser(LogFormat format, std::string source_file, ParserOptions options)
    : format_(std::move(format)), source_file_(std::move(source_file)), options_(std::move(options)) {}

ParseOutcome LineParser::feed(std::string_view line) {
  ++line_no_;
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  if (is_blank(line)) return skip(line_no_, SkipReason::Blank, line);
  const std::string_view t = trim(line);
  if (t.starts_with('#')) {
    if (format_.kind == FormatKind::W3cExtended) {
      if (auto fields = fields_directive(t)) {
        format_.field_map = std::move(*fields);
      } else if (t.starts_with("#Date:")) {
        const auto parts = split_spaces(t.substr(6));
        if (!parts.empty()) default_date_ = std::string(parts.front());
      }
    }
    return skip(line_no_, SkipReason::Directive, line);
  }
  return parse_data_line(line, format_, line_no_, source_file_, options_, default_date_);
}

PipelineStats extract_fields(std::istream& in, const LogFormat& format, const std::string& source_file,
                             const RecordSink& sink, const ParserOptions& options) {
  PipelineStats stats;
  LineParser parser(format, source_file, options);
  std::string line;
  std::uint64_t offset = 0;
  while (std::getline(in, line)) {
    offset += line.size() + (in.eof() ? 0 : 1);
    ++stats.lines_read;
    ParseOutcome outcome = parser.feed(line);
    if (auto* rec = std::get_if<LogRecord>(&outcome)) {
      ++stats.records_parsed;
      sink(std::move(*rec));
      continue;
    }
    const Skip& s = std::get<Skip>(outcome);
    switch (s.reason) {
      case SkipReason::Directive: ++stats.lines_directive; break;
      case SkipReason::Blank: ++stats.lines_blank; break;
      default:
        ++stats.lines_skipped_malformed;
        ++stats.skipped_by_reason[std::string(to_string(s.reason))];
    }
  }
  if (in.bad()) {
    throw Error(ErrorCode::Io, source_file + ": read failure at byte offset " + std::to_string(offset));
  }
  return stats;
}

}  // namespace logprep
