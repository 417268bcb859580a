#include <algorithm>
#include <cstdio>

#include "logprep/parsers.hpp"

namespace logprep {

namespace {

constexpr const char* kMonths[] = {"Jan", "Feb", "Mar", "Apr", "May", "Jun",
                                   "Jul", "Aug", "Sep", "Oct", "Nov", "Dec"};

std::string or_dash(const std::optional<std::string>& v) { return v ? *v : "-"; }

template <typename Int>
std::string or_dash(const std::optional<Int>& v) {
  return v ? std::to_string(*v) : "-";
}

std::string clock_text(const CivilTime& c) {
  char buf[24];
  if (c.millis == 0) {
    std::snprintf(buf, sizeof buf, "%02d:%02d:%02d", c.hour, c.minute, c.second);
  } else {
    std::snprintf(buf, sizeof buf, "%02d:%02d:%02d.%03d", c.hour, c.minute, c.second, c.millis);
  }
  return buf;
}

std::string ncsa_quote(std::string_view s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out.push_back('\\');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

// W3C values are space-delimited; embedded spaces become '+'.
std::string w3c_value(std::string v) {
  std::replace(v.begin(), v.end(), ' ', '+');
  return v.empty() ? "-" : v;
}

std::pair<std::string, std::optional<std::string>> split_query(const std::string& uri) {
  const auto q = uri.find('?');
  if (q == std::string::npos) return {uri, std::nullopt};
  return {uri.substr(0, q), uri.substr(q + 1)};
}

std::string render_ncsa(const LogRecord& r, bool combined) {
  const CivilTime c = to_civil(r.timestamp.local());
  const int off = r.timestamp.offset_minutes;
  const int aoff = off < 0 ? -off : off;
  char when[48];
  std::snprintf(when, sizeof when, "[%02d/%s/%04d:%02d:%02d:%02d %c%02d%02d]", c.day, kMonths[c.month - 1],
                c.year, c.hour, c.minute, c.second, off < 0 ? '-' : '+', aoff / 60, aoff % 60);

  std::string request = r.method + " " + r.uri;
  if (r.protocol) request += " " + *r.protocol;

  const std::string* ident = r.extra("ident");
  std::string out = r.ip + " " + (ident ? *ident : "-") + " " + or_dash(r.username) + " " + when + " " +
                    ncsa_quote(request) + " " + or_dash(r.status) + " " + or_dash(r.bytes_sent);
  if (combined) {
    out += " " + ncsa_quote(or_dash(r.referrer)) + " " + ncsa_quote(or_dash(r.user_agent));
  }
  return out;
}

std::string render_w3c(const LogRecord& r, const std::vector<std::string>& field_map) {
  const CivilTime c = to_civil(r.timestamp.utc);
  const bool has_query_column =
      std::find(field_map.begin(), field_map.end(), "cs-uri-query") != field_map.end();
  const auto [stem, query] = split_query(r.uri);

  std::string out;
  for (const auto& name : field_map) {
    std::string v;
    if (name == "date") {
      char buf[16];
      std::snprintf(buf, sizeof buf, "%04d-%02d-%02d", c.year, c.month, c.day);
      v = buf;
    } else if (name == "time") {
      v = clock_text(c);
    } else if (name == "c-ip") {
      v = r.ip;
    } else if (name == "cs-username") {
      v = or_dash(r.username);
    } else if (name == "s-sitename") {
      v = or_dash(r.service_name);
    } else if (name == "s-computername") {
      v = or_dash(r.server_name);
    } else if (name == "s-ip") {
      v = or_dash(r.server_ip);
    } else if (name == "cs-method") {
      v = r.method;
    } else if (name == "cs-uri-stem") {
      v = has_query_column ? stem : r.uri;
    } else if (name == "cs-uri-query") {
      v = or_dash(query);
    } else if (name == "sc-status") {
      v = or_dash(r.status);
    } else if (name == "sc-bytes") {
      v = or_dash(r.bytes_sent);
    } else if (name == "cs-bytes") {
      v = or_dash(r.bytes_received);
    } else if (name == "time-taken") {
      v = or_dash(r.time_taken_ms);
    } else if (name == "cs-version") {
      v = or_dash(r.protocol);
    } else if (name == "cs(User-Agent)") {
      v = or_dash(r.user_agent);
    } else if (name == "cs(Referer)") {
      v = or_dash(r.referrer);
    } else {
      const std::string* e = r.extra(name);
      v = e ? *e : "-";
    }
    if (!out.empty()) out += ' ';
    out += w3c_value(std::move(v));
  }
  return out;
}

std::string render_iis(const LogRecord& r, const std::vector<IisField>& order) {
  const CivilTime c = to_civil(r.timestamp.local());
  const bool has_params = std::find(order.begin(), order.end(), IisField::Parameters) != order.end();
  const auto [target, params] = split_query(r.uri);

  std::string out;
  for (IisField f : order) {
    std::string v;
    char buf[24];
    switch (f) {
      case IisField::ClientIp: v = r.ip; break;
      case IisField::Username: v = or_dash(r.username); break;
      case IisField::Date:
        std::snprintf(buf, sizeof buf, "%02d/%02d/%04d", c.month, c.day, c.year);
        v = buf;
        break;
      case IisField::Time: v = clock_text(c); break;
      case IisField::ServiceName: v = or_dash(r.service_name); break;
      case IisField::ServerName: v = or_dash(r.server_name); break;
      case IisField::ServerIp: v = or_dash(r.server_ip); break;
      case IisField::TimeTaken: v = or_dash(r.time_taken_ms); break;
      case IisField::BytesReceived: v = or_dash(r.bytes_received); break;
      case IisField::BytesSent: v = or_dash(r.bytes_sent); break;
      case IisField::Status: v = or_dash(r.status); break;
      case IisField::WindowsStatus: v = or_dash(r.windows_status); break;
      case IisField::Method: v = r.method; break;
      case IisField::Uri: v = has_params ? target : r.uri; break;
      case IisField::Parameters: v = or_dash(params); break;
    }
    out += v;
    out += ", ";
  }
  if (!out.empty()) out.pop_back();  // keep the trailing comma
  return out;
}

}  // namespace

std::string render_line(const LogRecord& r, const LogFormat& format, const ParserOptions& options) {
  switch (format.kind) {
    case FormatKind::W3cExtended: return render_w3c(r, format.field_map);
    case FormatKind::NcsaCommon: return render_ncsa(r, false);
    case FormatKind::NcsaCombined: return render_ncsa(r, true);
    case FormatKind::Iis: return render_iis(r, options.iis_field_order);
  }
  return {};
}

std::vector<std::string> render_w3c_header(const std::vector<std::string>& field_map, Instant created) {
  const CivilTime c = to_civil(created);
  char date[40];
  std::snprintf(date, sizeof date, "#Date: %04d-%02d-%02d %02d:%02d:%02d", c.year, c.month, c.day, c.hour,
                c.minute, c.second);
  std::string fields = "#Fields:";
  for (const auto& f : field_map) fields += " " + f;
  return {"#Software: logprep", "#Version: 1.0", date, fields};
}

}  // namespace logprep
