#pragma once

// Random generators shared by the unit tests and the acceptance runner.
// Everything draws from one mt19937_64 so a failing case can be replayed
// from its seed.

#include <algorithm>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "logprep/parsers.hpp"
#include "logprep/record.hpp"

namespace logprep::testing {

class Gen {
 public:
  explicit Gen(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t below(std::uint64_t n) { return std::uniform_int_distribution<std::uint64_t>(0, n - 1)(engine_); }
  std::int64_t between(std::int64_t lo, std::int64_t hi) {
    return std::uniform_int_distribution<std::int64_t>(lo, hi)(engine_);
  }
  bool chance(double p) { return std::bernoulli_distribution(p)(engine_); }

  template <typename T>
  const T& pick(const std::vector<T>& v) {
    return v[below(v.size())];
  }

  std::string word(std::size_t min_len, std::size_t max_len, std::string_view alphabet) {
    std::string out(static_cast<std::size_t>(between(static_cast<std::int64_t>(min_len),
                                                     static_cast<std::int64_t>(max_len))),
                    ' ');
    for (auto& c : out) c = alphabet[below(alphabet.size())];
    return out;
  }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
};

inline constexpr std::string_view kLower = "abcdefghijklmnopqrstuvwxyz";
inline constexpr std::string_view kPathChars = "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789-_.~%";

inline std::string random_ip(Gen& g) {
  if (g.chance(0.1)) return "::1";
  if (g.chance(0.1)) return "2001:db8::" + std::to_string(g.between(1, 0xffff));
  return std::to_string(g.between(1, 254)) + "." + std::to_string(g.between(0, 255)) + "." +
         std::to_string(g.between(0, 255)) + "." + std::to_string(g.between(1, 254));
}

inline std::string random_path(Gen& g) {
  std::string path;
  const auto depth = g.between(0, 4);
  for (std::int64_t i = 0; i < depth; ++i) path += "/" + g.word(1, 10, kPathChars);
  if (path.empty() || g.chance(0.3)) path += "/";
  if (g.chance(0.4)) {
    static const std::vector<std::string> ext{".html", ".php", ".gif", ".JPG", ".css", ".js", ".aspx", ".jpeg"};
    path += g.word(1, 6, kLower) + g.pick(ext);
  }
  return path;
}

inline std::string random_uri(Gen& g) {
  std::string uri = random_path(g);
  if (g.chance(0.3)) {
    uri += "?" + g.word(1, 5, kLower) + "=" + g.word(1, 8, kPathChars);
    if (g.chance(0.3)) uri += "&" + g.word(1, 5, kLower) + "=" + g.word(0, 4, kPathChars);
  }
  return uri;
}

inline Instant random_instant(Gen& g, bool with_millis) {
  // 1990-01-01 .. 2037-12-31
  const std::int64_t lo = 631152000, hi = 2145830400;
  Instant t{std::chrono::seconds(g.between(lo, hi))};
  if (with_millis && g.chance(0.5)) t += Millis(g.between(1, 999));
  return t;
}

inline const std::vector<std::string>& sample_agents() {
  static const std::vector<std::string> agents{
      "Mozilla/5.0 (Windows NT 6.1) AppleWebKit/537.36 (KHTML, like Gecko) Chrome/47.0.2526.106 Safari/537.36",
      "Mozilla/5.0 (X11; Ubuntu; Linux x86_64; rv:38.0) Gecko/20100101 Firefox/38.0",
      "Mozilla/4.0 (compatible; MSIE 8.0; Windows NT 5.1)",
      "Mozilla/5.0 (Macintosh; Intel Mac OS X 10_9_5) AppleWebKit/600.1.17 (KHTML, like Gecko) Version/7.1 Safari/537.85",
      "Opera/9.80 (X11; Linux i686) Presto/2.12.388 Version/12.16",
      "curl/7.35.0",
      "Googlebot/2.1 (+http://www.google.com/bot.html)",
  };
  return agents;
}

/// A value drawn from a free-text alphabet that includes quotes and
/// backslashes; never "-" or empty (both read back as absent).
inline std::string random_text(Gen& g, bool allow_spaces) {
  static constexpr std::string_view kText = "abcdefghijklmnopqrstuvwxyz0123456789/:;.()\"\\=+_";
  std::string s = g.word(1, 40, kText);
  if (allow_spaces) {
    for (auto& c : s) {
      if (g.chance(0.1)) c = ' ';
    }
    s.front() = 'a';
    s.back() = 'z';
  }
  return s;
}

/// W3C field map covering every recognized token plus one unrecognized
/// column, in random order.
inline std::vector<std::string> random_w3c_field_map(Gen& g) {
  std::vector<std::string> fields{"date",           "time",        "s-sitename", "s-computername", "s-ip",
                                  "cs-method",      "cs-uri-stem", "cs-uri-query", "s-port",      "c-ip",
                                  "cs-username",    "cs-version",  "cs(User-Agent)", "cs(Referer)", "sc-status",
                                  "sc-bytes",       "cs-bytes",    "time-taken"};
  std::shuffle(fields.begin(), fields.end(), g.engine());
  return fields;
}

/// A record inside the set the writer for `format` can express; rendering and
/// parsing it back must reproduce it exactly.
inline LogRecord random_record(Gen& g, const LogFormat& format, const ParserOptions& options,
                               std::uint64_t line_no, const std::string& source_file) {
  static const std::vector<std::string> methods{"GET", "POST", "HEAD", "PUT", "DELETE", "OPTIONS", "PROPFIND"};
  const bool ncsa = format.kind == FormatKind::NcsaCommon || format.kind == FormatKind::NcsaCombined;
  const bool w3c = format.kind == FormatKind::W3cExtended;
  const bool iis = format.kind == FormatKind::Iis;
  auto maybe = [&](auto make) -> std::optional<decltype(make())> {
    if (g.chance(0.2)) return std::nullopt;
    return make();
  };
  auto token = [&] { return g.word(1, 12, "abcdefghijklmnopqrstuvwxyz0123456789._"); };
  auto count = [&] { return g.between(0, 5'000'000); };

  LogRecord r;
  r.line_no = line_no;
  r.source_file = source_file;
  r.ip = random_ip(g);
  r.method = g.pick(methods);
  r.uri = random_uri(g);
  r.status = maybe([&] { return static_cast<int>(g.between(100, 599)); });
  r.bytes_sent = maybe(count);
  r.username = maybe(token);

  const Instant utc = random_instant(g, !ncsa);
  if (ncsa) {
    r.timestamp = Timestamp{utc, static_cast<int>(g.between(-720, 840))};
    r.protocol = maybe([&] { return g.pick(std::vector<std::string>{"HTTP/1.0", "HTTP/1.1", "HTTP/2.0"}); });
    if (g.chance(0.2)) r.extras.emplace_back("ident", token());
    if (format.kind == FormatKind::NcsaCombined) {
      r.referrer = maybe([&] { return g.chance(0.5) ? "http://example.com" + random_uri(g) : random_text(g, true); });
      r.user_agent = maybe([&] { return g.chance(0.5) ? g.pick(sample_agents()) : random_text(g, true); });
    }
  } else if (w3c) {
    r.timestamp = Timestamp{utc, 0};
    r.protocol = maybe([&] { return g.pick(std::vector<std::string>{"HTTP/1.0", "HTTP/1.1"}); });
    r.bytes_received = maybe(count);
    r.time_taken_ms = maybe(count);
    r.service_name = maybe([&] { return "W3SVC" + std::to_string(g.between(1, 9)); });
    r.server_name = maybe(token);
    r.server_ip = maybe([&] { return random_ip(g); });
    r.referrer = maybe([&] { return "http://example.com" + random_uri(g); });
    r.user_agent = maybe([&] {
      std::string a = g.pick(sample_agents());
      std::replace(a.begin(), a.end(), ' ', '+');
      return a;
    });
    if (std::find(format.field_map.begin(), format.field_map.end(), "s-port") != format.field_map.end()) {
      r.extras.emplace_back("s-port", std::to_string(g.between(1, 65535)));
    }
  } else if (iis) {
    r.timestamp = Timestamp{utc, options.iis_offset_minutes};
    r.bytes_received = maybe(count);
    r.time_taken_ms = maybe(count);
    r.windows_status = maybe(count);
    r.service_name = maybe([&] { return "W3SVC" + std::to_string(g.between(1, 9)); });
    r.server_name = maybe(token);
    r.server_ip = maybe([&] { return random_ip(g); });
  }
  return r;
}

// Replaces the index-th `sep`-separated piece of `line`.
inline std::string replace_piece(const std::string& line, std::string_view sep, std::size_t index,
                                 const std::string& value) {
  std::vector<std::string> pieces;
  std::size_t start = 0;
  for (;;) {
    const auto at = line.find(sep, start);
    pieces.push_back(line.substr(start, at - start));
    if (at == std::string::npos) break;
    start = at + sep.size();
  }
  pieces.at(index) = value;
  std::string out;
  for (std::size_t i = 0; i < pieces.size(); ++i) out += (i ? std::string(sep) : "") + pieces[i];
  return out;
}

/// A line the parser for `format` must reject as malformed (never blank,
/// never a directive). Built by damaging a valid rendering.
inline std::string malformed_line(Gen& g, const LogFormat& format, const ParserOptions& options) {
  LogRecord r = random_record(g, format, options, 1, "x");
  r.status = 200;
  std::string line = render_line(r, format, options);
  switch (format.kind) {
    case FormatKind::NcsaCommon:
    case FormatKind::NcsaCombined:
      switch (g.below(5)) {
        case 0: return line.replace(line.find("\" 200 ") + 2, 3, "2x0");
        case 1: return line.replace(line.find('['), 7, "[01/Foo");
        case 2: return line.substr(0, line.find(']'));
        case 3: return "garbage line without structure";
        default: return line.substr(0, line.find('"') + 1);  // unterminated request
      }
    case FormatKind::W3cExtended:
      switch (g.below(3)) {
        case 0: return line + " extra";
        case 1: return line.substr(0, line.rfind(' '));
        default: {
          const auto pos = std::find(format.field_map.begin(), format.field_map.end(), "sc-status") -
                           format.field_map.begin();
          return replace_piece(line, " ", static_cast<std::size_t>(pos), "abc");
        }
      }
    case FormatKind::Iis:
      switch (g.below(3)) {
        case 0: return line.substr(0, line.find(','));
        case 1: return line + " more, fields,";
        default: {
          const auto pos = std::find(options.iis_field_order.begin(), options.iis_field_order.end(),
                                     IisField::Status) - options.iis_field_order.begin();
          return replace_piece(line, ", ", static_cast<std::size_t>(pos), "20");
        }
      }
  }
  return "garbage";
}

}  // namespace logprep::testing
