#include <gtest/gtest.h>

#include <sstream>

#include "logprep/error.hpp"
#include "logprep/parsers.hpp"
#include "support.hpp"

namespace logprep {
namespace {

const LogFormat kFig2Format{FormatKind::W3cExtended,
                            {"date", "time", "cs-method", "cs-uri-stem", "c-ip", "cs-version", "sc-status"}};

LogRecord expect_record(const ParseOutcome& outcome) {
  if (const auto* s = std::get_if<Skip>(&outcome)) {
    ADD_FAILURE() << "skipped as " << to_string(s->reason) << ": " << s->raw_text;
    return {};
  }
  return std::get<LogRecord>(outcome);
}

SkipReason expect_skip(const ParseOutcome& outcome) {
  if (std::holds_alternative<LogRecord>(outcome)) {
    ADD_FAILURE() << "unexpectedly parsed";
    return SkipReason::Blank;
  }
  return std::get<Skip>(outcome).reason;
}

TEST(Golden, W3cSampleLine) {
  const LogRecord r = expect_record(parse_line("2012-01-09 3:56:27 GET /Website/ ::1 HTTP/1.1 301", kFig2Format, 5, "f"));
  EXPECT_EQ(r.method, "GET");
  EXPECT_EQ(r.uri, "/Website/");
  EXPECT_EQ(r.ip, "::1");
  EXPECT_EQ(r.protocol, "HTTP/1.1");
  EXPECT_EQ(r.status, 301);
  EXPECT_EQ(format_iso_utc(r.timestamp.utc), "2012-01-09T03:56:27Z");
  EXPECT_EQ(r.timestamp.offset_minutes, 0);
  EXPECT_EQ(r.line_no, 5u);
  EXPECT_EQ(r.source_file, "f");
}

TEST(Golden, NcsaSampleLine) {
  const LogFormat ncsa{FormatKind::NcsaCommon, {}};
  const LogRecord r =
      expect_record(parse_line("::1 - - [19/Jan/2012:10:00:30 +0530] \"GET /Website/ HTTP/1.1\" 200 1107", ncsa, 1, "f"));
  EXPECT_EQ(r.ip, "::1");
  EXPECT_EQ(r.method, "GET");
  EXPECT_EQ(r.uri, "/Website/");
  EXPECT_EQ(r.protocol, "HTTP/1.1");
  EXPECT_EQ(r.status, 200);
  EXPECT_EQ(r.bytes_sent, 1107);
  EXPECT_EQ(format_iso_utc(r.timestamp.utc), "2012-01-19T04:30:30Z");
  EXPECT_EQ(r.timestamp.offset_minutes, 330);
  EXPECT_FALSE(r.username);
  EXPECT_TRUE(r.extras.empty());
}

TEST(Golden, NcsaDoubleDashIdentityField) {
  // The sample as printed joins ident and authuser into one "--".
  const LogFormat ncsa{FormatKind::NcsaCommon, {}};
  const LogRecord r =
      expect_record(parse_line("::1 -- [19/Jan/2012:10:00:30 +0530] \"GET /Website/ HTTP/1.1\" 200 1107", ncsa, 1, "f"));
  EXPECT_EQ(r.ip, "::1");
  EXPECT_EQ(r.bytes_sent, 1107);
  EXPECT_FALSE(r.username);
}

TEST(Golden, IisLine) {
  ParserOptions opts;
  opts.iis_offset_minutes = -300;
  const LogRecord r = expect_record(
      parse_line("192.168.1.5, -, 01/09/2012, 03:56:27, W3SVC1, SRV1, 10.0.0.1, 150, 210, 3401, 200, 0, GET, /home.htm, -,",
                 LogFormat{FormatKind::Iis, {}}, 1, "f", opts));
  EXPECT_EQ(r.ip, "192.168.1.5");
  EXPECT_FALSE(r.username);
  EXPECT_EQ(r.timestamp.local(), *make_instant(2012, 1, 9, 3, 56, 27));
  EXPECT_EQ(r.timestamp.offset_minutes, -300);
  EXPECT_EQ(format_iso_utc(r.timestamp.utc), "2012-01-09T08:56:27Z");
  EXPECT_EQ(r.service_name, "W3SVC1");
  EXPECT_EQ(r.server_name, "SRV1");
  EXPECT_EQ(r.server_ip, "10.0.0.1");
  EXPECT_EQ(r.time_taken_ms, 150);
  EXPECT_EQ(r.bytes_received, 210);
  EXPECT_EQ(r.bytes_sent, 3401);
  EXPECT_EQ(r.status, 200);
  EXPECT_EQ(r.windows_status, 0);
  EXPECT_EQ(r.method, "GET");
  EXPECT_EQ(r.uri, "/home.htm");
}

TEST(Golden, NcsaCombinedTail) {
  const LogFormat combined{FormatKind::NcsaCombined, {}};
  const LogRecord r = expect_record(parse_line(
      "10.0.0.9 - bob [19/Jan/2012:10:00:30 -0800] \"get /a?b=1 HTTP/1.0\" 404 - \"http://x.org/\" \"Say \\\"hi\\\"\"",
      combined, 1, "f"));
  EXPECT_EQ(r.method, "GET");
  EXPECT_EQ(r.uri, "/a?b=1");
  EXPECT_EQ(r.username, "bob");
  EXPECT_EQ(r.status, 404);
  EXPECT_FALSE(r.bytes_sent);
  EXPECT_EQ(r.referrer, "http://x.org/");
  EXPECT_EQ(r.user_agent, "Say \"hi\"");
  EXPECT_EQ(format_iso_utc(r.timestamp.utc), "2012-01-19T18:00:30Z");
}

TEST(Detect, W3cFromSoftwareDirective) {
  const std::vector<std::string> sample{"#Software: Microsoft Internet Information Services 7.5", "#Version: 1.0",
                                        "#Date: 2012-02-05 06:57:20",
                                        "#Fields: date time cs-method cs-uri-stem c-ip cs-version sc-status",
                                        "2012-01-09 3:56:27 GET /Website/ ::1 HTTP/1.1 301"};
  const LogFormat f = detect_format(sample);
  EXPECT_EQ(f.kind, FormatKind::W3cExtended);
  EXPECT_EQ(f.field_map, kFig2Format.field_map);
  EXPECT_EQ(detect_format(std::vector<std::string>{sample.front()}).kind, FormatKind::W3cExtended);
}

TEST(Detect, NcsaCommonSample) {
  const std::vector<std::string> sample{"::1 - - [19/Jan/2012:10:00:30 +0530] \"GET /Website/ HTTP/1.1\" 200 1107"};
  EXPECT_EQ(detect_format(sample).kind, FormatKind::NcsaCommon);
}

TEST(Detect, NcsaCombinedSample) {
  const std::vector<std::string> sample{
      "::1 - - [19/Jan/2012:10:00:30 +0530] \"GET /Website/ HTTP/1.1\" 200 1107 \"-\" \"Mozilla/5.0\""};
  EXPECT_EQ(detect_format(sample).kind, FormatKind::NcsaCombined);
}

TEST(Detect, FifteenCommaFieldsIsIis) {
  const std::vector<std::string> sample{
      "192.168.1.5, -, 01/09/2012, 03:56:27, W3SVC1, SRV1, 10.0.0.1, 150, 210, 3401, 200, 0, GET, /home.htm, -,"};
  EXPECT_EQ(detect_format(sample).kind, FormatKind::Iis);
}

TEST(Detect, BlankSampleIsEmptyInput) {
  try {
    detect_format(std::vector<std::string>{"", "  "});
    FAIL() << "no exception";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::EmptyInput);
  }
}

TEST(Detect, StreamSamplesOnlyLeadingLines) {
  std::stringstream in;
  for (std::size_t i = 0; i < kDetectSampleLines; ++i) in << "::1 - - [19/Jan/2012:10:00:30 +0530] \"GET / HTTP/1.1\" 200 1\n";
  in << "::1 - - [19/Jan/2012:10:00:30 +0530] \"GET / HTTP/1.1\" 200 1 \"-\" \"agent\"\n";
  EXPECT_EQ(detect_format(in).kind, FormatKind::NcsaCommon);
}

TEST(Directives, FieldsTokenized) {
  const std::vector<std::string> header{"#Version: 1.0",
                                        "#Fields: date time cs-method cs-uri-stem c-ip cs-version sc-status"};
  EXPECT_EQ(parse_w3c_directives(header), kFig2Format.field_map);
}

TEST(Directives, DataBeforeFieldsIsMissingFieldsDirective) {
  LineParser p(LogFormat{FormatKind::W3cExtended, {}}, "f");
  EXPECT_EQ(expect_skip(p.feed("#Version: 1.0")), SkipReason::Directive);
  try {
    p.feed("2012-01-09 3:56:27 GET /Website/ ::1 HTTP/1.1 301");
    FAIL() << "no exception";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::MissingFieldsDirective);
  }
}

TEST(Directives, SecondFieldsDirectiveGoverns) {
  LineParser p(LogFormat{FormatKind::W3cExtended, {}}, "f");
  p.feed("#Fields: date time c-ip cs-method cs-uri-stem");
  EXPECT_EQ(expect_record(p.feed("2012-01-09 03:56:27 1.2.3.4 GET /a")).uri, "/a");
  p.feed("#Fields: date time cs-uri-stem cs-method c-ip sc-status");
  const LogRecord r = expect_record(p.feed("2012-01-09 03:56:28 /b POST 5.6.7.8 204"));
  EXPECT_EQ(r.uri, "/b");
  EXPECT_EQ(r.method, "POST");
  EXPECT_EQ(r.ip, "5.6.7.8");
  EXPECT_EQ(r.status, 204);
  EXPECT_EQ(r.line_no, 4u);
}

TEST(Directives, DateDirectiveSuppliesMissingDate) {
  LineParser p(LogFormat{FormatKind::W3cExtended, {}}, "f");
  p.feed("#Date: 2012-02-05 06:57:20");
  p.feed("#Fields: time c-ip cs-method cs-uri-stem");
  const LogRecord r = expect_record(p.feed("07:00:01 1.2.3.4 GET /a"));
  EXPECT_EQ(format_iso_utc(r.timestamp.utc), "2012-02-05T07:00:01Z");
}

TEST(ExtractFields, CountsAndOrder) {
  std::stringstream in(
      "::1 - - [19/Jan/2012:10:00:30 +0530] \"GET /a HTTP/1.1\" 200 1\n"
      "\n"
      "::1 - - [19/Jan/2012:10:00:31 +0530] \"GET /b HTTP/1.1\" 200 1\n");
  std::vector<LogRecord> got;
  const PipelineStats s =
      extract_fields(in, LogFormat{FormatKind::NcsaCommon, {}}, "f", [&](LogRecord&& r) { got.push_back(std::move(r)); });
  ASSERT_EQ(got.size(), 2u);
  EXPECT_EQ(got[0].uri, "/a");
  EXPECT_EQ(got[1].line_no, 3u);
  EXPECT_EQ(s.records_parsed, 2u);
  EXPECT_EQ(s.lines_blank, 1u);
  EXPECT_EQ(s.lines_skipped_malformed, 0u);
  EXPECT_EQ(s.lines_read, 3u);
}

TEST(ExtractFields, EmptyInput) {
  std::stringstream in;
  const PipelineStats s = extract_fields(in, LogFormat{FormatKind::NcsaCommon, {}}, "f", [](LogRecord&&) {});
  EXPECT_EQ(s, PipelineStats{});
}

TEST(ExtractFields, CrlfLineEndings) {
  std::stringstream in("::1 - - [19/Jan/2012:10:00:30 +0530] \"GET /a HTTP/1.1\" 200 1\r\n");
  std::vector<LogRecord> got;
  extract_fields(in, LogFormat{FormatKind::NcsaCommon, {}}, "f", [&](LogRecord&& r) { got.push_back(std::move(r)); });
  ASSERT_EQ(got.size(), 1u);
  EXPECT_EQ(got[0].bytes_sent, 1);
}

TEST(Malformed, ReasonsAreSpecific) {
  const LogFormat ncsa{FormatKind::NcsaCommon, {}};
  EXPECT_EQ(expect_skip(parse_line("::1 - - [19/Jan/2012:10:00:30 +0530] \"GET / HTTP/1.1\" 2x0 1", ncsa, 1, "f")),
            SkipReason::MalformedStatus);
  EXPECT_EQ(expect_skip(parse_line("::1 - - [32/Jan/2012:10:00:30 +0530] \"GET / HTTP/1.1\" 200 1", ncsa, 1, "f")),
            SkipReason::MalformedTimestamp);
  EXPECT_EQ(expect_skip(parse_line("::1 - - [19/Jan/2012:10:00:30 +0530] \"GET / HTTP/1.1\" 200", ncsa, 1, "f")),
            SkipReason::MalformedFieldCount);
  EXPECT_EQ(expect_skip(parse_line("2012-01-09 3:56:27 GET /Website/ ::1 HTTP/1.1", kFig2Format, 1, "f")),
            SkipReason::MalformedFieldCount);
  EXPECT_EQ(expect_skip(parse_line("   ", ncsa, 1, "f")), SkipReason::Blank);
  EXPECT_EQ(expect_skip(parse_line("#Remark: x", ncsa, 1, "f")), SkipReason::Directive);
}

std::vector<LogFormat> all_formats(testing::Gen& g) {
  return {LogFormat{FormatKind::W3cExtended, testing::random_w3c_field_map(g)},
          LogFormat{FormatKind::NcsaCommon, {}}, LogFormat{FormatKind::NcsaCombined, {}},
          LogFormat{FormatKind::Iis, {}}};
}

std::string format_name(const ::testing::TestParamInfo<int>& info) {
  static const char* const names[] = {"W3c", "NcsaCommon", "NcsaCombined", "Iis"};
  return names[info.param];
}

class RoundTrip : public ::testing::TestWithParam<int> {};

TEST_P(RoundTrip, WriterThenParserIsIdentity) {
  testing::Gen g(1000 + static_cast<std::uint64_t>(GetParam()));
  LogFormat format = all_formats(g)[static_cast<std::size_t>(GetParam())];
  for (int i = 0; i < 1000; ++i) {
    ParserOptions opts;
    if (format.kind == FormatKind::Iis) opts.iis_offset_minutes = static_cast<int>(g.between(-720, 840));
    if (format.kind == FormatKind::W3cExtended && i % 100 == 0) format.field_map = testing::random_w3c_field_map(g);
    const LogRecord r = testing::random_record(g, format, opts, static_cast<std::uint64_t>(i + 1), "rt.log");
    const std::string line = render_line(r, format, opts);
    const auto outcome = parse_line(line, format, static_cast<std::uint64_t>(i + 1), "rt.log", opts);
    ASSERT_TRUE(std::holds_alternative<LogRecord>(outcome)) << line;
    ASSERT_EQ(std::get<LogRecord>(outcome), r) << line;
    ASSERT_EQ(render_line(std::get<LogRecord>(outcome), format, opts), line);
  }
}

INSTANTIATE_TEST_SUITE_P(AllFormats, RoundTrip, ::testing::Values(0, 1, 2, 3),
                         format_name);

TEST(RoundTripIis, CustomFieldOrder) {
  testing::Gen g(77);
  ParserOptions opts;
  std::shuffle(opts.iis_field_order.begin(), opts.iis_field_order.end(), g.engine());
  const LogFormat iis{FormatKind::Iis, {}};
  for (int i = 0; i < 200; ++i) {
    const LogRecord r = testing::random_record(g, iis, opts, 1, "f");
    const auto outcome = parse_line(render_line(r, iis, opts), iis, 1, "f", opts);
    ASSERT_TRUE(std::holds_alternative<LogRecord>(outcome));
    EXPECT_EQ(std::get<LogRecord>(outcome), r);
  }
}

class Injection : public ::testing::TestWithParam<int> {};

TEST_P(Injection, MalformedLinesNeverAbortAndAreCounted) {
  testing::Gen g(5000 + static_cast<std::uint64_t>(GetParam()));
  const LogFormat format = all_formats(g)[static_cast<std::size_t>(GetParam())];
  const ParserOptions opts;
  std::string text;
  std::uint64_t good = 0, bad = 0, blank = 0, directive = 0;
  std::vector<std::string> expected_uris;
  if (format.kind == FormatKind::W3cExtended) {
    for (const auto& h : render_w3c_header(format.field_map, Instant{})) text += h + "\n";
    directive = 4;
  }
  for (int i = 0; i < 1000; ++i) {
    const auto roll = g.below(10);
    if (roll < 6) {
      const LogRecord r = testing::random_record(g, format, opts, 0, "f");
      text += render_line(r, format, opts) + "\n";
      expected_uris.push_back(r.uri);
      ++good;
    } else if (roll < 9) {
      text += testing::malformed_line(g, format, opts) + "\n";
      ++bad;
    } else {
      text += "\n";
      ++blank;
    }
  }
  std::stringstream in(text);
  std::vector<std::string> uris;
  const PipelineStats s = extract_fields(in, format, "f", [&](LogRecord&& r) { uris.push_back(r.uri); }, opts);
  EXPECT_EQ(s.records_parsed, good);
  EXPECT_EQ(s.lines_skipped_malformed, bad);
  EXPECT_EQ(s.lines_blank, blank);
  EXPECT_EQ(s.lines_directive, directive);
  EXPECT_EQ(s.lines_read, good + bad + blank + directive);
  EXPECT_TRUE(s.line_accounting_violations().empty());
  EXPECT_EQ(uris, expected_uris);
}

INSTANTIATE_TEST_SUITE_P(AllFormats, Injection, ::testing::Values(0, 1, 2, 3),
                         format_name);

}  // namespace
}  // namespace logprep
