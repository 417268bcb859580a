#pragma once

// Format detection and line-level field extraction for W3C Extended, NCSA
// Common/Combined and IIS access logs.

#include <cstdint>
#include <functional>
#include <istream>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "logprep/record.hpp"

namespace logprep {

enum class SkipReason { Directive, Blank, MalformedFieldCount, MalformedTimestamp, MalformedStatus };

std::string_view to_string(SkipReason reason);

struct Skip {
  std::uint64_t line_no = 0;
  SkipReason reason = SkipReason::Blank;
  std::string raw_text;

  bool operator==(const Skip&) const = default;
};

using ParseOutcome = std::variant<LogRecord, Skip>;

enum class IisField {
  ClientIp,
  Username,
  Date,
  Time,
  ServiceName,
  ServerName,
  ServerIp,
  TimeTaken,
  BytesReceived,
  BytesSent,
  Status,
  WindowsStatus,
  Method,
  Uri,
  Parameters,
};

/// client-ip, username, date, time, service, server name, server ip,
/// time-taken, bytes received, bytes sent, status, windows status, method,
/// target, parameters.
const std::vector<IisField>& default_iis_field_order();
std::string_view to_string(IisField f);
std::optional<IisField> parse_iis_field(std::string_view name);

struct ParserOptions {
  // IIS lines carry local time without a zone.
  int iis_offset_minutes = 0;
  std::vector<IisField> iis_field_order = default_iis_field_order();
};

/// Number of non-blank lines AUTO detection looks at.
inline constexpr std::size_t kDetectSampleLines = 25;

/// Throws Error(EmptyInput) when the sample holds no non-blank line.
LogFormat detect_format(std::span<const std::string> sample);
/// Reads up to kDetectSampleLines non-blank lines and detects from them.
LogFormat detect_format(std::istream& in);

/// Returns the token list of the last "#Fields:" directive among the given
/// lines (empty when there is none).
std::vector<std::string> parse_w3c_directives(std::span<const std::string> header_lines);

/// Parses one line in isolation. A W3C data line under an empty field map
/// throws Error(MissingFieldsDirective); every other problem is a Skip.
ParseOutcome parse_line(std::string_view line, const LogFormat& format, std::uint64_t line_no,
                        const std::string& source_file, const ParserOptions& options = {});

/// Stateful per-file parser: counts lines and applies W3C directives as
/// they appear ("#Fields:" replaces the map, "#Date:" supplies a default
/// date for maps without a date column).
class LineParser {
 public:
  LineParser(LogFormat format, std::string source_file, ParserOptions options = {});

  ParseOutcome feed(std::string_view line);

  const LogFormat& format() const { return format_; }
  std::uint64_t lines_seen() const { return line_no_; }

 private:
  LogFormat format_;
  std::string source_file_;
  ParserOptions options_;
  std::uint64_t line_no_ = 0;
  std::string default_date_;
};

using RecordSink = std::function<void(LogRecord&&)>;

/// Streams newline-delimited text through a LineParser, handing each record
/// to `sink` in file order. Returns the line/parse counters. I/O failure
/// throws Error(Io) naming the byte offset reached.
PipelineStats extract_fields(std::istream& in, const LogFormat& format, const std::string& source_file,
                             const RecordSink& sink, const ParserOptions& options = {});

// Writers: the inverse of parse_line for each format.

/// Renders a record as one line (no terminator). W3C uses format.field_map.
std::string render_line(const LogRecord& r, const LogFormat& format,
                         const ParserOptions& options = {});
/// "#Software/#Version/#Date/#Fields" block for a W3C file.
std::vector<std::string> render_w3c_header(const std::vector<std::string>& field_map,
                                           Instant created);

}  // namespace logprep
