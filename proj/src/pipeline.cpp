#include "logprep/pipeline.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "logprep/csv.hpp"
#include "logprep/error.hpp"

namespace logprep {

namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// Configuration

void PipelineConfig::validate() const {
  cleaning.validate();
  if (!(timeout_minutes > 0) || !std::isfinite(timeout_minutes)) {
    throw Error(ErrorCode::Config, "timeout must be a positive number of minutes");
  }
  if (max_page_stay_minutes && (!(*max_page_stay_minutes > 0) || !std::isfinite(*max_page_stay_minutes))) {
    throw Error(ErrorCode::Config, "max page stay must be a positive number of minutes");
  }
  if (identity_mode == IdentityMode::Topology && graph_source == GraphSource::None) {
    throw Error(ErrorCode::Config, "topology identification needs --graph or --graph-from-referrers");
  }
  if (graph_source == GraphSource::EdgeFile && graph_path.empty()) {
    throw Error(ErrorCode::Config, "edge-file graph source without a path");
  }
  if (iis_offset_minutes < -24 * 60 || iis_offset_minutes > 24 * 60) {
    throw Error(ErrorCode::Config, "IIS offset out of range");
  }
  if (iis_field_order.empty()) throw Error(ErrorCode::Config, "empty IIS field order");
}

ParserOptions PipelineConfig::parser_options() const {
  return ParserOptions{iis_offset_minutes, iis_field_order};
}

namespace {

Millis minutes_to_ms(double minutes) { return Millis{static_cast<std::int64_t>(std::llround(minutes * 60'000.0))}; }

std::string trim_copy(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> out;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim_copy(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw Error(ErrorCode::Config, key + ": expected a boolean, got \"" + v + "\"");
}

double parse_double(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    double d = std::stod(v, &used);
    if (used == v.size()) return d;
  } catch (const std::exception&) {
  }
  throw Error(ErrorCode::Config, key + ": expected a number, got \"" + v + "\"");
}

template <typename Int>
Int parse_int(const std::string& key, const std::string& v) {
  Int out{};
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || p != v.data() + v.size()) {
    throw Error(ErrorCode::Config, key + ": expected an integer, got \"" + v + "\"");
  }
  return out;
}

}  // namespace

SessionOptions PipelineConfig::session_options() const {
  SessionOptions o;
  o.timeout = minutes_to_ms(timeout_minutes);
  if (max_page_stay_minutes) o.max_page_stay = minutes_to_ms(*max_page_stay_minutes);
  return o;
}

void apply_config_entry(PipelineConfig& cfg, std::string key, const std::string& raw) {
  std::replace(key.begin(), key.end(), '-', '_');
  if (key.starts_with("cleaning.")) key = key.substr(9);
  const std::string value = trim_copy(raw);

  if (key == "input" || key == "inputs") {
    for (auto& p : split_list(value)) cfg.inputs.push_back(std::move(p));
  } else if (key == "format") {
    if (value == "auto") {
      cfg.format.reset();
    } else if (auto k = parse_format_kind(value)) {
      cfg.format = *k;
    } else {
      throw Error(ErrorCode::Config, "format: unknown format \"" + value + "\"");
    }
  } else if (key == "suffixes") {
    cfg.cleaning.set_suffixes(split_list(value));
  } else if (key == "preset") {
    if (value == "default") {
      cfg.cleaning.set_suffixes(CleaningPolicy{}.irrelevant_suffixes);
    } else if (value == "web-assets") {
      cfg.cleaning.set_suffixes(CleaningPolicy::web_assets_preset().irrelevant_suffixes);
    } else {
      throw Error(ErrorCode::Config, "preset: unknown cleaning preset \"" + value + "\"");
    }
  } else if (key == "remove_failed_status") {
    cfg.cleaning.remove_failed_status = parse_bool(key, value);
  } else if (key == "strip_query") {
    cfg.cleaning.strip_query_before_match = parse_bool(key, value);
  } else if (key == "identity") {
    if (value == "basic") {
      cfg.identity_mode = IdentityMode::Basic;
    } else if (value == "topology") {
      cfg.identity_mode = IdentityMode::Topology;
    } else {
      throw Error(ErrorCode::Config, "identity: expected basic|topology, got \"" + value + "\"");
    }
  } else if (key == "graph") {
    cfg.graph_source = GraphSource::EdgeFile;
    cfg.graph_path = value;
  } else if (key == "graph_from_referrers") {
    if (parse_bool(key, value)) {
      cfg.graph_source = GraphSource::FromReferrers;
    } else if (cfg.graph_source == GraphSource::FromReferrers) {
      cfg.graph_source = GraphSource::None;
    }
  } else if (key == "site_host" || key == "site_hosts") {
    for (auto& h : split_list(value)) cfg.site_hosts.push_back(std::move(h));
  } else if (key == "timeout_min") {
    cfg.timeout_minutes = parse_double(key, value);
  } else if (key == "max_page_stay_min") {
    cfg.max_page_stay_minutes = parse_double(key, value);
  } else if (key == "iis_offset_min") {
    cfg.iis_offset_minutes = parse_int<int>(key, value);
  } else if (key == "iis_field_order") {
    std::vector<IisField> order;
    for (const auto& name : split_list(value)) {
      auto f = parse_iis_field(name);
      if (!f) throw Error(ErrorCode::Config, "iis_field_order: unknown field \"" + name + "\"");
      order.push_back(*f);
    }
    cfg.iis_field_order = std::move(order);
  } else if (key == "out") {
    cfg.output_dir = value;
  } else if (key == "output_format") {
    if (value == "csv") {
      cfg.output_format = OutputFormat::Csv;
    } else if (value == "jsonl") {
      cfg.output_format = OutputFormat::Jsonl;
    } else {
      throw Error(ErrorCode::Config, "output_format: expected csv|jsonl, got \"" + value + "\"");
    }
  } else if (key == "seed") {
    cfg.seed = parse_int<std::uint64_t>(key, value);
  } else {
    throw Error(ErrorCode::Config, "unknown configuration key \"" + key + "\"");
  }
}

void apply_config_file(PipelineConfig& cfg, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open config file " + path);

  if (path.ends_with(".json")) {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::Config, path + ": " + e.what());
    }
    if (!j.is_object()) throw Error(ErrorCode::Config, path + ": expected a JSON object");
    auto as_text = [](const nlohmann::json& v) -> std::string {
      if (v.is_string()) return v.get<std::string>();
      if (v.is_array()) {
        std::string out;
        for (const auto& e : v) {
          if (!out.empty()) out += ',';
          out += e.is_string() ? e.get<std::string>() : e.dump();
        }
        return out;
      }
      return v.dump();
    };
    for (const auto& [k, v] : j.items()) {
      if (v.is_object()) {
        for (const auto& [k2, v2] : v.items()) apply_config_entry(cfg, k + "." + k2, as_text(v2));
      } else {
        apply_config_entry(cfg, k, as_text(v));
      }
    }
    return;
  }

  std::string line;
  std::uint64_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim_copy(line);
    if (t.empty() || t.front() == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorCode::Config, path + ":" + std::to_string(line_no) + ": expected key=value");
    }
    apply_config_entry(cfg, trim_copy(t.substr(0, eq)), t.substr(eq + 1));
  }
}

// ---------------------------------------------------------------------------
// Stages

PipelineStats compute_stats(const PipelineStats& parse_counts,
                            const std::map<std::string, std::uint64_t>& removed_by_reason, std::size_t users,
                            std::span<const Session> sessions) {
  PipelineStats s;
  s.merge_parse_counts(parse_counts);
  s.records_removed_by_reason = removed_by_reason;
  std::uint64_t removed = 0;
  for (const auto& [_, n] : removed_by_reason) removed += n;
  if (removed > s.records_parsed) {
    throw Error(ErrorCode::InvariantViolation, "more records removed than parsed");
  }
  s.records_after_cleaning = s.records_parsed - removed;
  s.users_identified = users;
  s.sessions_identified = sessions.size();
  for (const auto& session : sessions) s.records_inferred += session.inferred_count();
  return s;
}

namespace {

InputSummary parse_input(const std::string& path, const PipelineConfig& cfg, PipelineStats& counts,
                         std::map<std::string, std::uint64_t>& removed, std::vector<LogRecord>& kept) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open input " + path);

  InputSummary summary{path, std::nullopt};
  LogFormat format{FormatKind::NcsaCommon, {}};
  if (cfg.format) {
    format.kind = *cfg.format;
    summary.format = format;
  } else {
    try {
      format = detect_format(in);
      summary.format = format;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::EmptyInput) throw;
    }
    in.clear();
    in.seekg(0);
    if (!in) throw Error(ErrorCode::Io, "cannot rewind input " + path);
  }
  if (format.kind == FormatKind::W3cExtended) format.field_map.clear();  // directives re-read in order

  const CleaningPolicy& policy = cfg.cleaning;
  counts.merge_parse_counts(extract_fields(
      in, format, path,
      [&](LogRecord&& r) {
        auto verdict = is_irrelevant(r, policy);
        if (verdict.irrelevant) {
          ++removed[verdict.reason];
        } else {
          kept.push_back(std::move(r));
        }
      },
      cfg.parser_options()));
  return summary;
}

}  // namespace

PipelineResult run_stages(const PipelineConfig& cfg) {
  cfg.validate();

  PipelineResult result;
  PipelineStats counts;
  std::map<std::string, std::uint64_t> removed;
  for (const auto& path : cfg.inputs) {
    result.inputs.push_back(parse_input(path, cfg, counts, removed, result.records));
  }
  std::stable_sort(result.records.begin(), result.records.end(), ByRecordKey{});

  SiteGraph graph;
  if (cfg.graph_source == GraphSource::EdgeFile) {
    graph = load_site_graph_file(cfg.graph_path);
  } else if (cfg.graph_source == GraphSource::FromReferrers) {
    graph = derive_site_graph(result.records, cfg.site_hosts);
  }

  result.users = identify_users(result.records, cfg.identity_mode,
                                cfg.identity_mode == IdentityMode::Topology ? &graph : nullptr);

  const SessionOptions session_options = cfg.session_options();
  for (const auto& user : result.users) {
    std::vector<LogRecord> mine;
    mine.reserve(user.record_indices.size());
    for (std::size_t idx : user.record_indices) mine.push_back(result.records[idx]);
    for (auto& s : sessionize(user, mine, session_options)) {
      result.sessions.push_back(complete_paths(s, graph));
    }
  }
  assign_session_ids(result.sessions);

  result.stats = compute_stats(counts, removed, result.users.size(), result.sessions);
  return result;
}

// ---------------------------------------------------------------------------
// Outputs

const std::vector<std::string>& record_output_columns() {
  static const std::vector<std::string> cols = [] {
    auto c = record_columns();
    c.push_back("user_id");
    c.push_back("session_id");
    return c;
  }();
  return cols;
}

const std::vector<std::string>& user_columns() {
  static const std::vector<std::string> cols{"user_id",   "ip",           "browser_family", "browser_major",
                                             "os_family", "record_count", "first_seen_utc", "last_seen_utc"};
  return cols;
}

const std::vector<std::string>& session_columns() {
  static const std::vector<std::string> cols{"session_id", "user_id",  "n_records",        "n_inferred",
                                             "start_utc",  "end_utc",  "duration_seconds", "page_sequence"};
  return cols;
}

namespace {

std::string seconds_text(Millis d) {
  const auto ms = d.count();
  if (ms % 1000 == 0) return std::to_string(ms / 1000);
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", static_cast<double>(ms) / 1000.0);
  return buf;
}

class TableWriter {
 public:
  TableWriter(const fs::path& path, OutputFormat format, const std::vector<std::string>& columns)
      : out_(path, std::ios::binary), format_(format), columns_(columns), path_(path) {
    if (!out_) throw Error(ErrorCode::Io, "cannot create " + path.string());
    if (format_ == OutputFormat::Csv) csv::write_header(out_, columns_);
  }

  // `typed` supplies the JSON value for each column (null when absent).
  void row(const csv::Row& cells, const nlohmann::ordered_json& typed) {
    if (format_ == OutputFormat::Csv) {
      csv::write_row(out_, cells);
    } else {
      out_ << typed.dump() << '\n';
    }
  }

  void close() {
    out_.flush();
    if (!out_) throw Error(ErrorCode::Io, "write failure on " + path_.string());
  }

 private:
  std::ofstream out_;
  OutputFormat format_;
  const std::vector<std::string>& columns_;
  fs::path path_;
};

}  // namespace

void write_outputs(const PipelineResult& result, const fs::path& dir, OutputFormat format) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::Io, "cannot create output directory " + dir.string() + ": " + ec.message());
  const std::string ext = format == OutputFormat::Csv ? ".csv" : ".jsonl";

  // records: every real and inferred record, each tagged with its user and session
  struct Tagged {
    const LogRecord* record;
    std::uint64_t user_id;
    std::uint64_t session_id;
  };
  std::vector<Tagged> rows;
  for (const auto& s : result.sessions) {
    for (const auto& e : s.entries) rows.push_back({&e, s.user_id, s.session_id});
  }
  std::sort(rows.begin(), rows.end(),
            [](const Tagged& a, const Tagged& b) { return ByRecordKey{}(*a.record, *b.record); });
  {
    TableWriter w(dir / ("records" + ext), format, record_output_columns());
    for (const auto& t : rows) {
      auto cells = record_to_row(*t.record);
      cells.emplace_back(std::to_string(t.user_id));
      cells.emplace_back(std::to_string(t.session_id));
      nlohmann::ordered_json j = record_to_json(*t.record);
      j["user_id"] = t.user_id;
      j["session_id"] = t.session_id;
      w.row(cells, j);
    }
    w.close();
  }

  {
    TableWriter w(dir / ("users" + ext), format, user_columns());
    for (const auto& u : result.users) {
      Instant first = Instant::max(), last = Instant::min();
      for (std::size_t idx : u.record_indices) {
        first = std::min(first, result.records[idx].timestamp.utc);
        last = std::max(last, result.records[idx].timestamp.utc);
      }
      const auto& sig = u.signature;
      csv::Row cells{std::to_string(u.user_id),
                     u.ip,
                     sig.browser_family,
                     sig.browser_major ? csv::Cell{std::to_string(*sig.browser_major)} : std::nullopt,
                     sig.os_family,
                     std::to_string(u.record_indices.size()),
                     format_iso_utc(first),
                     format_iso_utc(last)};
      nlohmann::ordered_json j;
      j["user_id"] = u.user_id;
      j["ip"] = u.ip;
      j["browser_family"] = sig.browser_family;
      j["browser_major"] = sig.browser_major ? nlohmann::ordered_json(*sig.browser_major) : nlohmann::ordered_json(nullptr);
      j["os_family"] = sig.os_family;
      j["record_count"] = u.record_indices.size();
      j["first_seen_utc"] = *cells[6];
      j["last_seen_utc"] = *cells[7];
      w.row(cells, j);
    }
    w.close();
  }

  {
    TableWriter w(dir / ("sessions" + ext), format, session_columns());
    for (const auto& s : result.sessions) {
      std::string pages;
      for (const auto& e : s.entries) {
        if (!pages.empty()) pages += '|';
        pages += canonical_page(e.uri);
        if (e.inferred) pages += '*';
      }
      const Millis duration = s.end_utc - s.start_utc;
      csv::Row cells{std::to_string(s.session_id),       std::to_string(s.user_id),
                     std::to_string(s.real_count()),      std::to_string(s.inferred_count()),
                     format_iso_utc(s.start_utc),         format_iso_utc(s.end_utc),
                     seconds_text(duration),              pages};
      nlohmann::ordered_json j;
      j["session_id"] = s.session_id;
      j["user_id"] = s.user_id;
      j["n_records"] = s.real_count();
      j["n_inferred"] = s.inferred_count();
      j["start_utc"] = *cells[4];
      j["end_utc"] = *cells[5];
      if (duration.count() % 1000 == 0) {
        j["duration_seconds"] = duration.count() / 1000;
      } else {
        j["duration_seconds"] = static_cast<double>(duration.count()) / 1000.0;
      }
      j["page_sequence"] = pages;
      w.row(cells, j);
    }
    w.close();
  }

  std::ofstream stats(dir / "stats.json", std::ios::binary);
  stats << result.stats.to_json().dump(2) << '\n';
  stats.flush();
  if (!stats) throw Error(ErrorCode::Io, "write failure on " + (dir / "stats.json").string());
}

PipelineStats run_pipeline(const PipelineConfig& cfg) {
  if (cfg.output_dir.empty()) throw Error(ErrorCode::Config, "no output directory");
  PipelineResult result = run_stages(cfg);
  write_outputs(result, cfg.output_dir, cfg.output_format);
  return result.stats;
}

}  // namespace logprep
