#pragma once

// Stage orchestration: parse -> clean -> identify -> sessionize -> complete,
// plus configuration and tabular outputs.

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "logprep/cleaning.hpp"
#include "logprep/identity.hpp"
#include "logprep/parsers.hpp"
#include "logprep/record.hpp"
#include "logprep/sessions.hpp"

namespace logprep {

enum class OutputFormat { Csv, Jsonl };
enum class GraphSource { None, EdgeFile, FromReferrers };

struct PipelineConfig {
  std::vector<std::string> inputs;
  std::optional<FormatKind> format;  // nullopt: detect per file
  CleaningPolicy cleaning;
  IdentityMode identity_mode = IdentityMode::Basic;
  GraphSource graph_source = GraphSource::None;
  std::string graph_path;
  std::vector<std::string> site_hosts;
  double timeout_minutes = 30;
  std::optional<double> max_page_stay_minutes;
  int iis_offset_minutes = 0;
  std::vector<IisField> iis_field_order = default_iis_field_order();
  std::string output_dir;
  OutputFormat output_format = OutputFormat::Csv;
  std::optional<std::uint64_t> seed;

  /// Throws Error(Config) on any contract violation.
  void validate() const;
  ParserOptions parser_options() const;
  SessionOptions session_options() const;
};

/// Applies one setting by name. Names are the config-file keys, which mirror
/// the CLI flags ("timeout-min" and "timeout_min" are the same key; cleaning
/// keys may be written "cleaning.suffixes" or "suffixes"). List values are
/// comma-separated. Throws Error(Config) for unknown keys or bad values.
void apply_config_entry(PipelineConfig& cfg, std::string key, const std::string& value);

/// key=value lines ('#' comments allowed), or a JSON object when the file
/// ends in ".json". Throws Error(Io) when unreadable.
void apply_config_file(PipelineConfig& cfg, const std::string& path);

struct InputSummary {
  std::string file;
  std::optional<LogFormat> format;  // nullopt for an input with no data
};

struct PipelineResult {
  PipelineStats stats;
  std::vector<InputSummary> inputs;
  std::vector<LogRecord> records;  // cleaned, record_key order
  std::vector<UserAssignment> users;
  std::vector<Session> sessions;  // path-completed, session_id order
};

PipelineStats compute_stats(const PipelineStats& parse_counts,
                            const std::map<std::string, std::uint64_t>& removed_by_reason,
                            std::size_t users, std::span<const Session> sessions);

/// Runs every stage in memory; validates the config first.
PipelineResult run_stages(const PipelineConfig& cfg);

/// Writes records/users/sessions tables and stats.json into `dir`.
void write_outputs(const PipelineResult& result, const std::filesystem::path& dir, OutputFormat format);

/// run_stages + write_outputs into cfg.output_dir.
PipelineStats run_pipeline(const PipelineConfig& cfg);

// Table schemas (column order of the CSV header / JSONL keys).
const std::vector<std::string>& record_output_columns();  // record_columns() + user_id, session_id
const std::vector<std::string>& user_columns();
const std::vector<std::string>& session_columns();

}  // namespace logprep
