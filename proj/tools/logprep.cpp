// logprep: access-log preprocessing front end.
//
//   logprep run --input <path>... --out <dir> [options]
//   logprep detect --input <path>
//   logprep fixture --records N --irrelevant N --users N --seed S --format F --out <dir>
//
// Exit codes: 0 ok, 2 config, 3 I/O, 4 invariant violation.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "logprep/error.hpp"
#include "logprep/fixture.hpp"
#include "logprep/parsers.hpp"
#include "logprep/pipeline.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitIo = 3;
constexpr int kExitInvariant = 4;

int exit_code_for(logprep::ErrorCode code) {
  using logprep::ErrorCode;
  switch (code) {
    case ErrorCode::Config:
    case ErrorCode::MissingGraph:
    case ErrorCode::InfeasibleFixture:
      return kExitConfig;
    case ErrorCode::InvariantViolation:
      return kExitInvariant;
    default:
      return kExitIo;
  }
}

std::string join(const std::vector<std::string>& parts, char sep) {
  std::string out;
  for (const auto& p : parts) {
    if (!out.empty()) out += sep;
    out += p;
  }
  return out;
}

// Flag values are kept as text and fed through apply_config_entry, so a flag
// and its config-file key always mean the same thing.
struct RunFlags {
  std::string config;
  std::vector<std::pair<std::string, std::string>> entries;
};

void add_setting(CLI::App* cmd, RunFlags& flags, const std::string& flag, const std::string& key,
                 const std::string& help) {
  cmd->add_option_function<std::string>(
      flag, [&flags, key](const std::string& v) { flags.entries.emplace_back(key, v); }, help);
}

int run_command(const RunFlags& flags, const std::vector<std::string>& inputs, bool graph_from_referrers) {
  logprep::PipelineConfig cfg;
  if (!flags.config.empty()) logprep::apply_config_file(cfg, flags.config);
  if (!inputs.empty()) logprep::apply_config_entry(cfg, "inputs", join(inputs, ','));
  for (const auto& [key, value] : flags.entries) logprep::apply_config_entry(cfg, key, value);
  if (graph_from_referrers) logprep::apply_config_entry(cfg, "graph_from_referrers", "true");
  if (const char* env = std::getenv("LOGPREP_OUT"); env && *env) cfg.output_dir = env;
  if (cfg.inputs.empty()) throw logprep::Error(logprep::ErrorCode::Config, "no --input given");
  if (cfg.output_dir.empty()) throw logprep::Error(logprep::ErrorCode::Config, "no --out given");

  const logprep::PipelineStats stats = logprep::run_pipeline(cfg);
  if (const auto broken = stats.identity_violations(); !broken.empty()) {
    for (const auto& b : broken) std::cerr << "logprep: stats invariant violated: " << b << '\n';
    return kExitInvariant;
  }
  std::cout << "records_parsed=" << stats.records_parsed << " records_after_cleaning=" << stats.records_after_cleaning
            << " users_identified=" << stats.users_identified << " sessions=" << stats.sessions_identified
            << " inferred=" << stats.records_inferred << '\n';
  return kExitOk;
}

int detect_command(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw logprep::Error(logprep::ErrorCode::Io, "cannot open " + path);
  const logprep::LogFormat format = logprep::detect_format(in);
  std::cout << logprep::to_string(format.kind);
  if (!format.field_map.empty()) std::cout << '\t' << join(format.field_map, ' ');
  std::cout << '\n';
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Access-log preprocessing: parse, clean, identify users, sessionize, complete paths"};
  app.require_subcommand(1);

  RunFlags run_flags;
  std::vector<std::string> run_inputs;
  bool graph_from_referrers = false;
  CLI::App* run = app.add_subcommand("run", "Run the full pipeline");
  run->add_option("--config", run_flags.config, "key=value or .json config file; flags override it");
  run->add_option("--input", run_inputs, "Log file(s)");
  add_setting(run, run_flags, "--format", "format", "auto|w3c|ncsa|ncsa-combined|iis");
  add_setting(run, run_flags, "--suffixes", "suffixes", "Comma-separated irrelevant suffixes");
  add_setting(run, run_flags, "--preset", "preset", "Cleaning preset: default|web-assets");
  add_setting(run, run_flags, "--remove-failed-status", "remove_failed_status", "Also drop failed statuses");
  add_setting(run, run_flags, "--strip-query", "strip_query", "Ignore ?query when matching suffixes");
  add_setting(run, run_flags, "--identity", "identity", "basic|topology");
  add_setting(run, run_flags, "--graph", "graph", "Site graph edge file (tab-separated from/to)");
  run->add_flag("--graph-from-referrers", graph_from_referrers, "Derive the site graph from referrers");
  add_setting(run, run_flags, "--site-hosts", "site_hosts", "Hosts counted as on-site referrers");
  add_setting(run, run_flags, "--timeout-min", "timeout_min", "Session inactivity timeout in minutes");
  add_setting(run, run_flags, "--max-page-stay-min", "max_page_stay_min", "Optional page-stay bound in minutes");
  add_setting(run, run_flags, "--iis-offset-min", "iis_offset_min", "UTC offset of IIS local times");
  add_setting(run, run_flags, "--iis-field-order", "iis_field_order", "Comma-separated IIS field names");
  add_setting(run, run_flags, "--out", "out", "Output directory (LOGPREP_OUT overrides)");
  add_setting(run, run_flags, "--output-format", "output_format", "csv|jsonl");

  std::string detect_input;
  CLI::App* detect = app.add_subcommand("detect", "Print the detected format of a log file");
  detect->add_option("--input", detect_input, "Log file")->required();

  logprep::FixtureSpec spec;
  std::string fixture_format = "ncsa-combined";
  std::string fixture_out;
  CLI::App* fixture = app.add_subcommand("fixture", "Write a synthetic log and its ground-truth sidecar");
  fixture->add_option("--records", spec.n_records, "Total records")->capture_default_str();
  fixture->add_option("--irrelevant", spec.n_irrelevant, "Records the default policy removes")->capture_default_str();
  fixture->add_option("--users", spec.n_users, "Distinct users among kept records")->capture_default_str();
  fixture->add_option("--sessions-mean", spec.sessions_per_user_mean, "Mean sessions per user")->capture_default_str();
  fixture->add_option("--seed", spec.seed, "RNG seed")->capture_default_str();
  fixture->add_option("--format", fixture_format, "w3c|ncsa|ncsa-combined|iis")->capture_default_str();
  fixture->add_option("--out", fixture_out, "Output directory (LOGPREP_OUT overrides)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*run) return run_command(run_flags, run_inputs, graph_from_referrers);
    if (*detect) return detect_command(detect_input);
    if (*fixture) {
      const auto kind = logprep::parse_format_kind(fixture_format);
      if (!kind) throw logprep::Error(logprep::ErrorCode::Config, "unknown fixture format: " + fixture_format);
      spec.format = *kind;
      if (const char* env = std::getenv("LOGPREP_OUT"); env && *env) fixture_out = env;
      if (fixture_out.empty()) throw logprep::Error(logprep::ErrorCode::Config, "no --out given");
      const logprep::Fixture fx = logprep::generate_fixture(spec);
      logprep::write_fixture(fx, fixture_out);
      std::cout << "wrote " << fx.lines.size() << " lines, " << fx.sessions << " sessions to " << fixture_out << '\n';
      return kExitOk;
    }
  } catch (const logprep::Error& e) {
    std::cerr << "logprep: " << e.what() << '\n';
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "logprep: " << e.what() << '\n';
    return kExitIo;
  }
  return kExitConfig;
}
