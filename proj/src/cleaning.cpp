#include "logprep/cleaning.hpp"

#include <algorithm>
#include <cctype>

namespace logprep {

namespace {

std::string match_path(const std::string& uri, bool strip_query) {
  std::string path = uri;
  if (strip_query) {
    if (const auto cut = path.find_first_of("?#"); cut != std::string::npos) path.resize(cut);
  }
  std::transform(path.begin(), path.end(), path.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return path;
}

}  // namespace

CleaningVerdict is_irrelevant(const LogRecord& r, const CleaningPolicy& policy) {
  const std::string path = match_path(r.uri, policy.strip_query_before_match);
  for (const auto& suffix : policy.irrelevant_suffixes) {
    if (path.ends_with(suffix)) return {true, "SUFFIX:" + suffix};
  }
  if (policy.remove_failed_status && r.status) {
    for (const auto& range : policy.failed_status) {
      if (range.contains(*r.status)) return {true, "FAILED_STATUS"};
    }
  }
  return {};
}

CleanResult clean(std::vector<LogRecord> records, const CleaningPolicy& policy) {
  CleanResult out;
  out.kept.reserve(records.size());
  for (auto& r : records) {
    auto verdict = is_irrelevant(r, policy);
    if (verdict.irrelevant) {
      ++out.removed_by_reason[verdict.reason];
    } else {
      out.kept.push_back(std::move(r));
    }
  }
  return out;
}

}  // namespace logprep
