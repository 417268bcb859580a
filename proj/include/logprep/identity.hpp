#pragma once

// User identification: (IP, agent signature) grouping, optionally refined by
// the site link graph.

#include <compare>
#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "logprep/record.hpp"

namespace logprep {

struct AgentSignature {
  std::string browser_family = "unknown";
  std::optional<int> browser_major;
  std::string os_family = "unknown";

  auto operator<=>(const AgentSignature&) const = default;
};

/// Browser family is the first product token found in priority order
/// Edge > Chrome > Firefox > Safari > MSIE/Trident > Opera, falling back to
/// the agent's first token; the major version is the run of digits after the
/// token's '/' (or the space after "MSIE"). OS comes from the parenthesized
/// platform comments. W3C-style '+' separators are read as spaces.
AgentSignature agent_signature(const std::optional<std::string>& user_agent);

/// Lowercase, host-less path with query and fragment removed; "/" for an
/// empty path.
std::string canonical_page(std::string_view uri);

class SiteGraph {
 public:
  void add_node(const std::string& page);
  void add_edge(const std::string& from, const std::string& to);
  void add_entry_page(const std::string& page);

  bool has_node(const std::string& page) const { return nodes_.contains(page); }
  bool has_edge(const std::string& from, const std::string& to) const;
  bool is_entry_page(const std::string& page) const { return entry_pages_.contains(page); }

  const std::set<std::string>& nodes() const { return nodes_; }
  const std::set<std::string>& entry_pages() const { return entry_pages_; }
  std::set<std::pair<std::string, std::string>> edges() const;
  const std::set<std::string>& successors(const std::string& page) const;
  const std::set<std::string>& predecessors(const std::string& page) const;
  bool empty() const { return nodes_.empty(); }

  /// Breadth-first shortest path including both endpoints; ties resolve to
  /// the lexicographically smallest successor. nullopt when unreachable.
  std::optional<std::vector<std::string>> shortest_path(const std::string& from,
                                                        const std::string& to) const;

 private:
  std::set<std::string> nodes_;
  std::set<std::string> entry_pages_;
  std::map<std::string, std::set<std::string>> out_;
  std::map<std::string, std::set<std::string>> in_;
};

/// Edge list: one "from<TAB>to" pair per line, loaded verbatim. Blank lines
/// are ignored; anything else throws Error(MalformedEdgeLine).
SiteGraph load_site_graph(std::istream& in);
SiteGraph load_site_graph_file(const std::string& path);

/// Adds referrer->page edges for on-site referrers and marks pages reached
/// with no or an off-site referrer as entry pages. A referrer is on-site when
/// it is a bare path, when its host is in `site_hosts`, or (site_hosts empty)
/// when its path is a page some record requested.
SiteGraph derive_site_graph(std::span<const LogRecord> records,
                            const std::vector<std::string>& site_hosts = {});

enum class IdentityMode { Basic, Topology };

std::string_view to_string(IdentityMode mode);

struct UserAssignment {
  std::uint64_t user_id = 0;
  std::string ip;
  AgentSignature signature;
  std::vector<RecordKey> record_refs;
  // Positions in the identify_users input, parallel to record_refs.
  std::vector<std::size_t> record_indices;
};

/// Records must be cleaned and in record_key order. BASIC yields one user per
/// distinct (ip, signature); TOPOLOGY splits each such group further by the
/// link graph. Users are numbered from 1 by first appearance. Throws
/// Error(MissingGraph) for TOPOLOGY without a graph.
std::vector<UserAssignment> identify_users(std::span<const LogRecord> records, IdentityMode mode,
                                           const SiteGraph* graph = nullptr);

}  // namespace logprep
