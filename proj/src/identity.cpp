#include "logprep/identity.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <deque>
#include <fstream>
#include <numeric>
#include <unordered_map>

#include "logprep/error.hpp"

namespace logprep {

// ---------------------------------------------------------------------------
// Agent signatures

namespace {

struct ProductRule {
  std::string_view family;
  std::array<std::string_view, 2> markers;  // token text including its separator
};

constexpr std::array<ProductRule, 6> kProductRules{{
    {"Edge", {"Edge/", "Edg/"}},
    {"Chrome", {"Chrome/", ""}},
    {"Firefox", {"Firefox/", ""}},
    {"Safari", {"Safari/", ""}},
    {"MSIE", {"MSIE ", "Trident/"}},
    {"Opera", {"Opera/", "OPR/"}},
}};

bool token_boundary(char c) { return c == ' ' || c == '(' || c == ';' || c == ','; }

// Position just past `marker` at a token boundary, or npos.
std::size_t find_marker(std::string_view text, std::string_view marker) {
  for (std::size_t pos = text.find(marker); pos != std::string_view::npos; pos = text.find(marker, pos + 1)) {
    if (pos == 0 || token_boundary(text[pos - 1])) return pos + marker.size();
  }
  return std::string_view::npos;
}

std::optional<int> leading_digits(std::string_view s) {
  int v = 0;
  std::size_t n = 0;
  while (n < s.size() && n < 9 && std::isdigit(static_cast<unsigned char>(s[n]))) {
    v = v * 10 + (s[n] - '0');
    ++n;
  }
  if (n == 0) return std::nullopt;
  return v;
}

std::string platform_text(std::string_view text) {
  std::string out;
  int depth = 0;
  for (char c : text) {
    if (c == '(') {
      ++depth;
      out.push_back(' ');
    } else if (c == ')') {
      depth = std::max(0, depth - 1);
      out.push_back(' ');
    } else if (depth > 0) {
      out.push_back(c);
    }
  }
  return out;
}

std::string os_family(std::string_view agent) {
  const std::string p = platform_text(agent);
  auto has = [&](std::string_view s) { return p.find(s) != std::string::npos; };
  if (has("Windows")) return "Windows";
  if (has("Android")) return "Android";
  if (has("iPhone") || has("iPad") || has("iPod") || has("iOS")) return "iOS";
  if (has("Macintosh") || has("Mac OS")) return "Mac";
  if (has("Linux") || has("X11") || has("Ubuntu")) return "Linux";
  return "unknown";
}

}  // namespace

AgentSignature agent_signature(const std::optional<std::string>& user_agent) {
  AgentSignature sig;
  if (!user_agent) return sig;
  std::string text = *user_agent;
  std::replace(text.begin(), text.end(), '+', ' ');
  const auto first = text.find_first_not_of(' ');
  if (first == std::string::npos) return sig;

  bool matched = false;
  for (const auto& rule : kProductRules) {
    for (auto marker : rule.markers) {
      if (marker.empty()) continue;
      const auto after = find_marker(text, marker);
      if (after == std::string_view::npos) continue;
      sig.browser_family = std::string(rule.family);
      sig.browser_major = leading_digits(std::string_view(text).substr(after));
      matched = true;
      break;
    }
    if (matched) break;
  }
  if (!matched) {
    std::string_view head = std::string_view(text).substr(first);
    head = head.substr(0, head.find_first_of(" ("));
    if (!head.empty()) {
      const auto slash = head.find('/');
      sig.browser_family = std::string(head.substr(0, slash));
      if (slash != std::string_view::npos) sig.browser_major = leading_digits(head.substr(slash + 1));
      if (sig.browser_family.empty()) sig.browser_family = "unknown";
    }
  }
  sig.os_family = os_family(text);
  return sig;
}

// ---------------------------------------------------------------------------
// Site graph

std::string canonical_page(std::string_view uri) {
  if (const auto scheme = uri.find("://"); scheme != std::string_view::npos) {
    const auto first_sep = uri.find_first_of("/?#");
    if (first_sep == std::string_view::npos || first_sep > scheme) {
      const auto path = uri.find('/', scheme + 3);
      uri = path == std::string_view::npos ? std::string_view{} : uri.substr(path);
    }
  }
  if (const auto cut = uri.find_first_of("?#"); cut != std::string_view::npos) uri = uri.substr(0, cut);
  std::string out(uri);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (out.empty()) out = "/";
  return out;
}

void SiteGraph::add_node(const std::string& page) { nodes_.insert(page); }

void SiteGraph::add_edge(const std::string& from, const std::string& to) {
  nodes_.insert(from);
  nodes_.insert(to);
  out_[from].insert(to);
  in_[to].insert(from);
}

void SiteGraph::add_entry_page(const std::string& page) {
  nodes_.insert(page);
  entry_pages_.insert(page);
}

bool SiteGraph::has_edge(const std::string& from, const std::string& to) const {
  auto it = out_.find(from);
  return it != out_.end() && it->second.contains(to);
}

std::set<std::pair<std::string, std::string>> SiteGraph::edges() const {
  std::set<std::pair<std::string, std::string>> out;
  for (const auto& [from, tos] : out_) {
    for (const auto& to : tos) out.emplace(from, to);
  }
  return out;
}

const std::set<std::string>& SiteGraph::successors(const std::string& page) const {
  static const std::set<std::string> none;
  auto it = out_.find(page);
  return it == out_.end() ? none : it->second;
}

const std::set<std::string>& SiteGraph::predecessors(const std::string& page) const {
  static const std::set<std::string> none;
  auto it = in_.find(page);
  return it == in_.end() ? none : it->second;
}

std::optional<std::vector<std::string>> SiteGraph::shortest_path(const std::string& from,
                                                                 const std::string& to) const {
  if (!has_node(from) || !has_node(to)) return std::nullopt;
  if (from == to) return std::vector<std::string>{from};
  std::map<std::string, std::string> parent;
  std::deque<std::string> queue{from};
  parent.emplace(from, std::string{});
  while (!queue.empty()) {
    const std::string cur = queue.front();
    queue.pop_front();
    for (const auto& next : successors(cur)) {
      if (parent.contains(next)) continue;
      parent.emplace(next, cur);
      if (next == to) {
        std::vector<std::string> path{to};
        for (std::string p = cur; p != from; p = parent.at(p)) path.push_back(p);
        path.push_back(from);
        std::reverse(path.begin(), path.end());
        return path;
      }
      queue.push_back(next);
    }
  }
  return std::nullopt;
}

SiteGraph load_site_graph(std::istream& in) {
  SiteGraph g;
  std::string line;
  std::uint64_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos || tab == 0 || tab + 1 == line.size() ||
        line.find('\t', tab + 1) != std::string::npos) {
      throw Error(ErrorCode::MalformedEdgeLine, "line " + std::to_string(line_no) + ": \"" + line + "\"");
    }
    g.add_edge(line.substr(0, tab), line.substr(tab + 1));
  }
  if (in.bad()) throw Error(ErrorCode::Io, "read failure in edge list");
  return g;
}

SiteGraph load_site_graph_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open edge list " + path);
  try {
    return load_site_graph(in);
  } catch (const Error& e) {
    throw Error(e.code(), path + ": " + e.what());
  }
}

namespace {

std::string host_of(std::string_view url) {
  const auto scheme = url.find("://");
  if (scheme == std::string_view::npos) return {};
  std::string_view rest = url.substr(scheme + 3);
  rest = rest.substr(0, rest.find_first_of("/?#"));
  rest = rest.substr(0, rest.find(':'));
  std::string host(rest);
  std::transform(host.begin(), host.end(), host.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return host;
}

}  // namespace

SiteGraph derive_site_graph(std::span<const LogRecord> records, const std::vector<std::string>& site_hosts) {
  SiteGraph g;
  std::set<std::string> requested;
  for (const auto& r : records) requested.insert(canonical_page(r.uri));
  std::set<std::string> hosts;
  for (const auto& h : site_hosts) hosts.insert(host_of("http://" + h));

  for (const auto& r : records) {
    const std::string page = canonical_page(r.uri);
    g.add_node(page);
    if (!r.referrer) {
      g.add_entry_page(page);
      continue;
    }
    const std::string& ref = *r.referrer;
    bool on_site;
    if (ref.starts_with('/')) {
      on_site = true;
    } else if (!hosts.empty()) {
      on_site = hosts.contains(host_of(ref));
    } else {
      on_site = ref.find("://") != std::string::npos && requested.contains(canonical_page(ref));
    }
    if (on_site) {
      g.add_edge(canonical_page(ref), page);
    } else {
      g.add_entry_page(page);
    }
  }
  return g;
}

// ---------------------------------------------------------------------------
// User identification

std::string_view to_string(IdentityMode mode) {
  return mode == IdentityMode::Basic ? "basic" : "topology";
}

namespace {

struct GroupKey {
  std::string ip;
  AgentSignature signature;
  auto operator<=>(const GroupKey&) const = default;
};

struct Candidate {
  std::set<std::string> visited;
  std::vector<std::size_t> members;  // input positions
};

bool accepts(const Candidate& c, const std::string& page, const SiteGraph& graph) {
  if (c.visited.empty()) return graph.is_entry_page(page);
  if (c.visited.contains(page)) return true;
  for (const auto& pred : graph.predecessors(page)) {
    if (c.visited.contains(pred)) return true;
  }
  return false;
}

}  // namespace

std::vector<UserAssignment> identify_users(std::span<const LogRecord> records, IdentityMode mode,
                                           const SiteGraph* graph) {
  if (mode == IdentityMode::Topology && graph == nullptr) {
    throw Error(ErrorCode::MissingGraph, "topology identification needs a site graph");
  }

  std::unordered_map<std::string, AgentSignature> signature_cache;
  auto signature_of = [&](const LogRecord& r) -> const AgentSignature& {
    const std::string key = r.user_agent ? "+" + *r.user_agent : std::string{};
    auto it = signature_cache.find(key);
    if (it == signature_cache.end()) it = signature_cache.emplace(key, agent_signature(r.user_agent)).first;
    return it->second;
  };

  // (ip, signature) groups in first-appearance order.
  std::map<GroupKey, std::size_t> group_index;
  std::vector<GroupKey> group_keys;
  std::vector<std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < records.size(); ++i) {
    GroupKey key{records[i].ip, signature_of(records[i])};
    auto [it, inserted] = group_index.try_emplace(key, groups.size());
    if (inserted) {
      group_keys.push_back(key);
      groups.emplace_back();
    }
    groups[it->second].push_back(i);
  }

  struct Partition {
    std::size_t group;
    std::vector<std::size_t> members;
  };
  std::vector<Partition> parts;

  if (mode == IdentityMode::Basic) {
    for (std::size_t g = 0; g < groups.size(); ++g) parts.push_back({g, groups[g]});
  } else {
    for (std::size_t g = 0; g < groups.size(); ++g) {
      std::vector<std::size_t> order = groups[g];
      std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return records[a].timestamp.utc < records[b].timestamp.utc;
      });
      std::vector<Candidate> candidates;
      for (std::size_t idx : order) {
        const std::string page = canonical_page(records[idx].uri);
        auto it = std::find_if(candidates.begin(), candidates.end(),
                               [&](const Candidate& c) { return accepts(c, page, *graph); });
        if (it == candidates.end()) {
          candidates.emplace_back();
          it = std::prev(candidates.end());
        }
        it->visited.insert(page);
        it->members.push_back(idx);
      }
      for (auto& c : candidates) {
        std::sort(c.members.begin(), c.members.end());
        parts.push_back({g, std::move(c.members)});
      }
    }
    std::sort(parts.begin(), parts.end(),
              [](const Partition& a, const Partition& b) { return a.members.front() < b.members.front(); });
  }

  std::vector<UserAssignment> users;
  users.reserve(parts.size());
  for (auto& p : parts) {
    UserAssignment u;
    u.user_id = users.size() + 1;
    u.ip = group_keys[p.group].ip;
    u.signature = group_keys[p.group].signature;
    u.record_indices = std::move(p.members);
    for (std::size_t idx : u.record_indices) u.record_refs.push_back(record_key(records[idx]));
    users.push_back(std::move(u));
  }
  return users;
}

}  // namespace logprep
