#pragma once

// Manifest parsing (three adapters), resolution against a local registry
// snapshot, lineage paths and cycle detection. Resolution picks the highest
// version satisfying each declared range; one node per name@version, so
// diamonds converge.

#include <algorithm>
#include <deque>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "sgp/common.hpp"
#include "sgp/semver.hpp"

namespace sgp {

struct Dependency {
  std::string name;
  VersionRange range;
};

struct Manifest {
  std::string ecosystem;
  std::string name;
  Version version;
  std::vector<Dependency> dependencies;
  std::string adapter;  // which input format was recognized
};

namespace detail {

inline void check_unique_deps(const Manifest& m) {
  std::set<std::string> seen;
  for (const Dependency& d : m.dependencies) {
    if (!seen.insert(d.name).second) {
      throw error("MalformedRange", "duplicate dependency '" + d.name + "' in manifest");
    }
  }
}

inline std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

}  // namespace detail

/// Parses one of: the canonical manifest JSON, a package.json-style object
/// with a "dependencies" mapping, or requirements-style text
/// ("name==1.2.0", "name>=1.0,<2.0", one per line, # comments).
inline Manifest parse_manifest(std::string_view bytes, std::string_view ecosystem_hint = {}) {
  nlohmann::json j = nlohmann::json::parse(bytes, nullptr, false);
  if (!j.is_discarded() && j.is_object()) {
    Manifest m;
    if (j.contains("ecosystem") && j.contains("name") && j.contains("version") &&
        j.contains("dependencies") && j["dependencies"].is_array()) {
      m.adapter = "canonical";
      m.ecosystem = j["ecosystem"].get<std::string>();
      m.name = j["name"].get<std::string>();
      m.version = Version::parse(j["version"].get<std::string>());
      for (const auto& dep : j["dependencies"]) {
        m.dependencies.push_back({dep.at("name").get<std::string>(),
                                  VersionRange::parse(dep.at("range").get<std::string>())});
      }
      detail::check_unique_deps(m);
      return m;
    }
    if (j.contains("dependencies") && j["dependencies"].is_object()) {
      m.adapter = "package_json";
      m.ecosystem = ecosystem_hint.empty() ? "npm" : std::string(ecosystem_hint);
      m.name = j.value("name", "root");
      m.version = Version::try_parse(j.value("version", "0.0.0")).value_or(Version{});
      for (const auto& [name, range] : j["dependencies"].items()) {
        m.dependencies.push_back({name, VersionRange::parse(range.get<std::string>())});
      }
      detail::check_unique_deps(m);
      return m;
    }
    throw error("UnknownFormat", "JSON input is neither a canonical manifest nor package.json-style");
  }

  // Requirements-style text: every non-empty, non-comment line must parse.
  Manifest m;
  m.adapter = "requirements";
  m.ecosystem = ecosystem_hint.empty() ? "pypi" : std::string(ecosystem_hint);
  m.name = "root";
  bool any_line = false;
  std::size_t start = 0;
  while (start <= bytes.size()) {
    std::size_t nl = bytes.find('\n', start);
    std::string line = detail::trim(bytes.substr(
        start, nl == std::string_view::npos ? bytes.size() - start : nl - start));
    start = nl == std::string_view::npos ? bytes.size() + 1 : nl + 1;
    if (line.empty() || line[0] == '#') continue;
    any_line = true;

    std::size_t op = line.find_first_of("<>=~^!");
    if (op == std::string::npos || op == 0) {
      throw error("UnknownFormat", "line '" + line + "' is not a requirement");
    }
    const std::string name = detail::trim(std::string_view(line).substr(0, op));
    std::string spec = detail::trim(std::string_view(line).substr(op));
    // Comma-separated comparators conjoin.
    for (char& c : spec) {
      if (c == ',') c = ' ';
    }
    m.dependencies.push_back({name, VersionRange::parse(spec)});
  }
  if (!any_line) throw error("UnknownFormat", "input has no parseable dependency lines");
  detail::check_unique_deps(m);
  return m;
}

// ---------------------------------------------------------------------------
// Registry snapshot

struct RegistryEntry {
  Version version;
  std::vector<Dependency> dependencies;
};

struct RegistrySnapshot {
  std::map<std::string, std::vector<RegistryEntry>> packages;

  /// {name: [{version, dependencies: [{name, range}]}]}
  static RegistrySnapshot from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw error("MalformedRegistry", "registry snapshot must be an object");
    RegistrySnapshot snap;
    for (const auto& [name, entries] : j.items()) {
      for (const auto& e : entries) {
        RegistryEntry entry;
        entry.version = Version::parse(e.at("version").get<std::string>());
        if (e.contains("dependencies")) {
          for (const auto& dep : e["dependencies"]) {
            entry.dependencies.push_back({dep.at("name").get<std::string>(),
                                          VersionRange::parse(dep.at("range").get<std::string>())});
          }
        }
        snap.packages[name].push_back(std::move(entry));
      }
      std::sort(snap.packages[name].begin(), snap.packages[name].end(),
                [](const RegistryEntry& a, const RegistryEntry& b) {
                  return compare(a.version, b.version) < 0;
                });
    }
    return snap;
  }
};

// ---------------------------------------------------------------------------
// Dependency graph

struct DepEdge {
  std::string from;        // node id "name@version"
  std::string to;
  std::string range_text;  // the declared range

  bool operator<(const DepEdge& o) const {
    return std::tie(from, to, range_text) < std::tie(o.from, o.to, o.range_text);
  }
  bool operator==(const DepEdge&) const = default;
};

struct DependencyGraph {
  std::string ecosystem;
  std::string root;                // node id of the root package
  std::vector<std::string> nodes;  // sorted node ids
  std::vector<DepEdge> edges;      // sorted

  bool operator==(const DependencyGraph&) const = default;
};

inline std::string node_id(const std::string& name, const Version& v) {
  return name + "@" + v.str();
}

inline std::pair<std::string, Version> split_node_id(const std::string& id) {
  const std::size_t at = id.rfind('@');
  if (at == std::string::npos) {
    throw error("MalformedNode", "node id '" + id + "' lacks a version");
  }
  return {id.substr(0, at), Version::parse(id.substr(at + 1))};
}

/// Edges between package names (versions stripped), for gene clustering.
inline std::vector<std::pair<std::string, std::string>> package_edges(const DependencyGraph& g) {
  std::vector<std::pair<std::string, std::string>> out;
  for (const DepEdge& e : g.edges) {
    out.emplace_back(split_node_id(e.from).first, split_node_id(e.to).first);
  }
  return out;
}

struct ResolveError {
  std::string name;
  std::string range_text;
  std::vector<std::string> available;  // versions present in the registry
  std::string message;
};

struct ResolveResult {
  DependencyGraph graph;
  std::optional<ResolveError> error;
};

/// Breadth-first resolution. Every (name, range) picks the highest registry
/// version satisfying the range; nodes are shared per name@version. On an
/// unsatisfiable range resolution aborts and the partial graph is returned
/// together with the error.
inline ResolveResult resolve(const Manifest& root, const RegistrySnapshot& registry) {
  ResolveResult result;
  DependencyGraph& g = result.graph;
  g.ecosystem = root.ecosystem;
  g.root = node_id(root.name, root.version);

  std::set<std::string> node_set{g.root};
  std::set<DepEdge> edge_set;

  struct WorkItem {
    std::string from_id;
    Dependency dep;
  };
  std::deque<WorkItem> queue;
  for (const Dependency& d : root.dependencies) queue.push_back({g.root, d});

  std::set<std::string> expanded{g.root};
  while (!queue.empty()) {
    WorkItem item = std::move(queue.front());
    queue.pop_front();

    auto pkg = registry.packages.find(item.dep.name);
    const RegistryEntry* chosen = nullptr;
    if (pkg != registry.packages.end()) {
      for (const RegistryEntry& entry : pkg->second) {  // ascending: last hit is highest
        if (range_contains(item.dep.range, entry.version)) chosen = &entry;
      }
    }
    if (chosen == nullptr) {
      ResolveError err;
      err.name = item.dep.name;
      err.range_text = item.dep.range.text;
      if (pkg != registry.packages.end()) {
        for (const RegistryEntry& entry : pkg->second) err.available.push_back(entry.version.str());
      }
      err.message = "no version of '" + item.dep.name + "' satisfies '" + item.dep.range.text + "'";
      result.error = std::move(err);
      break;
    }

    const std::string id = node_id(item.dep.name, chosen->version);
    node_set.insert(id);
    edge_set.insert({item.from_id, id, item.dep.range.text});
    if (expanded.insert(id).second) {
      for (const Dependency& d : chosen->dependencies) queue.push_back({id, d});
    }
  }

  g.nodes.assign(node_set.begin(), node_set.end());
  g.edges.assign(edge_set.begin(), edge_set.end());
  return result;
}

// ---------------------------------------------------------------------------
// Lineage and cycles

struct LineageStep {
  std::string node;        // node id entered by this step
  std::string range_text;  // the edge range that led here

  bool operator==(const LineageStep&) const = default;
};

/// All simple paths from the root to `node`, lexicographic by node
/// sequence. The root itself yields one empty path; unreachable nodes
/// (possible after partial resolution) yield none.
inline std::vector<std::vector<LineageStep>> lineage_paths(const DependencyGraph& g,
                                                           const std::string& node) {
  if (std::find(g.nodes.begin(), g.nodes.end(), node) == g.nodes.end()) {
    throw error("NodeNotFound", "node '" + node + "' is not in the graph");
  }
  std::map<std::string, std::vector<const DepEdge*>> adj;
  for (const DepEdge& e : g.edges) adj[e.from].push_back(&e);  // edges pre-sorted

  std::vector<std::vector<LineageStep>> paths;
  std::vector<LineageStep> current;
  std::set<std::string> on_path{g.root};

  auto dfs = [&](auto&& self, const std::string& at) -> void {
    if (at == node) paths.push_back(current);
    auto it = adj.find(at);
    if (it == adj.end()) return;
    for (const DepEdge* e : it->second) {
      if (on_path.count(e->to)) continue;
      on_path.insert(e->to);
      current.push_back({e->to, e->range_text});
      self(self, e->to);
      current.pop_back();
      on_path.erase(e->to);
    }
  };
  dfs(dfs, g.root);
  return paths;
}

/// Elementary cycles, each reported once in canonical rotation (smallest
/// node id first), sorted.
inline std::vector<std::vector<std::string>> detect_cycles(const DependencyGraph& g) {
  std::map<std::string, std::vector<std::string>> adj;
  for (const DepEdge& e : g.edges) adj[e.from].push_back(e.to);
  for (auto& [_, outs] : adj) std::sort(outs.begin(), outs.end());

  std::vector<std::vector<std::string>> cycles;
  std::vector<std::string> path;
  std::set<std::string> on_path;

  // Enumerate cycles whose smallest node is `start`; larger-id nodes only,
  // so each elementary cycle appears exactly once, already canonically
  // rotated.
  auto dfs = [&](auto&& self, const std::string& start, const std::string& at) -> void {
    auto it = adj.find(at);
    if (it == adj.end()) return;
    for (const std::string& next : it->second) {
      if (next == start) {
        cycles.push_back(path);
        continue;
      }
      if (next < start || on_path.count(next)) continue;
      on_path.insert(next);
      path.push_back(next);
      self(self, start, next);
      path.pop_back();
      on_path.erase(next);
    }
  };
  for (const std::string& start : g.nodes) {
    path = {start};
    on_path = {start};
    dfs(dfs, start, start);
  }
  std::sort(cycles.begin(), cycles.end());
  return cycles;
}

}  // namespace sgp
