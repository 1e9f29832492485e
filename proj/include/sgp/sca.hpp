#pragma once

// The four-perspective composition scan: component identification from
// exact gene matches, clone detection against the pool, dependency
// resolution + lineage when a manifest is present, and intelligence
// matching, all folded into one deterministic report.

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "sgp/advisory.hpp"
#include "sgp/clone.hpp"
#include "sgp/config.hpp"
#include "sgp/corpus.hpp"
#include "sgp/depgraph.hpp"
#include "sgp/genepool.hpp"

namespace sgp {

struct MatchedGene {
  std::uint64_t fingerprint = 0;
  std::uint64_t target_function_id = 0;
};

struct ComponentMatch {
  std::string component;
  std::optional<Version> version;
  double likelihood = 0.0;
  std::vector<MatchedGene> matched_genes;  // sorted by fingerprint
};

namespace detail {

inline double value_ratio(double matched_value, double total_value, std::size_t matched_count,
                          std::size_t total_count) {
  if (total_value > 0.0) return matched_value / total_value;
  // All gene values floored to zero: fall back to the count ratio so a
  // fully-embedded component still scores 1.
  if (total_count == 0) return 0.0;
  return static_cast<double>(matched_count) / static_cast<double>(total_count);
}

}  // namespace detail

/// Value-weighted component identification. Target functions are
/// fingerprinted; a component's likelihood is the value share of its genes
/// found in the target. When the pool attributes genes to name@version
/// repos, the reported version is the one whose gene set scores highest
/// (ties to the highest version).
inline std::vector<ComponentMatch> component_analysis(const Corpus& target, const GenePool& pool,
                                                      double theta_comp) {
  std::map<std::uint64_t, std::uint64_t> target_fps;  // fingerprint -> lowest function id
  for (const FunctionRecord& r : target.records) {
    const std::uint64_t fp = fingerprint(r);
    auto it = target_fps.find(fp);
    if (it == target_fps.end() || r.function_id < it->second) target_fps[fp] = r.function_id;
  }

  struct VersionSet {
    double total_value = 0.0;
    double matched_value = 0.0;
    std::size_t total_count = 0;
    std::size_t matched_count = 0;
  };
  struct ComponentData {
    VersionSet overall;
    std::map<std::string, VersionSet> by_version;
    std::set<std::uint64_t> matched_fps;
  };
  std::map<std::string, ComponentData> components;

  for (const Gene& gene : pool.genes) {
    const double value = std::max(gene.value, 0.0);
    const bool matched = target_fps.count(gene.fingerprint) > 0;
    auto bump = [&](VersionSet& vs) {
      vs.total_value += value;
      ++vs.total_count;
      if (matched) {
        vs.matched_value += value;
        ++vs.matched_count;
      }
    };

    // A gene counts once per component and once per attributed version.
    std::map<std::string, std::set<std::string>> attribution;  // component -> versions
    for (const std::string& repo : gene.repos) {
      const std::size_t at = repo.find('@');
      const std::string component = repo.substr(0, at == std::string::npos ? repo.size() : at);
      auto& versions = attribution[component];
      if (at != std::string::npos) versions.insert(repo.substr(at + 1));
    }
    for (const auto& [component, versions] : attribution) {
      ComponentData& data = components[component];
      bump(data.overall);
      for (const std::string& v : versions) bump(data.by_version[v]);
      if (matched) data.matched_fps.insert(gene.fingerprint);
    }
  }

  std::vector<ComponentMatch> out;
  for (const auto& [name, data] : components) {
    ComponentMatch match;
    match.component = name;
    match.likelihood = detail::value_ratio(data.overall.matched_value, data.overall.total_value,
                                           data.overall.matched_count, data.overall.total_count);
    if (match.likelihood < theta_comp || data.matched_fps.empty()) continue;

    // Version pick: highest-likelihood version set, ties to the highest
    // version. Only meaningful when repos carried versions.
    std::optional<Version> best_version;
    double best_score = -1.0;
    for (const auto& [vtext, vs] : data.by_version) {
      if (vtext.empty()) continue;
      const double score =
          detail::value_ratio(vs.matched_value, vs.total_value, vs.matched_count, vs.total_count);
      auto parsed = Version::try_parse(vtext);
      if (!parsed) continue;
      if (score > best_score ||
          (score == best_score && best_version && compare(*parsed, *best_version) > 0)) {
        best_score = score;
        best_version = parsed;
      }
    }
    if (best_version && best_score > 0.0) match.version = best_version;

    for (std::uint64_t fp : data.matched_fps) {
      match.matched_genes.push_back({fp, target_fps.at(fp)});
    }
    out.push_back(std::move(match));
  }
  std::sort(out.begin(), out.end(), [](const ComponentMatch& a, const ComponentMatch& b) {
    if (a.likelihood != b.likelihood) return a.likelihood > b.likelihood;
    return a.component < b.component;
  });
  return out;
}

// ---------------------------------------------------------------------------
// Report

struct ScaReport {
  std::string target;
  std::string timestamp;
  GlobalConfig config;
  std::vector<std::string> notices;
  std::vector<ComponentMatch> components;
  std::vector<ClonePair> clones;
  std::optional<DependencyGraph> dependency_graph;
  std::vector<Finding> findings;
  Portrait portrait;

  bool has_findings() const { return !findings.empty(); }
};

namespace detail {

inline nlohmann::ordered_json clone_to_json(const ClonePair& p) {
  auto prov = [](const Provenance& pr) {
    nlohmann::ordered_json j;
    j["repo_id"] = pr.repo_id;
    j["file_path"] = pr.file_path;
    j["start_line"] = pr.start_line;
    j["end_line"] = pr.end_line;
    return j;
  };
  nlohmann::ordered_json j;
  j["a"] = to_hex16(p.a);
  j["b"] = to_hex16(p.b);
  j["shared_windows"] = p.shared_windows;
  j["token_sim"] = p.token_sim;
  j["tree_sim"] = p.tree_sim;
  j["combined"] = p.combined;
  j["verdict"] = p.verdict;
  j["category"] = std::string(to_string(p.category));
  j["a_provenance"] = prov(p.prov_a);
  j["b_provenance"] = prov(p.prov_b);
  j["pool_fingerprint"] = to_hex16(p.pool_fingerprint);
  j["target_function_id"] = to_hex16(p.target_function_id);
  return j;
}

inline nlohmann::ordered_json graph_to_json(const DependencyGraph& g) {
  nlohmann::ordered_json j;
  j["ecosystem"] = g.ecosystem;
  j["root"] = g.root;
  j["nodes"] = g.nodes;
  nlohmann::ordered_json edges = nlohmann::ordered_json::array();
  for (const DepEdge& e : g.edges) {
    nlohmann::ordered_json ej;
    ej["from"] = e.from;
    ej["to"] = e.to;
    ej["range"] = e.range_text;
    edges.push_back(std::move(ej));
  }
  j["edges"] = std::move(edges);
  return j;
}

inline nlohmann::ordered_json finding_to_json(const Finding& f) {
  nlohmann::ordered_json j;
  j["advisory_id"] = f.advisory_id;
  nlohmann::ordered_json via;
  if (f.matched_via == MatchVia::PackageRange) {
    via["type"] = "package_range";
    via["node"] = f.node;
  } else {
    via["type"] = "gene_fingerprint";
    via["function_id"] = to_hex16(f.function_id);
  }
  j["matched_via"] = std::move(via);
  j["dimension"] = std::string(to_string(f.dimension));
  j["severity"] = f.severity;
  return j;
}

}  // namespace detail

inline nlohmann::ordered_json report_to_json(const ScaReport& r) {
  nlohmann::ordered_json j;
  nlohmann::ordered_json meta;
  meta["target"] = r.target;
  meta["timestamp"] = r.timestamp;
  meta["config"] = r.config.to_json();
  meta["notices"] = r.notices;
  j["meta"] = std::move(meta);

  nlohmann::ordered_json comps = nlohmann::ordered_json::array();
  for (const ComponentMatch& c : r.components) {
    nlohmann::ordered_json cj;
    cj["component"] = c.component;
    if (c.version) cj["version"] = c.version->str();
    cj["likelihood"] = c.likelihood;
    nlohmann::ordered_json genes = nlohmann::ordered_json::array();
    for (const MatchedGene& g : c.matched_genes) {
      nlohmann::ordered_json gj;
      gj["fingerprint"] = to_hex16(g.fingerprint);
      gj["function_id"] = to_hex16(g.target_function_id);
      genes.push_back(std::move(gj));
    }
    cj["matched_genes"] = std::move(genes);
    comps.push_back(std::move(cj));
  }
  j["components"] = std::move(comps);

  nlohmann::ordered_json clones = nlohmann::ordered_json::array();
  for (const ClonePair& p : r.clones) clones.push_back(detail::clone_to_json(p));
  j["clones"] = std::move(clones);

  if (r.dependency_graph) j["dependency_graph"] = detail::graph_to_json(*r.dependency_graph);

  nlohmann::ordered_json findings = nlohmann::ordered_json::array();
  for (const Finding& f : r.findings) findings.push_back(detail::finding_to_json(f));
  j["findings"] = std::move(findings);

  nlohmann::ordered_json portrait;
  portrait["total"] = r.portrait.total;
  nlohmann::ordered_json dims;
  for (const auto& [_, name] : dimension_names()) dims[name] = r.portrait.dimensions.at(name);
  portrait["dimensions"] = std::move(dims);
  j["portrait"] = std::move(portrait);
  return j;
}

/// Runs the full scan over already-loaded inputs. Stages compose exactly
/// the standalone operations; a missing manifest skips dependency analysis
/// with a notice. The timestamp is injectable so reports stay comparable.
inline ScaReport scan(const Corpus& target, const std::string& target_id, const GenePool& pool,
                      const AdvisoryDb& db, const std::optional<Manifest>& manifest,
                      const std::optional<RegistrySnapshot>& registry, const GlobalConfig& config,
                      std::string timestamp = {}) {
  config.validate();
  ScaReport report;
  report.target = target_id;
  report.timestamp = std::move(timestamp);
  report.config = config;

  report.components = component_analysis(target, pool, config.theta_component);

  CloneConfig clone_cfg = config.clone;
  clone_cfg.n_lines = pool.n_lines;  // the index dictates N
  if (config.clone.n_lines != pool.n_lines) {
    report.notices.push_back("clone n_lines overridden by index (N=" +
                             std::to_string(pool.n_lines) + ")");
  }
  report.clones = detect_clones(target.records, pool, pool.windows, clone_cfg, config.jobs);

  if (manifest) {
    if (!registry) {
      report.notices.push_back("manifest given without a registry snapshot; dependency analysis skipped");
    } else {
      ResolveResult resolved = resolve(*manifest, *registry);
      report.dependency_graph = resolved.graph;
      if (resolved.error) {
        report.notices.push_back("dependency resolution incomplete: " + resolved.error->message);
      }
      for (Finding& f : match_dependencies(resolved.graph, db)) {
        report.findings.push_back(std::move(f));
      }
    }
  } else {
    report.notices.push_back("no manifest given; dependency analysis skipped");
  }

  for (Finding& f : match_genes(report.clones, db)) report.findings.push_back(std::move(f));
  report.portrait = portrait_score(report.findings, config.portrait);
  return report;
}

}  // namespace sgp
