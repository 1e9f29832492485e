#pragma once

// The intelligence genome: advisory records (vulnerability, malicious,
// three sensitive subtypes), matched against resolved dependencies by
// package/range and against detected clones by gene fingerprint, then
// aggregated into the weighted portrait score.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "sgp/clone.hpp"
#include "sgp/common.hpp"
#include "sgp/depgraph.hpp"
#include "sgp/semver.hpp"

namespace sgp {

enum class AdvisoryKind {
  Vulnerability,
  Malicious,
  SensitiveUser,
  SensitiveBehaviour,
  SensitivePolitics,
};

inline std::string_view to_string(AdvisoryKind k) {
  switch (k) {
    case AdvisoryKind::Vulnerability: return "vulnerability";
    case AdvisoryKind::Malicious: return "malicious";
    case AdvisoryKind::SensitiveUser: return "sensitive_user";
    case AdvisoryKind::SensitiveBehaviour: return "sensitive_behaviour";
    case AdvisoryKind::SensitivePolitics: return "sensitive_politics";
  }
  return "vulnerability";
}

inline AdvisoryKind advisory_kind_from(std::string_view name) {
  if (name == "vulnerability") return AdvisoryKind::Vulnerability;
  if (name == "malicious") return AdvisoryKind::Malicious;
  if (name == "sensitive_user") return AdvisoryKind::SensitiveUser;
  if (name == "sensitive_behaviour") return AdvisoryKind::SensitiveBehaviour;
  if (name == "sensitive_politics") return AdvisoryKind::SensitivePolitics;
  throw error("MalformedAdvisory", "unknown advisory kind '" + std::string(name) + "'");
}

enum class Dimension { Security, Quality, OssComposition, Maintainability, BusinessRisk };

inline const std::vector<std::pair<Dimension, std::string>>& dimension_names() {
  static const std::vector<std::pair<Dimension, std::string>> names = {
      {Dimension::Security, "security"},
      {Dimension::Quality, "quality"},
      {Dimension::OssComposition, "oss_composition"},
      {Dimension::Maintainability, "maintainability"},
      {Dimension::BusinessRisk, "business_risk"},
  };
  return names;
}

inline std::string_view to_string(Dimension d) {
  for (const auto& [dim, name] : dimension_names()) {
    if (dim == d) return name;
  }
  return "security";
}

inline Dimension dimension_from(std::string_view name) {
  for (const auto& [dim, dname] : dimension_names()) {
    if (dname == name) return dim;
  }
  throw error("MalformedAdvisory", "unknown dimension '" + std::string(name) + "'");
}

/// Vulnerability and malicious records land in the security dimension,
/// sensitive ones in business_risk; a record may override its dimension.
inline Dimension default_dimension(AdvisoryKind k) {
  switch (k) {
    case AdvisoryKind::Vulnerability:
    case AdvisoryKind::Malicious:
      return Dimension::Security;
    default:
      return Dimension::BusinessRisk;
  }
}

struct Advisory {
  std::string id;
  AdvisoryKind kind = AdvisoryKind::Vulnerability;
  std::string ecosystem;  // "*" matches any
  std::string package;
  std::vector<VersionRange> affected;
  double severity = 0.0;  // [0, 10]
  std::string description;
  std::string family;
  std::string origin;
  std::string timestamp;  // ISO-8601
  std::vector<std::uint64_t> gene_fingerprints;
  std::optional<Dimension> dimension_override;

  Dimension dimension() const { return dimension_override.value_or(default_dimension(kind)); }
};

struct AdvisoryDb {
  std::vector<Advisory> records;
};

inline Advisory advisory_from_json(const nlohmann::json& j, int line_no) {
  auto fail = [&](const std::string& what) {
    return error("MalformedAdvisory", "advisory line " + std::to_string(line_no) + ": " + what);
  };
  Advisory a;
  try {
    a.id = j.at("id").get<std::string>();
    a.kind = advisory_kind_from(j.at("kind").get<std::string>());
    a.ecosystem = j.value("ecosystem", "*");
    a.package = j.value("package", "");
    if (j.contains("affected")) {
      for (const auto& r : j["affected"]) {
        a.affected.push_back(VersionRange::parse(r.get<std::string>()));
      }
    }
    a.severity = j.at("severity").get<double>();
    a.description = j.value("description", "");
    a.family = j.value("family", "");
    a.origin = j.value("origin", "");
    a.timestamp = j.value("timestamp", "");
    if (j.contains("gene_fingerprints")) {
      for (const auto& fp : j["gene_fingerprints"]) {
        a.gene_fingerprints.push_back(parse_hex16(fp.get<std::string>()));
      }
    }
    if (j.contains("dimension")) {
      a.dimension_override = dimension_from(j["dimension"].get<std::string>());
    }
  } catch (const nlohmann::json::exception& e) {
    throw fail(e.what());
  }
  if (a.severity < 0.0 || a.severity > 10.0 || std::isnan(a.severity)) {
    throw error("InvalidSeverity", "advisory '" + a.id + "': severity must lie in [0,10]");
  }
  if (a.affected.empty() && a.gene_fingerprints.empty()) {
    throw fail("record '" + a.id + "' is unmatchable: needs affected ranges or gene fingerprints");
  }
  return a;
}

inline AdvisoryDb load_advisories_text(std::string_view text) {
  AdvisoryDb db;
  std::set<std::string> ids;
  int line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t nl = text.find('\n', start);
    std::string_view line =
        text.substr(start, nl == std::string_view::npos ? text.size() - start : nl - start);
    start = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    if (line.empty()) continue;
    nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
      throw error("MalformedAdvisory",
                  "advisory line " + std::to_string(line_no) + ": not a JSON object");
    }
    Advisory a = advisory_from_json(j, line_no);
    if (!ids.insert(a.id).second) {
      throw error("DuplicateId", "duplicate advisory id '" + a.id + "'");
    }
    db.records.push_back(std::move(a));
  }
  return db;
}

inline AdvisoryDb load_advisories(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw error("IoError", "cannot open " + path.string());
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return load_advisories_text(text);
}

// ---------------------------------------------------------------------------
// Matching

enum class MatchVia { PackageRange, GeneFingerprint };

struct Finding {
  std::string advisory_id;
  MatchVia matched_via = MatchVia::PackageRange;
  std::string node;                 // PackageRange: the affected node id
  std::uint64_t function_id = 0;    // GeneFingerprint: the target function
  Dimension dimension = Dimension::Security;
  double severity = 0.0;
};

/// One finding per (node, advisory) whose ecosystem and package name match
/// and whose version falls in any affected range. Ordered by (advisory id,
/// node).
inline std::vector<Finding> match_dependencies(const DependencyGraph& g, const AdvisoryDb& db) {
  std::vector<Finding> findings;
  for (const Advisory& a : db.records) {
    if (a.affected.empty()) continue;
    if (a.ecosystem != "*" && !g.ecosystem.empty() && a.ecosystem != g.ecosystem) continue;
    for (const std::string& id : g.nodes) {
      const auto [name, version] = split_node_id(id);
      if (name != a.package) continue;
      bool hit = false;
      for (const VersionRange& r : a.affected) {
        if (range_contains(r, version)) {
          hit = true;
          break;
        }
      }
      if (hit) {
        findings.push_back({a.id, MatchVia::PackageRange, id, 0, a.dimension(), a.severity});
      }
    }
  }
  std::sort(findings.begin(), findings.end(), [](const Finding& x, const Finding& y) {
    if (x.advisory_id != y.advisory_id) return x.advisory_id < y.advisory_id;
    return x.node < y.node;
  });
  return findings;
}

/// One finding per verified clone pair whose pool-side fingerprint an
/// advisory lists as defective.
inline std::vector<Finding> match_genes(const std::vector<ClonePair>& clone_findings,
                                        const AdvisoryDb& db) {
  std::vector<Finding> findings;
  for (const Advisory& a : db.records) {
    if (a.gene_fingerprints.empty()) continue;
    const std::set<std::uint64_t> fps(a.gene_fingerprints.begin(), a.gene_fingerprints.end());
    for (const ClonePair& pair : clone_findings) {
      if (!pair.verdict || !fps.count(pair.pool_fingerprint)) continue;
      findings.push_back(
          {a.id, MatchVia::GeneFingerprint, "", pair.target_function_id, a.dimension(), a.severity});
    }
  }
  std::sort(findings.begin(), findings.end(), [](const Finding& x, const Finding& y) {
    if (x.advisory_id != y.advisory_id) return x.advisory_id < y.advisory_id;
    return x.function_id < y.function_id;
  });
  return findings;
}

// ---------------------------------------------------------------------------
// Portrait

struct PortraitWeights {
  double security = 0.40;
  double quality = 0.20;
  double oss_composition = 0.15;
  double maintainability = 0.15;
  double business_risk = 0.10;
  // max keeps many low findings from inflating a dimension; sum (clamped
  // to severity 10) is available for callers who want accumulation.
  enum class Aggregate { Max, Sum } aggregate = Aggregate::Max;

  double weight(Dimension d) const {
    switch (d) {
      case Dimension::Security: return security;
      case Dimension::Quality: return quality;
      case Dimension::OssComposition: return oss_composition;
      case Dimension::Maintainability: return maintainability;
      case Dimension::BusinessRisk: return business_risk;
    }
    return 0.0;
  }

  void validate() const {
    const double values[] = {security, quality, oss_composition, maintainability, business_risk};
    double sum = 0.0;
    for (double v : values) {
      if (v < 0.0) throw error("InvalidWeights", "portrait weights must be non-negative");
      sum += v;
    }
    if (std::abs(sum - 1.0) > 1e-9) {
      throw error("InvalidWeights", "portrait weights must sum to 1");
    }
  }
};

struct Portrait {
  double total = 0.0;
  std::map<std::string, double> dimensions;  // all five, fixed names
};

/// Per-dimension score is the max finding severity over 10 (or the clamped
/// sum in Sum mode); the total is the weighted blend across dimensions.
inline Portrait portrait_score(const std::vector<Finding>& findings,
                               const PortraitWeights& weights) {
  weights.validate();
  Portrait p;
  std::map<Dimension, double> raw;
  for (const auto& [dim, _] : dimension_names()) raw[dim] = 0.0;
  for (const Finding& f : findings) {
    if (weights.aggregate == PortraitWeights::Aggregate::Max) {
      raw[f.dimension] = std::max(raw[f.dimension], f.severity);
    } else {
      raw[f.dimension] = std::min(10.0, raw[f.dimension] + f.severity);
    }
  }
  for (const auto& [dim, name] : dimension_names()) {
    const double score = raw[dim] / 10.0;
    p.dimensions[name] = score;
    p.total += weights.weight(dim) * score;
  }
  return p;
}

}  // namespace sgp
