#pragma once

// Function-level metrics (Halstead volume, cyclomatic complexity, the
// maintainability value), repository contribution, and the threshold-based
// repository selection with LOF-prioritized re-examination of the excluded
// set.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "sgp/common.hpp"
#include "sgp/extract.hpp"
#include "sgp/lof.hpp"

namespace sgp {

struct MetricSet {
  double halstead_volume = 0.0;  // bits
  int cyclomatic = 1;
  int loc = 1;
  double value = 0.0;  // unclamped; may be negative
};

/// value = 171 - 5.2*ln(max(hv,1)) - 0.23*cc - 16.2*ln(loc)
///
/// hv is floored at 1 so the logarithm stays defined on degenerate inputs;
/// the result is finite for every valid input and negative values are kept.
inline double function_value(double hv, int cc, int loc) {
  if (cc < 1 || loc < 1) {
    throw error("DomainError", "function_value requires cc >= 1 and loc >= 1");
  }
  return 171.0 - 5.2 * std::log(std::max(hv, 1.0)) - 0.23 * static_cast<double>(cc) -
         16.2 * std::log(static_cast<double>(loc));
}

/// Halstead counting rule: operands are identifiers and literals, operators
/// are keywords, operators and punctuation; comments are excluded entirely.
/// HV = N*log2(eta) with N the total and eta the distinct lexeme count.
/// CC = 1 + occurrences of the profile's branch keywords.
inline MetricSet compute_metrics(const FunctionRecord& record, const LanguageProfile& profile) {
  long long total = 0;
  std::set<std::string_view> distinct;
  int branches = 0;
  for (const Token& t : record.tokens) {
    if (t.kind == TokenKind::Comment) continue;
    ++total;
    distinct.insert(t.lexeme);
    if ((t.kind == TokenKind::Keyword || t.kind == TokenKind::Operator) &&
        profile.branch_keywords.count(t.lexeme)) {
      ++branches;
    }
  }
  MetricSet m;
  m.halstead_volume =
      distinct.empty() ? 0.0
                       : static_cast<double>(total) * std::log2(static_cast<double>(distinct.size()));
  m.cyclomatic = 1 + branches;
  m.loc = record.line_count;
  m.value = function_value(m.halstead_volume, m.cyclomatic, m.loc);
  return m;
}

// ---------------------------------------------------------------------------
// Repository contribution

struct RepoMetadata {
  std::string repo_id;
  std::string url;
  long long stars = 0;
  long long forks = 0;
  long long issues = 0;
  long long commits = 0;
  long long contributors = 0;

  bool operator==(const RepoMetadata&) const = default;
};

inline const std::vector<std::string>& repo_metric_names() {
  static const std::vector<std::string> names = {"stars", "forks", "issues", "commits",
                                                 "contributors"};
  return names;
}

inline std::vector<double> repo_metric_vector(const RepoMetadata& m) {
  return {static_cast<double>(m.stars), static_cast<double>(m.forks),
          static_cast<double>(m.issues), static_cast<double>(m.commits),
          static_cast<double>(m.contributors)};
}

struct RepoStats {
  std::string repo_id;
  int function_count = 0;
  int unique_func_count = 0;
  double contribution = 0.0;
};

/// RepoMetadata JSONL: one {repo_id, url, stars, forks, issues, commits,
/// contributors} object per line.
inline std::vector<RepoMetadata> load_repo_metadata(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw error("IoError", "cannot open " + path.string());
  std::vector<RepoMetadata> out;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
      throw error("MalformedLine", "metadata line " + std::to_string(line_no) + ": not a JSON object");
    }
    try {
      RepoMetadata m;
      m.repo_id = j.at("repo_id").get<std::string>();
      m.url = j.value("url", "");
      m.stars = j.at("stars").get<long long>();
      m.forks = j.at("forks").get<long long>();
      m.issues = j.at("issues").get<long long>();
      m.commits = j.at("commits").get<long long>();
      m.contributors = j.at("contributors").get<long long>();
      out.push_back(std::move(m));
    } catch (const nlohmann::json::exception& e) {
      throw error("MissingField",
                  "metadata line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

/// One (value, ecosystem frequency) pair per function of the repository.
struct ValuedFunction {
  double value = 0.0;
  int frequency = 1;  // distinct repos containing the fingerprint
};

/// contribution = (sum over f with frequency <= f_common of max(value,0)/frequency)
///                * unique_func_count / all_func_count
/// Functions more common than f_common contribute nothing; negative values
/// are floored to 0 before the split.
inline RepoStats repo_contribution(const std::vector<ValuedFunction>& functions, int f_common,
                                   std::string repo_id = {}) {
  RepoStats stats;
  stats.repo_id = std::move(repo_id);
  stats.function_count = static_cast<int>(functions.size());
  if (functions.empty()) return stats;

  double sum = 0.0;
  for (const ValuedFunction& f : functions) {
    if (f.frequency == 1) ++stats.unique_func_count;
    if (f.frequency <= f_common) {
      sum += std::max(f.value, 0.0) / static_cast<double>(f.frequency);
    }
  }
  stats.contribution = sum * static_cast<double>(stats.unique_func_count) /
                       static_cast<double>(stats.function_count);
  return stats;
}

// ---------------------------------------------------------------------------
// Repository selection

struct SelectionConfig {
  std::map<std::string, long long> thresholds;  // exactly the five metric names
  int lof_k = 5;
  int f_common = 100;

  SelectionConfig() {
    for (const auto& name : repo_metric_names()) thresholds[name] = 0;
  }

  void validate() const {
    if (thresholds.size() != repo_metric_names().size()) {
      throw error("InvalidThresholds", "thresholds must cover exactly the five repo metrics");
    }
    for (const auto& name : repo_metric_names()) {
      auto it = thresholds.find(name);
      if (it == thresholds.end()) {
        throw error("InvalidThresholds", "missing threshold for '" + name + "'");
      }
      if (it->second < 0) {
        throw error("InvalidThresholds", "threshold for '" + name + "' must be non-negative");
      }
    }
  }
};

struct SelectionResult {
  std::vector<RepoMetadata> selected;
  std::vector<RepoMetadata> excluded;
};

/// A repository is selected iff every metric meets its threshold.
inline SelectionResult select_repos(const std::vector<RepoMetadata>& metadata,
                                    const SelectionConfig& cfg) {
  cfg.validate();
  SelectionResult result;
  for (const RepoMetadata& repo : metadata) {
    const std::vector<double> v = repo_metric_vector(repo);
    bool ok = true;
    for (std::size_t i = 0; i < repo_metric_names().size(); ++i) {
      if (v[i] < static_cast<double>(cfg.thresholds.at(repo_metric_names()[i]))) {
        ok = false;
        break;
      }
    }
    (ok ? result.selected : result.excluded).push_back(repo);
  }
  return result;
}

struct PrioritizeResult {
  std::vector<RepoMetadata> ordered;
  std::vector<double> scores;  // parallel to ordered; empty when skipped
  std::vector<Diagnostic> diagnostics;
};

/// Orders excluded repositories by LOF descending (most anomalous first) so
/// they can be re-examined in batches; ties break by repo_id. Sets too small
/// for the chosen k are returned in input order with a diagnostic.
inline PrioritizeResult prioritize_excluded(const std::vector<RepoMetadata>& excluded, int k) {
  PrioritizeResult result;
  if (static_cast<int>(excluded.size()) <= k) {
    result.ordered = excluded;
    result.diagnostics.push_back(
        {"InsufficientPoints",
         "excluded set of " + std::to_string(excluded.size()) +
             " repositories is too small for k=" + std::to_string(k) + "; order preserved",
         0});
    return result;
  }
  std::vector<std::vector<double>> points;
  points.reserve(excluded.size());
  for (const RepoMetadata& repo : excluded) points.push_back(repo_metric_vector(repo));
  const std::vector<double> lof = lof_scores(points, k);

  std::vector<std::size_t> order(excluded.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (lof[a] != lof[b]) return lof[a] > lof[b];
    return excluded[a].repo_id < excluded[b].repo_id;
  });
  for (std::size_t idx : order) {
    result.ordered.push_back(excluded[idx]);
    result.scores.push_back(lof[idx]);
  }
  return result;
}

}  // namespace sgp
