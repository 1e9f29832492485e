#pragma once

// The gene pool: deduplicated function fingerprints ranked by a blend of
// call-graph centrality and maintainability value, persisted as a
// deterministic index directory, plus clustering and evolution diffing.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "sgp/callgraph.hpp"
#include "sgp/clone.hpp"
#include "sgp/common.hpp"
#include "sgp/corpus.hpp"
#include "sgp/metrics.hpp"
#include "sgp/parallel.hpp"

namespace sgp {

inline constexpr int kPoolFormatVersion = 1;

struct RankWeights {
  double w_centrality = 0.5;
  double w_value = 0.5;

  void validate() const {
    if (w_centrality < 0.0 || w_centrality > 1.0 || w_value < 0.0 || w_value > 1.0 ||
        std::abs(w_centrality + w_value - 1.0) > 1e-9) {
      throw error("InvalidWeights", "rank weights must lie in [0,1] and sum to 1");
    }
  }
};

struct Gene {
  std::uint64_t fingerprint = 0;
  std::uint64_t exemplar = 0;  // function_id of the exemplar instance
  double value = 0.0;
  int frequency = 1;  // distinct repos containing the fingerprint
  double degree = 0.0;
  double closeness = 0.0;
  double betweenness = 0.0;
  double rank_score = 0.0;
  std::vector<std::string> repos;  // sorted distinct repo ids
};

struct GenePool {
  std::vector<Gene> genes;  // sorted by fingerprint
  std::vector<FunctionRecord> exemplars;
  RankWeights weights;
  double tau = 0.2;
  int f_common = 100;
  int n_lines = 4;
  WindowIndex windows;

  const Gene* find_gene(std::uint64_t fp) const {
    auto it = std::lower_bound(genes.begin(), genes.end(), fp,
                               [](const Gene& g, std::uint64_t v) { return g.fingerprint < v; });
    return it != genes.end() && it->fingerprint == fp ? &*it : nullptr;
  }

  const FunctionRecord* find_exemplar(std::uint64_t function_id) const {
    for (const auto& r : exemplars) {
      if (r.function_id == function_id) return &r;
    }
    return nullptr;
  }
};

namespace detail {

struct MinMax {
  double lo = 0.0;
  double hi = 0.0;
  bool degenerate = false;

  double norm(double v) const { return degenerate ? 0.5 : (v - lo) / (hi - lo); }
};

inline MinMax min_max(const std::vector<double>& values) {
  MinMax mm;
  mm.lo = *std::min_element(values.begin(), values.end());
  mm.hi = *std::max_element(values.begin(), values.end());
  mm.degenerate = !(mm.hi > mm.lo);
  return mm;
}

}  // namespace detail

struct RankResult {
  std::vector<Gene> genes;  // sorted by rank_score desc, fingerprint asc
  std::vector<Diagnostic> diagnostics;
};

/// Ranks all distinct fingerprints of a corpus. Per repo the call graph is
/// built and centralities computed; each centrality and the value are
/// min-max normalized over the whole corpus; the composite score is
/// w_centrality * mean(norm degree, norm closeness, norm betweenness)
/// + w_value * norm value. A corpus-wide constant metric normalizes to 0.5
/// for everyone and is flagged with a DegenerateNormalization diagnostic.
/// A gene's exemplar is its highest-value instance (ties to the lowest id).
inline RankResult rank_genes(const Corpus& corpus, const RankWeights& weights,
                             const std::map<std::uint64_t, MetricSet>& metrics, int jobs = 0) {
  weights.validate();
  RankResult result;
  if (corpus.records.empty()) return result;

  std::map<std::string, std::vector<FunctionRecord>> by_repo;
  for (const FunctionRecord& r : corpus.records) by_repo[r.repo_id].push_back(r);

  std::vector<const std::vector<FunctionRecord>*> repo_order;
  for (const auto& [_, records] : by_repo) repo_order.push_back(&records);
  std::vector<std::map<std::uint64_t, CentralityScores>> repo_scores(repo_order.size());
  parallel_for(repo_order.size(), jobs, [&](std::size_t i) {
    repo_scores[i] = centrality(build_call_graph(*repo_order[i]));
  });
  std::map<std::uint64_t, CentralityScores> scores;
  for (auto& part : repo_scores) scores.merge(part);

  std::vector<double> degrees, closenesses, betweennesses, values;
  for (const FunctionRecord& r : corpus.records) {
    const CentralityScores& c = scores.at(r.function_id);
    degrees.push_back(c.degree);
    closenesses.push_back(c.closeness);
    betweennesses.push_back(c.betweenness);
    values.push_back(metrics.at(r.function_id).value);
  }
  const detail::MinMax mm_deg = detail::min_max(degrees);
  const detail::MinMax mm_clo = detail::min_max(closenesses);
  const detail::MinMax mm_bet = detail::min_max(betweennesses);
  const detail::MinMax mm_val = detail::min_max(values);
  const std::pair<const char*, const detail::MinMax*> checks[] = {
      {"degree", &mm_deg}, {"closeness", &mm_clo}, {"betweenness", &mm_bet}, {"value", &mm_val}};
  for (const auto& [name, mm] : checks) {
    if (mm->degenerate) {
      result.diagnostics.push_back(
          {"DegenerateNormalization",
           std::string(name) + " is constant corpus-wide; normalized to 0.5 for all functions",
           0});
    }
  }

  auto function_score = [&](std::size_t i) {
    const double composite =
        (mm_deg.norm(degrees[i]) + mm_clo.norm(closenesses[i]) + mm_bet.norm(betweennesses[i])) /
        3.0;
    return weights.w_centrality * composite + weights.w_value * mm_val.norm(values[i]);
  };

  struct Instance {
    const FunctionRecord* record;
    double value;
    double score;
    CentralityScores cent;
  };
  std::map<std::uint64_t, std::vector<Instance>> groups;
  for (std::size_t i = 0; i < corpus.records.size(); ++i) {
    const FunctionRecord& r = corpus.records[i];
    groups[fingerprint(r)].push_back(
        {&r, values[i], function_score(i), scores.at(r.function_id)});
  }

  for (auto& [fp, instances] : groups) {
    const Instance* exemplar = &instances.front();
    for (const Instance& inst : instances) {
      if (inst.value > exemplar->value ||
          (inst.value == exemplar->value &&
           inst.record->function_id < exemplar->record->function_id)) {
        exemplar = &inst;
      }
    }
    std::set<std::string> repos;
    for (const Instance& inst : instances) repos.insert(inst.record->repo_id);

    Gene gene;
    gene.fingerprint = fp;
    gene.exemplar = exemplar->record->function_id;
    gene.value = exemplar->value;
    gene.frequency = static_cast<int>(repos.size());
    gene.degree = exemplar->cent.degree;
    gene.closeness = exemplar->cent.closeness;
    gene.betweenness = exemplar->cent.betweenness;
    gene.rank_score = exemplar->score;
    gene.repos.assign(repos.begin(), repos.end());
    result.genes.push_back(std::move(gene));
  }

  std::sort(result.genes.begin(), result.genes.end(), [](const Gene& a, const Gene& b) {
    if (a.rank_score != b.rank_score) return a.rank_score > b.rank_score;
    return a.fingerprint < b.fingerprint;
  });
  return result;
}

/// Builds the pool: rank all fingerprints, keep the top tau fraction that
/// are not more common than f_common repos, copy in the exemplar records
/// and index their windows.
inline GenePool build_pool(const Corpus& corpus, const std::map<std::uint64_t, MetricSet>& metrics,
                           const RankWeights& weights, double tau = 0.2, int f_common = 100,
                           int n_lines = 4, int jobs = 0) {
  if (tau < 0.0 || tau > 1.0) throw error("InvalidConfig", "tau must lie in [0,1]");
  GenePool pool;
  pool.weights = weights;
  pool.tau = tau;
  pool.f_common = f_common;
  pool.n_lines = n_lines;

  RankResult ranked = rank_genes(corpus, weights, metrics, jobs);
  const std::size_t keep =
      static_cast<std::size_t>(std::ceil(tau * static_cast<double>(ranked.genes.size())));
  ranked.genes.resize(std::min(keep, ranked.genes.size()));

  std::map<std::uint64_t, const FunctionRecord*> by_id;
  for (const FunctionRecord& r : corpus.records) by_id[r.function_id] = &r;

  for (Gene& gene : ranked.genes) {
    if (gene.frequency > f_common) continue;
    pool.exemplars.push_back(*by_id.at(gene.exemplar));
    pool.genes.push_back(std::move(gene));
  }
  std::sort(pool.genes.begin(), pool.genes.end(),
            [](const Gene& a, const Gene& b) { return a.fingerprint < b.fingerprint; });
  std::sort(pool.exemplars.begin(), pool.exemplars.end(),
            [](const FunctionRecord& a, const FunctionRecord& b) {
              return a.function_id < b.function_id;
            });
  pool.windows = build_window_index(pool.exemplars, n_lines, jobs);
  return pool;
}

// ---------------------------------------------------------------------------
// Clustering

/// Component name of a repo id: the part before '@' when the id carries a
/// version ("zlib@1.2.13"), the id itself otherwise.
inline std::string component_of(const std::string& repo_id) {
  const std::size_t at = repo_id.find('@');
  return at == std::string::npos ? repo_id : repo_id.substr(0, at);
}

// Forward declaration; full type in depgraph.hpp.
struct DependencyGraph;
inline std::vector<std::pair<std::string, std::string>> package_edges(const DependencyGraph& g);

/// Groups genes into families. Two genes link when their repo sets overlap
/// enough (Jaccard >= theta_co) or when they live in distinct packages
/// connected by a dependency path. Clusters are the connected components,
/// returned with members and clusters sorted.
template <class GraphRange>
std::vector<std::vector<std::uint64_t>> cluster_genes(const GenePool& pool,
                                                      const GraphRange& dep_graphs,
                                                      double theta_co) {
  const std::size_t n = pool.genes.size();

  // Package-level reachability from the union of all dependency graphs.
  std::map<std::string, std::set<std::string>> adj;
  for (const auto& g : dep_graphs) {
    for (const auto& [from, to] : package_edges(g)) adj[from].insert(to);
  }
  auto reaches = [&](const std::string& from, const std::string& to) {
    std::set<std::string> visited{from};
    std::vector<std::string> stack{from};
    while (!stack.empty()) {
      std::string cur = stack.back();
      stack.pop_back();
      if (cur == to) return true;
      auto it = adj.find(cur);
      if (it == adj.end()) continue;
      for (const std::string& next : it->second) {
        if (visited.insert(next).second) stack.push_back(next);
      }
    }
    return false;
  };

  std::vector<std::set<std::string>> repo_sets(n), pkg_sets(n);
  for (std::size_t i = 0; i < n; ++i) {
    repo_sets[i].insert(pool.genes[i].repos.begin(), pool.genes[i].repos.end());
    for (const std::string& r : pool.genes[i].repos) pkg_sets[i].insert(component_of(r));
  }

  std::vector<std::size_t> parent(n);
  for (std::size_t i = 0; i < n; ++i) parent[i] = i;
  auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };

  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      std::size_t inter = 0;
      for (const std::string& r : repo_sets[i]) inter += repo_sets[j].count(r);
      const std::size_t uni = repo_sets[i].size() + repo_sets[j].size() - inter;
      const double jaccard =
          uni == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni);
      bool linked = jaccard >= theta_co;
      for (auto pi = pkg_sets[i].begin(); !linked && pi != pkg_sets[i].end(); ++pi) {
        for (auto pj = pkg_sets[j].begin(); !linked && pj != pkg_sets[j].end(); ++pj) {
          if (*pi != *pj && (reaches(*pi, *pj) || reaches(*pj, *pi))) linked = true;
        }
      }
      if (linked) parent[find(i)] = find(j);
    }
  }

  std::map<std::size_t, std::vector<std::uint64_t>> by_root;
  for (std::size_t i = 0; i < n; ++i) by_root[find(i)].push_back(pool.genes[i].fingerprint);
  std::vector<std::vector<std::uint64_t>> clusters;
  for (auto& [_, members] : by_root) {
    std::sort(members.begin(), members.end());
    clusters.push_back(std::move(members));
  }
  std::sort(clusters.begin(), clusters.end());
  return clusters;
}

// ---------------------------------------------------------------------------
// Evolution diff

struct PoolDiff {
  std::vector<std::uint64_t> added;    // fingerprints only in the new pool
  std::vector<std::uint64_t> removed;  // fingerprints only in the old pool
  std::vector<std::pair<std::uint64_t, std::uint64_t>> replaced;  // (old, new)
};

/// Fingerprints present on one side only are additions/removals; pairs of
/// (removed, added) exemplars with token similarity >= theta_repl are
/// greedily matched best-first into replacements, each gene used once.
inline PoolDiff diff_pools(const GenePool& old_pool, const GenePool& new_pool,
                           double theta_repl = 0.7) {
  PoolDiff diff;
  std::set<std::uint64_t> old_fps, new_fps;
  for (const Gene& g : old_pool.genes) old_fps.insert(g.fingerprint);
  for (const Gene& g : new_pool.genes) new_fps.insert(g.fingerprint);

  std::vector<std::uint64_t> only_old, only_new;
  for (std::uint64_t fp : old_fps) {
    if (!new_fps.count(fp)) only_old.push_back(fp);
  }
  for (std::uint64_t fp : new_fps) {
    if (!old_fps.count(fp)) only_new.push_back(fp);
  }

  struct Pairing {
    double sim;
    std::uint64_t old_fp, new_fp;
  };
  std::vector<Pairing> candidates;
  for (std::uint64_t of : only_old) {
    const FunctionRecord* old_rec = old_pool.find_exemplar(old_pool.find_gene(of)->exemplar);
    for (std::uint64_t nf : only_new) {
      const FunctionRecord* new_rec = new_pool.find_exemplar(new_pool.find_gene(nf)->exemplar);
      const double sim = token_similarity(*old_rec, *new_rec);
      if (sim >= theta_repl) candidates.push_back({sim, of, nf});
    }
  }
  std::sort(candidates.begin(), candidates.end(), [](const Pairing& a, const Pairing& b) {
    if (a.sim != b.sim) return a.sim > b.sim;
    if (a.old_fp != b.old_fp) return a.old_fp < b.old_fp;
    return a.new_fp < b.new_fp;
  });

  std::set<std::uint64_t> used_old, used_new;
  for (const Pairing& p : candidates) {
    if (used_old.count(p.old_fp) || used_new.count(p.new_fp)) continue;
    used_old.insert(p.old_fp);
    used_new.insert(p.new_fp);
    diff.replaced.emplace_back(p.old_fp, p.new_fp);
  }
  for (std::uint64_t fp : only_old) {
    if (!used_old.count(fp)) diff.removed.push_back(fp);
  }
  for (std::uint64_t fp : only_new) {
    if (!used_new.count(fp)) diff.added.push_back(fp);
  }
  std::sort(diff.replaced.begin(), diff.replaced.end());
  return diff;
}

// ---------------------------------------------------------------------------
// Persistence

namespace detail {

/// Holds the pool.lock file for the duration of a write.
class PoolLock {
 public:
  explicit PoolLock(const std::filesystem::path& dir) : path_(dir / "pool.lock") {
    std::FILE* f = std::fopen(path_.c_str(), "wx");
    if (!f) {
      throw error("PoolLocked", "index directory is locked for writing: " + path_.string());
    }
    std::fclose(f);
  }
  ~PoolLock() {
    std::error_code ec;
    std::filesystem::remove(path_, ec);
  }
  PoolLock(const PoolLock&) = delete;
  PoolLock& operator=(const PoolLock&) = delete;

 private:
  std::filesystem::path path_;
};

}  // namespace detail

/// Writes the index directory: meta.json, genes.jsonl (sorted by
/// fingerprint), windows.jsonl (sorted by hash) and exemplars.jsonl.
/// Identical pools produce byte-identical directories.
inline void save_pool(const GenePool& pool, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  detail::PoolLock lock(dir);

  {
    nlohmann::json meta;
    meta["f_common"] = pool.f_common;
    meta["format_version"] = kPoolFormatVersion;
    meta["n_lines"] = pool.n_lines;
    meta["tau"] = pool.tau;
    meta["weights"] = {{"w_centrality", pool.weights.w_centrality},
                       {"w_value", pool.weights.w_value}};
    std::ofstream out(dir / "meta.json", std::ios::binary);
    if (!out) throw error("IoError", "cannot write " + (dir / "meta.json").string());
    out << meta.dump(2) << '\n';
  }
  {
    std::ofstream out(dir / "genes.jsonl", std::ios::binary);
    if (!out) throw error("IoError", "cannot write " + (dir / "genes.jsonl").string());
    for (const Gene& g : pool.genes) {
      nlohmann::json j;
      j["betweenness"] = g.betweenness;
      j["closeness"] = g.closeness;
      j["degree"] = g.degree;
      j["exemplar"] = to_hex16(g.exemplar);
      j["fingerprint"] = to_hex16(g.fingerprint);
      j["frequency"] = g.frequency;
      j["rank_score"] = g.rank_score;
      j["repos"] = g.repos;
      j["value"] = g.value;
      out << j.dump() << '\n';
    }
  }
  {
    std::ofstream out(dir / "windows.jsonl", std::ios::binary);
    if (!out) throw error("IoError", "cannot write " + (dir / "windows.jsonl").string());
    for (const auto& [hash, ids] : pool.windows.postings) {
      nlohmann::json j;
      j["h"] = to_hex16(hash);
      nlohmann::json p = nlohmann::json::array();
      for (std::uint64_t id : ids) p.push_back(to_hex16(id));
      j["p"] = std::move(p);
      out << j.dump() << '\n';
    }
  }
  {
    Corpus exemplars;
    exemplars.records = pool.exemplars;
    store_corpus(exemplars, dir / "exemplars.jsonl");
  }
}

inline GenePool load_pool(const std::filesystem::path& dir) {
  GenePool pool;
  const std::filesystem::path meta_path = dir / "meta.json";
  std::ifstream meta_in(meta_path, std::ios::binary);
  if (!meta_in) throw error("CorruptIndex", meta_path.string() + ": missing");
  nlohmann::json meta = nlohmann::json::parse(meta_in, nullptr, false);
  if (meta.is_discarded() || !meta.is_object()) {
    throw error("CorruptIndex", meta_path.string() + ": not a JSON object");
  }
  if (!meta.contains("format_version") || !meta["format_version"].is_number_integer() ||
      meta["format_version"].get<int>() != kPoolFormatVersion) {
    throw error("IndexVersionMismatch",
                meta_path.string() + ": expected format_version " +
                    std::to_string(kPoolFormatVersion));
  }
  try {
    pool.f_common = meta.at("f_common").get<int>();
    pool.n_lines = meta.at("n_lines").get<int>();
    pool.tau = meta.at("tau").get<double>();
    pool.weights.w_centrality = meta.at("weights").at("w_centrality").get<double>();
    pool.weights.w_value = meta.at("weights").at("w_value").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw error("CorruptIndex", meta_path.string() + ": " + e.what());
  }

  const std::filesystem::path genes_path = dir / "genes.jsonl";
  std::ifstream genes_in(genes_path, std::ios::binary);
  if (!genes_in) throw error("CorruptIndex", genes_path.string() + ": missing");
  std::string line;
  int line_no = 0;
  while (std::getline(genes_in, line)) {
    ++line_no;
    if (line.empty()) continue;
    nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded()) {
      throw error("CorruptIndex", genes_path.string() + ": bad JSON at line " +
                                      std::to_string(line_no));
    }
    try {
      Gene g;
      g.betweenness = j.at("betweenness").get<double>();
      g.closeness = j.at("closeness").get<double>();
      g.degree = j.at("degree").get<double>();
      g.exemplar = parse_hex16(j.at("exemplar").get<std::string>());
      g.fingerprint = parse_hex16(j.at("fingerprint").get<std::string>());
      g.frequency = j.at("frequency").get<int>();
      g.rank_score = j.at("rank_score").get<double>();
      g.repos = j.at("repos").get<std::vector<std::string>>();
      g.value = j.at("value").get<double>();
      pool.genes.push_back(std::move(g));
    } catch (const nlohmann::json::exception& e) {
      throw error("CorruptIndex", genes_path.string() + ": line " + std::to_string(line_no) +
                                      ": " + e.what());
    }
  }

  try {
    pool.exemplars = load_corpus_jsonl(dir / "exemplars.jsonl").records;
  } catch (const error& e) {
    throw error("CorruptIndex", (dir / "exemplars.jsonl").string() + ": " + e.what());
  }

  const std::filesystem::path windows_path = dir / "windows.jsonl";
  std::ifstream windows_in(windows_path, std::ios::binary);
  if (!windows_in) throw error("CorruptIndex", windows_path.string() + ": missing");
  pool.windows.n_lines = pool.n_lines;
  line_no = 0;
  while (std::getline(windows_in, line)) {
    ++line_no;
    if (line.empty()) continue;
    nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.contains("h") || !j.contains("p")) {
      throw error("CorruptIndex", windows_path.string() + ": bad entry at line " +
                                      std::to_string(line_no));
    }
    std::vector<std::uint64_t> ids;
    for (const auto& id : j["p"]) ids.push_back(parse_hex16(id.get<std::string>()));
    pool.windows.postings[parse_hex16(j["h"].get<std::string>())] = std::move(ids);
  }
  // Window multisets are derived data; recompute from the exemplars.
  for (const FunctionRecord& r : pool.exemplars) {
    std::vector<std::uint64_t> w = windows(r, pool.n_lines);
    std::sort(w.begin(), w.end());
    pool.windows.per_function[r.function_id] = std::move(w);
  }
  return pool;
}

}  // namespace sgp
