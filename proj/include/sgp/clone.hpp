#pragma once

// Scalable clone detection: an inverted index over hashed N-line windows
// filters candidates, token similarity filters pairs, and nesting-tree
// verification (subtree hash overlap + tree-shape vectors) settles the
// verdict and the Type category.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "sgp/common.hpp"
#include "sgp/extract.hpp"
#include "sgp/parallel.hpp"

namespace sgp {

struct CloneConfig {
  int n_lines = 4;
  int min_shared = 1;
  double theta_token = 0.6;
  double theta_verify = 0.8;

  std::vector<Diagnostic> validate() const {
    std::vector<Diagnostic> out;
    if (n_lines < 1 || min_shared < 1) {
      throw error("InvalidConfig", "n_lines and min_shared must be >= 1");
    }
    if (theta_token > theta_verify) {
      out.push_back({"ThresholdOrder",
                     "theta_token > theta_verify: the token filter is stricter than the verdict",
                     0});
    }
    return out;
  }
};

/// Hashes of every run of N adjacent normalized lines of the record. A
/// normalized line is the line's tokens in fingerprint normal form (ID /
/// NUM / STR placeholders, comments dropped) joined by single spaces, so
/// neither formatting churn nor identifier renaming breaks the filter;
/// renamed (Type-2) clones must still reach verification through this
/// index. Records shorter than N yield one window over all lines.
inline std::vector<std::uint64_t> windows(const FunctionRecord& record, int n) {
  std::map<int, std::string> lines;
  for (const Token& t : record.tokens) {
    if (t.kind == TokenKind::Comment) continue;
    std::string& line = lines[t.line];
    if (!line.empty()) line += ' ';
    line += normalized_lexeme(t);
  }
  std::vector<std::string> normalized;
  normalized.reserve(lines.size());
  for (auto& [_, text] : lines) normalized.push_back(std::move(text));

  std::vector<std::uint64_t> out;
  const int count = static_cast<int>(normalized.size());
  const int span = std::min(n, count);
  if (count == 0) return out;
  for (int start = 0; start + span <= count; ++start) {
    Fnv1a64 h;
    for (int i = 0; i < span; ++i) {
      h.update(normalized[static_cast<std::size_t>(start + i)]);
      h.update_byte('\n');
    }
    out.push_back(h.digest());
  }
  return out;
}

struct WindowIndex {
  int n_lines = 4;
  // window hash -> sorted, duplicate-free function ids
  std::map<std::uint64_t, std::vector<std::uint64_t>> postings;
  // function id -> sorted window hash multiset, for exact shared counts
  std::map<std::uint64_t, std::vector<std::uint64_t>> per_function;
};

inline WindowIndex build_window_index(const std::vector<FunctionRecord>& pool, int n,
                                      int jobs = 0) {
  WindowIndex index;
  index.n_lines = n;
  std::vector<std::vector<std::uint64_t>> all(pool.size());
  parallel_for(pool.size(), jobs, [&](std::size_t i) {
    all[i] = windows(pool[i], n);
    std::sort(all[i].begin(), all[i].end());
  });
  for (std::size_t i = 0; i < pool.size(); ++i) {
    index.per_function[pool[i].function_id] = all[i];
    std::uint64_t prev = 0;
    bool first = true;
    for (std::uint64_t h : all[i]) {
      if (first || h != prev) index.postings[h].push_back(pool[i].function_id);
      prev = h;
      first = false;
    }
  }
  for (auto& [_, ids] : index.postings) {
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  }
  return index;
}

inline int multiset_intersection_size(const std::vector<std::uint64_t>& a,
                               const std::vector<std::uint64_t>& b) {
  // multiset intersection size; both inputs sorted
  int count = 0;
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i] < b[j]) ++i;
    else if (b[j] < a[i]) ++j;
    else { ++count; ++i; ++j; }
  }
  return count;
}

struct Candidate {
  std::uint64_t function_id = 0;
  int shared_windows = 0;
};

/// Pool functions sharing at least min_shared windows with the target,
/// exact counts included, ordered by count descending then id.
inline std::vector<Candidate> filter_candidates(const FunctionRecord& target,
                                                const WindowIndex& index,
                                                const CloneConfig& cfg) {
  if (cfg.n_lines != index.n_lines) {
    throw error("NMismatch", "index built with N=" + std::to_string(index.n_lines) +
                                 " but config requests N=" + std::to_string(cfg.n_lines));
  }
  std::vector<std::uint64_t> target_windows = windows(target, cfg.n_lines);
  std::sort(target_windows.begin(), target_windows.end());

  std::set<std::uint64_t> touched;
  {
    std::uint64_t prev = 0;
    bool first = true;
    for (std::uint64_t h : target_windows) {
      if (!first && h == prev) continue;
      prev = h;
      first = false;
      auto it = index.postings.find(h);
      if (it == index.postings.end()) continue;
      touched.insert(it->second.begin(), it->second.end());
    }
  }

  std::vector<Candidate> out;
  for (std::uint64_t id : touched) {
    const int shared = multiset_intersection_size(target_windows, index.per_function.at(id));
    if (shared >= cfg.min_shared) out.push_back({id, shared});
  }
  std::sort(out.begin(), out.end(), [](const Candidate& a, const Candidate& b) {
    if (a.shared_windows != b.shared_windows) return a.shared_windows > b.shared_windows;
    return a.function_id < b.function_id;
  });
  return out;
}

/// Multiset Jaccard over normalized tokens; 1.0 for identical normalized
/// streams (including the empty/empty case), 0.0 for disjoint ones.
inline double token_similarity(const FunctionRecord& a, const FunctionRecord& b) {
  auto bag = [](const FunctionRecord& r) {
    std::map<std::string_view, int> counts;
    for (const Token& t : r.tokens) {
      if (t.kind == TokenKind::Comment) continue;
      ++counts[normalized_lexeme(t)];
    }
    return counts;
  };
  const auto ca = bag(a);
  const auto cb = bag(b);
  long long inter = 0, total_a = 0, total_b = 0;
  for (const auto& [_, c] : ca) total_a += c;
  for (const auto& [_, c] : cb) total_b += c;
  for (const auto& [lex, c] : ca) {
    auto it = cb.find(lex);
    if (it != cb.end()) inter += std::min(c, it->second);
  }
  const long long uni = total_a + total_b - inter;
  if (uni == 0) return 1.0;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

namespace detail {

inline constexpr int kDepthBuckets = 16;  // depths 0..14, 15 absorbs deeper
inline constexpr int kArityBuckets = 8;   // arities 0..6, 7 absorbs wider
inline constexpr int kQualifyingNodes = 3;

inline void tree_vector_walk(const NestingTree& t, int depth, std::array<double, 24>& v) {
  v[static_cast<std::size_t>(std::min(depth, kDepthBuckets - 1))] += 1.0;
  v[static_cast<std::size_t>(kDepthBuckets +
                             std::min<int>(static_cast<int>(t.children.size()), kArityBuckets - 1))] += 1.0;
  for (const auto& c : t.children) tree_vector_walk(c, depth + 1, v);
}

inline std::array<double, 24> tree_vector(const NestingTree& t) {
  std::array<double, 24> v{};
  tree_vector_walk(t, 0, v);
  return v;
}

}  // namespace detail

/// Mean of two structural signals: the multiset overlap of subtree hashes
/// (subtrees of >= 3 nodes; 1.0 by convention when neither tree has any)
/// and the cosine of the depth-profile + arity-histogram vectors.
inline double tree_similarity(const NestingTree& a, const NestingTree& b) {
  auto qualifying = [](const NestingTree& t) {
    std::vector<const NestingTree*> nodes;
    collect_nodes(t, nodes);
    std::vector<std::uint64_t> hashes;
    for (const NestingTree* n : nodes) {
      if (n->node_count >= detail::kQualifyingNodes) hashes.push_back(n->subtree_hash);
    }
    std::sort(hashes.begin(), hashes.end());
    return hashes;
  };
  const std::vector<std::uint64_t> ha = qualifying(a);
  const std::vector<std::uint64_t> hb = qualifying(b);
  double hash_ratio = 1.0;
  if (!ha.empty() || !hb.empty()) {
    hash_ratio = static_cast<double>(multiset_intersection_size(ha, hb)) /
                 static_cast<double>(std::max(ha.size(), hb.size()));
  }

  const std::array<double, 24> va = detail::tree_vector(a);
  const std::array<double, 24> vb = detail::tree_vector(b);
  double vector_sim = 1.0;  // equal vectors must score exactly 1
  if (va != vb) {
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t i = 0; i < va.size(); ++i) {
      dot += va[i] * vb[i];
      na += va[i] * va[i];
      nb += vb[i] * vb[i];
    }
    vector_sim = dot / (std::sqrt(na) * std::sqrt(nb));  // norms are never 0
  }

  return (hash_ratio + vector_sim) / 2.0;
}

enum class CloneCategory { None, Type1, Type2, Type3 };

inline std::string_view to_string(CloneCategory c) {
  switch (c) {
    case CloneCategory::None: return "None";
    case CloneCategory::Type1: return "Type1";
    case CloneCategory::Type2: return "Type2";
    case CloneCategory::Type3: return "Type3";
  }
  return "None";
}

struct Provenance {
  std::string repo_id;
  std::string file_path;
  int start_line = 0;
  int end_line = 0;
};

struct ClonePair {
  std::uint64_t a = 0;  // canonical: a < b
  std::uint64_t b = 0;
  int shared_windows = 0;
  double token_sim = 0.0;
  double tree_sim = 0.0;
  double combined = 0.0;
  bool verdict = false;
  CloneCategory category = CloneCategory::None;
  Provenance prov_a;
  Provenance prov_b;
  // Which side came from the gene pool, for intelligence matching.
  std::uint64_t pool_fingerprint = 0;
  std::uint64_t target_function_id = 0;
};

/// Verifies one candidate pair. combined = (token_sim + tree_sim)/2;
/// verdict at theta_verify; Type1 = equal stripped text, Type2 = equal
/// fingerprints, Type3 = verified near-miss.
inline ClonePair verify(const FunctionRecord& a, const FunctionRecord& b, const CloneConfig& cfg,
                        int shared_windows = 0) {
  const FunctionRecord& first = a.function_id <= b.function_id ? a : b;
  const FunctionRecord& second = a.function_id <= b.function_id ? b : a;

  ClonePair pair;
  pair.a = first.function_id;
  pair.b = second.function_id;
  pair.shared_windows = shared_windows;
  pair.token_sim = token_similarity(first, second);
  pair.tree_sim = tree_similarity(build_nesting_tree(first), build_nesting_tree(second));
  pair.combined = 0.5 * pair.token_sim + 0.5 * pair.tree_sim;
  pair.verdict = pair.combined >= cfg.theta_verify;
  if (stripped_text(first) == stripped_text(second)) {
    pair.category = CloneCategory::Type1;
  } else if (fingerprint(first) == fingerprint(second)) {
    pair.category = CloneCategory::Type2;
  } else if (pair.verdict) {
    pair.category = CloneCategory::Type3;
  } else {
    pair.category = CloneCategory::None;
  }
  pair.prov_a = {first.repo_id, first.file_path, first.start_line, first.end_line};
  pair.prov_b = {second.repo_id, second.file_path, second.start_line, second.end_line};
  return pair;
}

namespace detail {

inline bool spans_overlap(const FunctionRecord& a, const FunctionRecord& b) {
  return a.repo_id == b.repo_id && a.file_path == b.file_path &&
         a.start_line <= b.end_line && b.start_line <= a.end_line;
}

}  // namespace detail

/// Full pipeline for a batch of targets against an indexed pool: window
/// filter -> token filter -> verification. Reports verdict-true pairs only,
/// one entry per unordered pair, self and overlapping-span pairs excluded,
/// sorted by combined descending then (a, b).
///
/// `Pool` must expose `exemplars` (the pool-side FunctionRecords); GenePool
/// does. The window index must have been built from those exemplars.
template <class Pool>
std::vector<ClonePair> detect_clones(const std::vector<FunctionRecord>& targets, const Pool& pool,
                                     const WindowIndex& index, const CloneConfig& cfg,
                                     int jobs = 0) {
  std::map<std::uint64_t, const FunctionRecord*> pool_by_id;
  for (const FunctionRecord& r : pool.exemplars) pool_by_id[r.function_id] = &r;

  std::vector<std::vector<ClonePair>> per_target(targets.size());
  parallel_for(targets.size(), jobs, [&](std::size_t i) {
    const FunctionRecord& target = targets[i];
    for (const Candidate& cand : filter_candidates(target, index, cfg)) {
      if (cand.function_id == target.function_id) continue;  // self
      const FunctionRecord& other = *pool_by_id.at(cand.function_id);
      if (detail::spans_overlap(target, other)) continue;
      if (token_similarity(target, other) < cfg.theta_token) continue;
      ClonePair pair = verify(target, other, cfg, cand.shared_windows);
      if (!pair.verdict) continue;
      pair.pool_fingerprint = fingerprint(other);
      pair.target_function_id = target.function_id;
      per_target[i].push_back(std::move(pair));
    }
  });

  std::vector<ClonePair> out;
  std::set<std::pair<std::uint64_t, std::uint64_t>> seen;
  for (const auto& chunk : per_target) {
    for (const ClonePair& p : chunk) {
      if (seen.insert({p.a, p.b}).second) out.push_back(p);
    }
  }
  std::sort(out.begin(), out.end(), [](const ClonePair& x, const ClonePair& y) {
    if (x.combined != y.combined) return x.combined > y.combined;
    if (x.a != y.a) return x.a < y.a;
    return x.b < y.b;
  });
  return out;
}

}  // namespace sgp
