#pragma once

// Per-repository call graph from name-based call-site resolution, and exact
// degree / closeness / betweenness centrality on its undirected view.

#include <algorithm>
#include <cstdint>
#include <deque>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "sgp/common.hpp"
#include "sgp/extract.hpp"

namespace sgp {

struct CallGraph {
  std::vector<std::uint64_t> nodes;                               // sorted function ids
  std::vector<std::pair<std::uint64_t, std::uint64_t>> edges;     // caller -> callee, sorted, deduped
};

/// A call site is an identifier immediately followed by '('. Resolution is
/// by name: an edge goes to every same-repo function with that name (all of
/// them on ambiguity — over-approximation beats silent misses here). The
/// record's own signature occurrence is not a call site; self-edges are
/// dropped.
inline CallGraph build_call_graph(const std::vector<FunctionRecord>& repo_functions) {
  CallGraph g;
  std::map<std::string, std::vector<std::uint64_t>> by_name;
  for (const FunctionRecord& f : repo_functions) {
    g.nodes.push_back(f.function_id);
    by_name[f.name].push_back(f.function_id);
  }
  std::sort(g.nodes.begin(), g.nodes.end());

  std::set<std::pair<std::uint64_t, std::uint64_t>> edges;
  for (const FunctionRecord& f : repo_functions) {
    bool signature_skipped = false;
    const auto& toks = f.tokens;
    for (std::size_t i = 0; i < toks.size(); ++i) {
      if (toks[i].kind != TokenKind::Identifier) continue;
      std::size_t next = detail::skip_comments(toks, i + 1);
      if (next >= toks.size() || !detail::is_punct(toks[next], '(')) continue;
      if (!signature_skipped && toks[i].lexeme == f.name) {
        signature_skipped = true;  // the definition itself
        continue;
      }
      auto it = by_name.find(toks[i].lexeme);
      if (it == by_name.end()) continue;
      for (std::uint64_t callee : it->second) {
        if (callee != f.function_id) edges.insert({f.function_id, callee});
      }
    }
  }
  g.edges.assign(edges.begin(), edges.end());
  return g;
}

struct CentralityScores {
  double degree = 0.0;
  double closeness = 0.0;
  double betweenness = 0.0;
};

/// Exact centralities on the undirected simple view of the graph.
///
/// degree: neighbor count. closeness: Wasserman-Faust composite
/// (r/(n-1))*(r/sum of distances) over the r reachable nodes, 0 for
/// isolated nodes. betweenness: unordered source/target pairs whose
/// shortest paths pass through the node, fractionally credited across
/// multiple shortest paths (Brandes accumulation halved).
inline std::map<std::uint64_t, CentralityScores> centrality(const CallGraph& g) {
  const std::size_t n = g.nodes.size();
  std::map<std::uint64_t, std::size_t> index;
  for (std::size_t i = 0; i < n; ++i) index[g.nodes[i]] = i;

  std::vector<std::set<std::size_t>> adj(n);
  for (const auto& [from, to] : g.edges) {
    const std::size_t a = index.at(from), b = index.at(to);
    if (a == b) continue;
    adj[a].insert(b);
    adj[b].insert(a);
  }

  std::vector<CentralityScores> scores(n);
  for (std::size_t i = 0; i < n; ++i) {
    scores[i].degree = static_cast<double>(adj[i].size());
  }

  std::vector<double> betweenness(n, 0.0);
  for (std::size_t s = 0; s < n; ++s) {
    // Brandes: BFS with shortest-path counts, then dependency accumulation.
    std::vector<long long> sigma(n, 0);
    std::vector<int> distv(n, -1);
    std::vector<std::vector<std::size_t>> preds(n);
    std::vector<std::size_t> order;
    sigma[s] = 1;
    distv[s] = 0;
    std::deque<std::size_t> queue{s};
    while (!queue.empty()) {
      const std::size_t v = queue.front();
      queue.pop_front();
      order.push_back(v);
      for (std::size_t w : adj[v]) {
        if (distv[w] < 0) {
          distv[w] = distv[v] + 1;
          queue.push_back(w);
        }
        if (distv[w] == distv[v] + 1) {
          sigma[w] += sigma[v];
          preds[w].push_back(v);
        }
      }
    }

    long long reachable = 0;
    long long dist_sum = 0;
    for (std::size_t v = 0; v < n; ++v) {
      if (v != s && distv[v] >= 0) {
        ++reachable;
        dist_sum += distv[v];
      }
    }
    if (reachable > 0 && n > 1) {
      const double r = static_cast<double>(reachable);
      scores[s].closeness =
          (r / static_cast<double>(n - 1)) * (r / static_cast<double>(dist_sum));
    }

    std::vector<double> delta(n, 0.0);
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
      const std::size_t w = *it;
      for (std::size_t v : preds[w]) {
        delta[v] += static_cast<double>(sigma[v]) / static_cast<double>(sigma[w]) * (1.0 + delta[w]);
      }
      if (w != s) betweenness[w] += delta[w];
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    scores[i].betweenness = betweenness[i] / 2.0;  // unordered pairs
  }

  std::map<std::uint64_t, CentralityScores> out;
  for (std::size_t i = 0; i < n; ++i) out[g.nodes[i]] = scores[i];
  return out;
}

}  // namespace sgp
