// sgp: software genome toolkit. Subcommands cover the pipeline end to end:
//   index   build a gene pool index from a corpus
//   select  partition repositories by thresholds, prioritize the excluded
//   rank    show the top-ranked genes of an index
//   clone   detect clones of a target against an index
//   deps    resolve a manifest against a registry snapshot
//   scan    full composition analysis report
//   diff    compare two indexes (added/removed/replaced genes)
//
// Exit codes: 0 clean, 1 findings present (scan), 2 usage, 3 input failure.

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "sgp/config.hpp"
#include "sgp/corpus.hpp"
#include "sgp/depgraph.hpp"
#include "sgp/genepool.hpp"
#include "sgp/metrics.hpp"
#include "sgp/sca.hpp"

namespace {

using nlohmann::ordered_json;

std::string now_iso8601() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw sgp::error("IoError", "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void print_diagnostics(const std::vector<sgp::Diagnostic>& diagnostics) {
  for (const auto& d : diagnostics) {
    std::cerr << "note [" << d.code << "]";
    if (d.line > 0) std::cerr << " line " << d.line;
    std::cerr << ": " << d.message << '\n';
  }
}

std::map<std::uint64_t, sgp::MetricSet> metrics_for(const sgp::Corpus& corpus,
                                                    const sgp::LanguageProfile& profile) {
  std::map<std::uint64_t, sgp::MetricSet> metrics;
  for (const auto& r : corpus.records) metrics[r.function_id] = sgp::compute_metrics(r, profile);
  return metrics;
}

void emit(const sgp::GlobalConfig& cfg, const ordered_json& body,
          const std::function<void()>& text_printer) {
  if (cfg.format == "json") {
    std::cout << body.dump(2) << '\n';
  } else {
    text_printer();
  }
}

// ---------------------------------------------------------------------------

int cmd_index(const sgp::GlobalConfig& cfg, const std::string& corpus_path,
              const std::string& out_dir) {
  const sgp::LanguageProfile& profile = sgp::find_profile(cfg.profile);
  sgp::Corpus corpus = sgp::load_corpus(corpus_path, profile);
  print_diagnostics(corpus.diagnostics);

  auto metrics = metrics_for(corpus, profile);
  sgp::GenePool pool = sgp::build_pool(corpus, metrics, cfg.weights, cfg.tau,
                                       cfg.selection.f_common, cfg.clone.n_lines, cfg.jobs);
  sgp::save_pool(pool, out_dir);

  ordered_json summary;
  summary["functions"] = corpus.records.size();
  summary["genes"] = pool.genes.size();
  summary["windows"] = pool.windows.postings.size();
  summary["out"] = out_dir;
  emit(cfg, summary, [&] {
    std::cout << "indexed " << corpus.records.size() << " functions into " << pool.genes.size()
              << " genes (" << pool.windows.postings.size() << " window hashes) at " << out_dir
              << '\n';
  });
  return 0;
}

int cmd_select(const sgp::GlobalConfig& cfg, const std::string& metadata_path) {
  auto metadata = sgp::load_repo_metadata(metadata_path);
  auto result = sgp::select_repos(metadata, cfg.selection);

  ordered_json body;
  ordered_json selected = ordered_json::array();
  for (const auto& r : result.selected) selected.push_back(r.repo_id);
  body["selected"] = std::move(selected);

  ordered_json excluded = ordered_json::array();
  std::vector<std::string> notices;
  if (result.excluded.empty()) {
    notices.push_back("no repositories excluded; LOF prioritization skipped");
  } else {
    auto prioritized = sgp::prioritize_excluded(result.excluded, cfg.selection.lof_k);
    for (const auto& d : prioritized.diagnostics) notices.push_back(d.message);
    for (std::size_t i = 0; i < prioritized.ordered.size(); ++i) {
      ordered_json e;
      e["repo_id"] = prioritized.ordered[i].repo_id;
      if (i < prioritized.scores.size()) e["lof"] = prioritized.scores[i];
      excluded.push_back(std::move(e));
    }
  }
  body["excluded_prioritized"] = std::move(excluded);
  body["notices"] = notices;

  emit(cfg, body, [&] {
    std::cout << "selected (" << body["selected"].size() << "):\n";
    for (const auto& id : body["selected"]) std::cout << "  " << id.get<std::string>() << '\n';
    std::cout << "excluded, LOF-prioritized (" << body["excluded_prioritized"].size() << "):\n";
    for (const auto& e : body["excluded_prioritized"]) {
      std::cout << "  " << e["repo_id"].get<std::string>();
      if (e.contains("lof")) std::cout << "  lof=" << e["lof"].get<double>();
      std::cout << '\n';
    }
    for (const auto& n : notices) std::cout << "note: " << n << '\n';
  });
  return 0;
}

int cmd_rank(const sgp::GlobalConfig& cfg, const std::string& index_dir, int top) {
  sgp::GenePool pool = sgp::load_pool(index_dir);
  std::vector<const sgp::Gene*> ranked;
  for (const auto& g : pool.genes) ranked.push_back(&g);
  std::sort(ranked.begin(), ranked.end(), [](const sgp::Gene* a, const sgp::Gene* b) {
    if (a->rank_score != b->rank_score) return a->rank_score > b->rank_score;
    return a->fingerprint < b->fingerprint;
  });
  if (top >= 0 && static_cast<std::size_t>(top) < ranked.size()) {
    ranked.resize(static_cast<std::size_t>(top));
  }

  ordered_json body = ordered_json::array();
  for (const sgp::Gene* g : ranked) {
    ordered_json e;
    e["fingerprint"] = sgp::to_hex16(g->fingerprint);
    e["rank_score"] = g->rank_score;
    e["value"] = g->value;
    e["frequency"] = g->frequency;
    e["repos"] = g->repos;
    body.push_back(std::move(e));
  }
  emit(cfg, body, [&] {
    for (const auto& e : body) {
      std::cout << e["fingerprint"].get<std::string>() << "  score=" << e["rank_score"].get<double>()
                << "  value=" << e["value"].get<double>() << "  freq=" << e["frequency"].get<int>()
                << '\n';
    }
  });
  return 0;
}

int cmd_clone(const sgp::GlobalConfig& cfg, const std::string& index_dir,
              const std::string& target_path) {
  sgp::GenePool pool = sgp::load_pool(index_dir);
  const sgp::LanguageProfile& profile = sgp::find_profile(cfg.profile);
  sgp::Corpus target = sgp::load_corpus(target_path, profile);
  print_diagnostics(target.diagnostics);

  sgp::CloneConfig clone_cfg = cfg.clone;
  clone_cfg.n_lines = pool.n_lines;
  for (const auto& d : clone_cfg.validate()) print_diagnostics({d});
  auto pairs = sgp::detect_clones(target.records, pool, pool.windows, clone_cfg, cfg.jobs);

  ordered_json body = ordered_json::array();
  for (const auto& p : pairs) body.push_back(sgp::detail::clone_to_json(p));
  emit(cfg, body, [&] {
    for (const auto& p : pairs) {
      std::cout << sgp::to_string(p.category) << "  combined=" << p.combined << "  "
                << p.prov_a.repo_id << ":" << p.prov_a.file_path << ":" << p.prov_a.start_line
                << " <-> " << p.prov_b.repo_id << ":" << p.prov_b.file_path << ":"
                << p.prov_b.start_line << '\n';
    }
    std::cout << pairs.size() << " clone pair(s)\n";
  });
  return 0;
}

int cmd_deps(const sgp::GlobalConfig& cfg, const std::string& manifest_path,
             const std::string& registry_path, const std::string& lineage_pkg) {
  sgp::Manifest manifest = sgp::parse_manifest(read_file(manifest_path));
  auto registry = sgp::RegistrySnapshot::from_json(nlohmann::json::parse(read_file(registry_path)));
  auto result = sgp::resolve(manifest, registry);

  ordered_json body;
  body["adapter"] = manifest.adapter;
  body["graph"] = sgp::detail::graph_to_json(result.graph);
  auto cycles = sgp::detect_cycles(result.graph);
  body["cycles"] = cycles;

  ordered_json lineage = ordered_json::array();
  if (!lineage_pkg.empty()) {
    for (const auto& node : result.graph.nodes) {
      if (sgp::split_node_id(node).first != lineage_pkg) continue;
      for (const auto& path : sgp::lineage_paths(result.graph, node)) {
        ordered_json steps = ordered_json::array();
        for (const auto& step : path) {
          ordered_json s;
          s["node"] = step.node;
          s["range"] = step.range_text;
          steps.push_back(std::move(s));
        }
        ordered_json entry;
        entry["node"] = node;
        entry["path"] = std::move(steps);
        lineage.push_back(std::move(entry));
      }
    }
    body["lineage"] = lineage;
  }
  if (result.error) body["error"] = result.error->message;

  emit(cfg, body, [&] {
    std::cout << "root: " << result.graph.root << '\n';
    for (const auto& e : result.graph.edges) {
      std::cout << "  " << e.from << " -> " << e.to << "  (" << e.range_text << ")\n";
    }
    for (const auto& c : cycles) {
      std::cout << "cycle:";
      for (const auto& n : c) std::cout << ' ' << n;
      std::cout << '\n';
    }
    for (const auto& entry : lineage) {
      std::cout << "lineage " << entry["node"].get<std::string>() << ":";
      for (const auto& s : entry["path"]) std::cout << " -> " << s["node"].get<std::string>();
      std::cout << '\n';
    }
    if (result.error) std::cout << "error: " << result.error->message << '\n';
  });
  return result.error ? 3 : 0;
}

int cmd_scan(const sgp::GlobalConfig& cfg, const std::string& target_path,
             const std::string& index_dir, const std::string& advisory_path,
             const std::string& manifest_path, const std::string& registry_path,
             const std::string& out_path) {
  sgp::GenePool pool = sgp::load_pool(index_dir);
  sgp::AdvisoryDb db = sgp::load_advisories(advisory_path);
  const sgp::LanguageProfile& profile = sgp::find_profile(cfg.profile);
  sgp::Corpus target = sgp::load_corpus(target_path, profile);
  print_diagnostics(target.diagnostics);

  std::optional<sgp::Manifest> manifest;
  std::optional<sgp::RegistrySnapshot> registry;
  if (!manifest_path.empty()) manifest = sgp::parse_manifest(read_file(manifest_path));
  if (!registry_path.empty()) {
    registry = sgp::RegistrySnapshot::from_json(nlohmann::json::parse(read_file(registry_path)));
  }

  sgp::ScaReport report =
      sgp::scan(target, target_path, pool, db, manifest, registry, cfg, now_iso8601());
  const ordered_json body = sgp::report_to_json(report);

  if (!out_path.empty()) {
    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw sgp::error("IoError", "cannot write " + out_path);
    out << body.dump(2) << '\n';
  }
  emit(cfg, body, [&] {
    std::cout << "scan of " << target_path << '\n';
    std::cout << "  components: " << report.components.size() << '\n';
    for (const auto& c : report.components) {
      std::cout << "    " << c.component;
      if (c.version) std::cout << '@' << c.version->str();
      std::cout << "  likelihood=" << c.likelihood << "  genes=" << c.matched_genes.size() << '\n';
    }
    std::cout << "  clones: " << report.clones.size() << '\n';
    std::cout << "  findings: " << report.findings.size() << '\n';
    for (const auto& f : report.findings) {
      std::cout << "    " << f.advisory_id << "  " << sgp::to_string(f.dimension)
                << "  severity=" << f.severity << '\n';
    }
    std::cout << "  portrait: " << report.portrait.total << '\n';
    for (const auto& n : report.notices) std::cout << "  note: " << n << '\n';
    if (!out_path.empty()) std::cout << "  report written to " << out_path << '\n';
  });
  return report.has_findings() ? 1 : 0;
}

int cmd_diff(const sgp::GlobalConfig& cfg, const std::string& old_dir, const std::string& new_dir,
             double theta_repl) {
  sgp::GenePool old_pool = sgp::load_pool(old_dir);
  sgp::GenePool new_pool = sgp::load_pool(new_dir);
  auto diff = sgp::diff_pools(old_pool, new_pool, theta_repl);

  ordered_json body;
  ordered_json added = ordered_json::array(), removed = ordered_json::array(),
               replaced = ordered_json::array();
  for (auto fp : diff.added) added.push_back(sgp::to_hex16(fp));
  for (auto fp : diff.removed) removed.push_back(sgp::to_hex16(fp));
  for (const auto& [o, n] : diff.replaced) {
    ordered_json e;
    e["old"] = sgp::to_hex16(o);
    e["new"] = sgp::to_hex16(n);
    replaced.push_back(std::move(e));
  }
  body["added"] = std::move(added);
  body["removed"] = std::move(removed);
  body["replaced"] = std::move(replaced);

  emit(cfg, body, [&] {
    std::cout << "added: " << diff.added.size() << ", removed: " << diff.removed.size()
              << ", replaced: " << diff.replaced.size() << '\n';
    for (const auto& e : body["replaced"]) {
      std::cout << "  " << e["old"].get<std::string>() << " -> " << e["new"].get<std::string>()
                << '\n';
    }
  });
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"software genome toolkit: gene indexing, clone detection, composition analysis"};
  app.require_subcommand(1);
  app.fallthrough();  // global flags may follow the subcommand

  std::string config_path, format;
  int jobs = -1;
  app.add_option("--config", config_path, "JSON config file (default: $SGP_CONFIG)");
  app.add_option("--format", format, "output format: text | json")
      ->check(CLI::IsMember({"text", "json"}));
  app.add_option("--jobs", jobs, "worker thread cap (0 = all cores)");

  // index
  auto* index = app.add_subcommand("index", "build a gene pool index from a corpus");
  std::string corpus_path, out_dir, profile_name, weights_text;
  int n_lines = 0, f_common = -1;
  double tau = -1.0;
  index->add_option("--corpus", corpus_path, "corpus JSONL or source directory")->required();
  index->add_option("--out", out_dir, "index directory to write")->required();
  index->add_option("--n-lines", n_lines, "window size in lines");
  index->add_option("--profile", profile_name, "language profile name");
  index->add_option("--tau", tau, "gene quantile to keep (0..1]");
  index->add_option("--weights", weights_text, "rank weights as WC,WV");
  index->add_option("--f-common", f_common, "common-frequency cap");

  // select
  auto* select = app.add_subcommand("select", "threshold selection + LOF prioritization");
  std::string metadata_path;
  select->add_option("--metadata", metadata_path, "RepoMetadata JSONL")->required();

  // rank
  auto* rank = app.add_subcommand("rank", "print top-ranked genes of an index");
  std::string rank_index;
  int top = 10;
  rank->add_option("--index", rank_index, "index directory")->required();
  rank->add_option("--top", top, "how many genes to print");

  // clone
  auto* clone = app.add_subcommand("clone", "detect clones of a target against an index");
  std::string clone_index, clone_target;
  double theta_token = -1.0, theta_verify = -1.0;
  int min_shared = 0;
  clone->add_option("--index", clone_index, "index directory")->required();
  clone->add_option("--target", clone_target, "target corpus JSONL or source directory")->required();
  clone->add_option("--theta-token", theta_token, "token filter threshold");
  clone->add_option("--theta-verify", theta_verify, "verification threshold");
  clone->add_option("--min-shared", min_shared, "window filter minimum");

  // deps
  auto* deps = app.add_subcommand("deps", "resolve a manifest against a registry snapshot");
  std::string manifest_path, registry_path, lineage_pkg;
  deps->add_option("--manifest", manifest_path, "manifest file")->required();
  deps->add_option("--registry", registry_path, "registry snapshot JSON")->required();
  deps->add_option("--lineage", lineage_pkg, "print root-to-node paths for this package");

  // scan
  auto* scan = app.add_subcommand("scan", "full composition analysis report");
  std::string scan_target, scan_index, scan_advisories, scan_manifest, scan_registry, scan_out;
  scan->add_option("--target", scan_target, "target corpus JSONL or source directory")->required();
  scan->add_option("--index", scan_index, "index directory")->required();
  scan->add_option("--advisories", scan_advisories, "advisory JSONL")->required();
  scan->add_option("--manifest", scan_manifest, "optional manifest file");
  scan->add_option("--registry", scan_registry, "optional registry snapshot JSON");
  scan->add_option("--out", scan_out, "write the JSON report here");

  // diff
  auto* diff = app.add_subcommand("diff", "compare two indexes");
  std::string old_dir, new_dir;
  double theta_repl = 0.7;
  diff->add_option("--old", old_dir, "old index directory")->required();
  diff->add_option("--new", new_dir, "new index directory")->required();
  diff->add_option("--theta-repl", theta_repl, "replacement pairing threshold");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    sgp::GlobalConfig cfg;
    if (config_path.empty()) {
      if (const char* env = std::getenv("SGP_CONFIG")) config_path = env;
    }
    if (!config_path.empty()) cfg.merge_file(config_path);

    // Flags override the config file.
    if (!format.empty()) cfg.format = format;
    if (jobs >= 0) cfg.jobs = jobs;
    if (index->parsed()) {
      if (!profile_name.empty()) cfg.profile = profile_name;
      if (n_lines > 0) cfg.clone.n_lines = n_lines;
      if (tau >= 0.0) cfg.tau = tau;
      if (f_common >= 0) cfg.selection.f_common = f_common;
      if (!weights_text.empty()) {
        const auto comma = weights_text.find(',');
        if (comma == std::string::npos) {
          throw sgp::error("InvalidConfig", "--weights expects WC,WV");
        }
        cfg.weights.w_centrality = std::stod(weights_text.substr(0, comma));
        cfg.weights.w_value = std::stod(weights_text.substr(comma + 1));
      }
    }
    if (clone->parsed()) {
      if (theta_token >= 0.0) cfg.clone.theta_token = theta_token;
      if (theta_verify >= 0.0) cfg.clone.theta_verify = theta_verify;
      if (min_shared > 0) cfg.clone.min_shared = min_shared;
    }
    cfg.validate();

    if (index->parsed()) return cmd_index(cfg, corpus_path, out_dir);
    if (select->parsed()) return cmd_select(cfg, metadata_path);
    if (rank->parsed()) return cmd_rank(cfg, rank_index, top);
    if (clone->parsed()) return cmd_clone(cfg, clone_index, clone_target);
    if (deps->parsed()) return cmd_deps(cfg, manifest_path, registry_path, lineage_pkg);
    if (scan->parsed()) {
      return cmd_scan(cfg, scan_target, scan_index, scan_advisories, scan_manifest, scan_registry,
                      scan_out);
    }
    if (diff->parsed()) return cmd_diff(cfg, old_dir, new_dir, theta_repl);
    return 2;
  } catch (const sgp::error& e) {
    std::cerr << "error [" << e.code() << "]: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
}
