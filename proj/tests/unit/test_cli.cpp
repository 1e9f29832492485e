// End-to-end checks through the built binary: exit codes, determinism of
// the index directory, config precedence. SGP_CLI_PATH is injected by the
// build.

#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <sstream>
#include <string>

#include <json.hpp>

#include "../support/builders.hpp"

#ifndef SGP_CLI_PATH
#error "SGP_CLI_PATH must point at the sgp binary"
#endif

namespace {

struct RunResult {
  int exit_code = -1;
  std::string stdout_text;
};

RunResult run(const std::string& args, const std::filesystem::path& scratch) {
  const auto out_file = scratch / ("stdout_" + std::to_string(::rand()) + ".txt");
  const std::string cmd = std::string(SGP_CLI_PATH) + " " + args + " > " + out_file.string() +
                          " 2> " + (scratch / "stderr.txt").string();
  const int status = std::system(cmd.c_str());
  RunResult result;
  result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  result.stdout_text = testkit::read_file(out_file);
  return result;
}

const std::string kPoolSources[] = {
    "int alpha(int a) {\n  a = a + 1;\n  a = a * 2;\n  a = a - 3;\n  return a;\n}\n",
    "int beta(int b) {\n  while (b > 0) {\n    b = b - 2;\n  }\n  return b;\n}\n",
    "int gamma(int c) {\n  if (c > 10) {\n    c = c / 2;\n  }\n  return c;\n}\n",
    "int steal(int s) {\n  s = s ^ 42;\n  send(s, 1);\n  send(s, 2);\n  return s;\n}\n",
};

// Lays out a small end-to-end world: pool sources, target sources embedding
// the pool genes, an advisory db (one per-gene, one per-package), manifest
// and registry.
struct World {
  testkit::TempDir tmp{"cli"};
  std::filesystem::path corpus_dir, target_dir, index_dir, advisories, manifest, registry;

  World() {
    corpus_dir = tmp.path() / "corpus";
    testkit::write_file(corpus_dir / "X@1.2.0" / "a.c", kPoolSources[0]);
    testkit::write_file(corpus_dir / "X@1.2.0" / "b.c", kPoolSources[1]);
    testkit::write_file(corpus_dir / "X@1.2.0" / "c.c", kPoolSources[2]);
    testkit::write_file(corpus_dir / "evil" / "steal.c", kPoolSources[3]);

    target_dir = tmp.path() / "target";
    testkit::write_file(target_dir / "app" / "one.c", kPoolSources[0]);
    testkit::write_file(target_dir / "app" / "two.c", kPoolSources[1]);
    testkit::write_file(target_dir / "app" / "three.c", kPoolSources[2]);
    testkit::write_file(target_dir / "app" / "util.c", kPoolSources[3]);

    index_dir = tmp.path() / "index";

    // The defective fingerprint must match the pool's steal().
    auto rec = sgp::extract_functions(kPoolSources[3], sgp::c_like_profile(), "evil", "steal.c");
    const std::string fp = sgp::to_hex16(sgp::fingerprint(rec.records.at(0)));
    advisories = tmp.path() / "advisories.jsonl";
    testkit::write_file(
        advisories,
        R"({"id":"V1","kind":"vulnerability","ecosystem":"npm","package":"B","affected":["<1.3.0"],"severity":7.5})"
        "\n"
        R"({"id":"G1","kind":"malicious","severity":9.0,"gene_fingerprints":[")" + fp + R"("]})"
        "\n");

    manifest = tmp.path() / "manifest.json";
    testkit::write_file(
        manifest,
        R"({"ecosystem":"npm","name":"app","version":"1.0.0","dependencies":[{"name":"B","range":"^1.0.0"}]})");
    registry = tmp.path() / "registry.json";
    testkit::write_file(registry,
                        R"({"B":[{"version":"1.0.0"},{"version":"1.2.0"},{"version":"2.0.0"}]})");
  }
};

std::string dir_digest(const std::filesystem::path& dir) {
  std::string all;
  std::vector<std::filesystem::path> files;
  for (const auto& e : std::filesystem::recursive_directory_iterator(dir)) {
    if (e.is_regular_file()) files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  for (const auto& f : files) {
    all += f.filename().string();
    all += '\0';
    all += testkit::read_file(f);
    all += '\0';
  }
  return all;
}

}  // namespace

TEST_CASE("index is deterministic and scan gates on findings", "[cli]") {
  World world;

  auto idx = run("index --corpus " + world.corpus_dir.string() + " --out " +
                     world.index_dir.string() + " --tau 1.0",
                 world.tmp.path());
  REQUIRE(idx.exit_code == 0);

  // Two repos, four distinct fingerprints, tau 1.0: four genes on disk.
  {
    std::istringstream genes(testkit::read_file(world.index_dir / "genes.jsonl"));
    std::string line;
    int count = 0;
    while (std::getline(genes, line)) {
      if (!line.empty()) ++count;
    }
    CHECK(count == 4);
  }

  // Rerun into a second directory: byte-identical content.
  auto idx2 = run("index --corpus " + world.corpus_dir.string() + " --out " +
                      (world.tmp.path() / "index2").string() + " --tau 1.0",
                  world.tmp.path());
  REQUIRE(idx2.exit_code == 0);
  CHECK(dir_digest(world.index_dir) == dir_digest(world.tmp.path() / "index2"));

  // Planted scan: findings -> exit 1, report contents as expected.
  const auto report_path = world.tmp.path() / "report.json";
  auto scan = run("scan --target " + world.target_dir.string() + " --index " +
                      world.index_dir.string() + " --advisories " + world.advisories.string() +
                      " --manifest " + world.manifest.string() + " --registry " +
                      world.registry.string() + " --out " + report_path.string(),
                  world.tmp.path());
  CHECK(scan.exit_code == 1);

  auto report = nlohmann::json::parse(testkit::read_file(report_path));
  bool has_x = false;
  for (const auto& c : report["components"]) {
    if (c["component"] == "X") {
      has_x = true;
      CHECK(c["matched_genes"].size() == 3);
      CHECK(c["version"] == "1.2.0");
    }
  }
  CHECK(has_x);
  bool v1 = false, g1 = false;
  for (const auto& f : report["findings"]) {
    if (f["advisory_id"] == "V1") v1 = true;
    if (f["advisory_id"] == "G1") g1 = true;
  }
  CHECK(v1);
  CHECK(g1);
  CHECK(report["portrait"]["total"].get<double>() > 0.0);

  // Scan twice: identical modulo timestamp.
  const auto report2_path = world.tmp.path() / "report2.json";
  auto scan2 = run("scan --target " + world.target_dir.string() + " --index " +
                       world.index_dir.string() + " --advisories " + world.advisories.string() +
                       " --manifest " + world.manifest.string() + " --registry " +
                       world.registry.string() + " --out " + report2_path.string(),
                   world.tmp.path());
  CHECK(scan2.exit_code == 1);
  auto r1 = nlohmann::json::parse(testkit::read_file(report_path));
  auto r2 = nlohmann::json::parse(testkit::read_file(report2_path));
  r1["meta"]["timestamp"] = "";
  r2["meta"]["timestamp"] = "";
  CHECK(r1.dump() == r2.dump());

  // Clean scan: empty advisories and no manifest -> exit 0.
  const auto empty_adv = world.tmp.path() / "none.jsonl";
  testkit::write_file(empty_adv, "");
  auto clean = run("scan --target " + world.target_dir.string() + " --index " +
                       world.index_dir.string() + " --advisories " + empty_adv.string(),
                   world.tmp.path());
  CHECK(clean.exit_code == 0);
}

TEST_CASE("usage and input failures use exit codes 2 and 3", "[cli]") {
  World world;
  CHECK(run("index --corpus only", world.tmp.path()).exit_code == 2);  // missing --out
  CHECK(run("nonsense", world.tmp.path()).exit_code == 2);
  CHECK(run("index --corpus /does/not/exist --out " + (world.tmp.path() / "x").string(),
            world.tmp.path())
            .exit_code == 3);
  CHECK(run("rank --index /does/not/exist", world.tmp.path()).exit_code == 3);
}

TEST_CASE("rank respects --top 0 and deps prints lineage", "[cli]") {
  World world;
  REQUIRE(run("index --corpus " + world.corpus_dir.string() + " --out " +
                  world.index_dir.string() + " --tau 1.0",
              world.tmp.path())
              .exit_code == 0);

  auto top0 = run("--format json rank --index " + world.index_dir.string() + " --top 0",
                  world.tmp.path());
  CHECK(top0.exit_code == 0);
  CHECK(nlohmann::json::parse(top0.stdout_text).empty());

  auto deps = run("--format json deps --manifest " + world.manifest.string() + " --registry " +
                      world.registry.string() + " --lineage B",
                  world.tmp.path());
  CHECK(deps.exit_code == 0);
  auto body = nlohmann::json::parse(deps.stdout_text);
  REQUIRE(body["lineage"].size() == 1);
  CHECK(body["lineage"][0]["node"] == "B@1.2.0");

  auto select = run("--format json select --metadata /does/not/exist", world.tmp.path());
  CHECK(select.exit_code == 3);
}

TEST_CASE("config precedence: defaults < file < flags", "[cli]") {
  World world;
  // Config file lowers tau to 0.25; the flag then overrides it to 1.0.
  const auto cfg_path = world.tmp.path() / "config.json";
  testkit::write_file(cfg_path, R"({"tau":0.25,"format":"json"})");

  // Layer 1: defaults (tau 0.2 of 4 genes -> ceil(0.8) = 1 gene).
  auto defaults = run("index --corpus " + world.corpus_dir.string() + " --out " +
                          (world.tmp.path() / "i_default").string(),
                      world.tmp.path());
  REQUIRE(defaults.exit_code == 0);
  auto meta_default = nlohmann::json::parse(
      testkit::read_file(world.tmp.path() / "i_default" / "meta.json"));
  CHECK(meta_default["tau"].get<double>() == 0.2);

  // Layer 2: config file.
  auto from_file = run("--config " + cfg_path.string() + " index --corpus " +
                           world.corpus_dir.string() + " --out " +
                           (world.tmp.path() / "i_file").string(),
                       world.tmp.path());
  REQUIRE(from_file.exit_code == 0);
  auto meta_file =
      nlohmann::json::parse(testkit::read_file(world.tmp.path() / "i_file" / "meta.json"));
  CHECK(meta_file["tau"].get<double>() == 0.25);

  // Layer 3: flag wins over the file.
  auto from_flag = run("--config " + cfg_path.string() + " index --corpus " +
                           world.corpus_dir.string() + " --out " +
                           (world.tmp.path() / "i_flag").string() + " --tau 1.0",
                       world.tmp.path());
  REQUIRE(from_flag.exit_code == 0);
  auto meta_flag =
      nlohmann::json::parse(testkit::read_file(world.tmp.path() / "i_flag" / "meta.json"));
  CHECK(meta_flag["tau"].get<double>() == 1.0);

  // SGP_CONFIG names the default config file.
  const std::string env_cmd = "SGP_CONFIG=" + cfg_path.string() + " " + SGP_CLI_PATH +
                              " index --corpus " + world.corpus_dir.string() + " --out " +
                              (world.tmp.path() / "i_env").string() + " > /dev/null 2>&1";
  REQUIRE(std::system(env_cmd.c_str()) == 0);
  auto meta_env =
      nlohmann::json::parse(testkit::read_file(world.tmp.path() / "i_env" / "meta.json"));
  CHECK(meta_env["tau"].get<double>() == 0.25);
}

TEST_CASE("every command with --format json emits parseable JSON", "[cli]") {
  World world;
  REQUIRE(run("index --corpus " + world.corpus_dir.string() + " --out " +
                  world.index_dir.string() + " --tau 1.0 --format json",
              world.tmp.path())
              .exit_code == 0);

  const auto meta_path = world.tmp.path() / "repos.jsonl";
  testkit::write_file(
      meta_path,
      R"({"repo_id":"a","url":"u","stars":10,"forks":2,"issues":1,"commits":50,"contributors":3})"
      "\n");

  const std::vector<std::string> commands = {
      "--format json rank --index " + world.index_dir.string(),
      "--format json clone --index " + world.index_dir.string() + " --target " +
          world.target_dir.string(),
      "--format json deps --manifest " + world.manifest.string() + " --registry " +
          world.registry.string(),
      "--format json diff --old " + world.index_dir.string() + " --new " +
          world.index_dir.string(),
      "--format json select --metadata " + meta_path.string(),
  };
  for (const auto& cmd : commands) {
    auto result = run(cmd, world.tmp.path());
    INFO(cmd);
    CHECK(result.exit_code == 0);
    CHECK_FALSE(nlohmann::json::parse(result.stdout_text, nullptr, false).is_discarded());
  }

  // diff of an index against itself is empty.
  auto diffed = nlohmann::json::parse(
      run("--format json diff --old " + world.index_dir.string() + " --new " +
              world.index_dir.string(),
          world.tmp.path())
          .stdout_text);
  CHECK(diffed["added"].empty());
  CHECK(diffed["removed"].empty());
  CHECK(diffed["replaced"].empty());

  // All-zero thresholds exclude nothing; prioritization is skipped loudly.
  auto selected = nlohmann::json::parse(
      run("--format json select --metadata " + meta_path.string(), world.tmp.path()).stdout_text);
  CHECK(selected["excluded_prioritized"].empty());
  REQUIRE_FALSE(selected["notices"].empty());
  CHECK(selected["notices"][0].get<std::string>().find("skipped") != std::string::npos);
}
