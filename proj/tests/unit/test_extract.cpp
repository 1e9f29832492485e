#include <catch2/catch_amalgamated.hpp>

#include "sgp/corpus.hpp"
#include "sgp/extract.hpp"

#include "../support/builders.hpp"

using sgp::extract_functions;
using sgp::FunctionRecord;

namespace {

const std::string kTwoFunctions = R"(int add(int a, int b) {
  return a + b;
}

int sub(int a, int b) {
  return a - b;
}
)";

}  // namespace

TEST_CASE("two top-level functions extract with names and spans", "[extract]") {
  auto result = extract_functions(kTwoFunctions, sgp::c_like_profile(), "repo", "math.c");
  REQUIRE(result.records.size() == 2);
  CHECK(result.records[0].name == "add");
  CHECK(result.records[0].start_line == 1);
  CHECK(result.records[0].end_line == 3);
  CHECK(result.records[0].line_count == 3);
  CHECK(result.records[1].name == "sub");
  CHECK(result.records[1].start_line == 5);
  CHECK(result.records[1].end_line == 7);
}

TEST_CASE("declarations only yield no records", "[extract]") {
  auto result =
      extract_functions("int x = 1;\nextern int f(int);\n", sgp::c_like_profile(), "r", "f.c");
  CHECK(result.records.empty());
  CHECK(result.diagnostics.empty());
}

TEST_CASE("nested local function stays inside the outer record", "[extract]") {
  const std::string src = R"(int outer() {
  int inner(int x) { return x; }
  return inner(1);
}
)";
  auto result = extract_functions(src, sgp::c_like_profile(), "r", "f.c");
  REQUIRE(result.records.size() == 1);
  CHECK(result.records[0].name == "outer");
  CHECK(result.records[0].end_line == 4);
}

TEST_CASE("class-level methods extract", "[extract]") {
  const std::string src = R"(class Greeter {
  void hello() { x = 1; }
  int twice(int v) { return v * 2; }
};
)";
  auto result = extract_functions(src, sgp::c_like_profile(), "r", "g.cc");
  REQUIRE(result.records.size() == 2);
  CHECK(result.records[0].name == "hello");
  CHECK(result.records[1].name == "twice");
}

TEST_CASE("unbalanced braces skip the file with a diagnostic", "[extract]") {
  auto result = extract_functions("int f() { {\n", sgp::c_like_profile(), "r", "bad.c");
  CHECK(result.records.empty());
  REQUIRE(result.diagnostics.size() == 1);
  CHECK(result.diagnostics[0].code == "UnbalancedBraces");
}

TEST_CASE("control flow at top level is not a function", "[extract]") {
  auto result = extract_functions("int g() {\n  if (x) { y(); }\n  while (z) { }\n  return 0;\n}\n",
                                  sgp::c_like_profile(), "r", "f.c");
  REQUIRE(result.records.size() == 1);
  CHECK(result.records[0].name == "g");
}

TEST_CASE("span soundness: re-tokenizing the sliced lines reproduces the tokens", "[extract]") {
  const std::string src = kTwoFunctions;
  auto result = extract_functions(src, sgp::c_like_profile(), "repo", "math.c");
  REQUIRE(result.records.size() == 2);

  std::vector<std::string> lines;
  std::string cur;
  for (char c : src) {
    if (c == '\n') {
      lines.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  lines.push_back(cur);

  for (const FunctionRecord& rec : result.records) {
    std::string slice;
    for (int ln = rec.start_line; ln <= rec.end_line; ++ln) {
      slice += lines[static_cast<std::size_t>(ln - 1)];
      slice += '\n';
    }
    auto relexed = sgp::tokenize(slice, sgp::c_like_profile()).tokens;
    REQUIRE(relexed.size() == rec.tokens.size());
    for (std::size_t i = 0; i < relexed.size(); ++i) {
      CHECK(relexed[i].kind == rec.tokens[i].kind);
      CHECK(relexed[i].lexeme == rec.tokens[i].lexeme);
      CHECK(relexed[i].line == rec.tokens[i].line - rec.start_line + 1);
    }
  }
}

TEST_CASE("extraction is deterministic", "[extract]") {
  auto a = extract_functions(kTwoFunctions, sgp::c_like_profile(), "repo", "math.c");
  auto b = extract_functions(kTwoFunctions, sgp::c_like_profile(), "repo", "math.c");
  CHECK(a.records == b.records);
  CHECK(a.records[0].function_id == b.records[0].function_id);
}

// ---------------------------------------------------------------------------
// Nesting tree

TEST_CASE("empty body tree is a single node", "[extract][tree]") {
  auto rec = testkit::make_record("{ }");
  auto tree = sgp::build_nesting_tree(rec);
  CHECK(tree.node_count == 1);
  CHECK(tree.children.empty());
}

TEST_CASE("two sibling blocks give node_count 3", "[extract][tree]") {
  auto rec = testkit::make_record("{ { } { } }");
  auto tree = sgp::build_nesting_tree(rec);
  CHECK(tree.node_count == 3);
  REQUIRE(tree.children.size() == 2);
  CHECK(tree.children[0].node_count == 1);
}

TEST_CASE("identifier renaming preserves the root subtree hash", "[extract][tree]") {
  auto a = testkit::make_record("int f(int alpha) { alpha = alpha + 1; return alpha; }");
  auto b = testkit::make_record("int f(int beta) { beta = beta + 1; return beta; }");
  CHECK(sgp::build_nesting_tree(a).subtree_hash == sgp::build_nesting_tree(b).subtree_hash);

  auto c = testkit::make_record("int f(int beta) { beta = beta - 1; return beta; }");
  CHECK(sgp::build_nesting_tree(a).subtree_hash != sgp::build_nesting_tree(c).subtree_hash);
}

TEST_CASE("children are strictly nested and pairwise disjoint", "[extract][tree]") {
  auto rec = testkit::make_record("int f() { if (x) { y(); } else { while (z) { } } return 0; }");
  auto tree = sgp::build_nesting_tree(rec);
  std::vector<const sgp::NestingTree*> nodes;
  sgp::collect_nodes(tree, nodes);
  for (const sgp::NestingTree* node : nodes) {
    int counted = 1;
    for (std::size_t i = 0; i < node->children.size(); ++i) {
      const auto& c = node->children[i];
      CHECK(c.begin > node->begin);
      CHECK(c.end < node->end);
      if (i + 1 < node->children.size()) CHECK(c.end < node->children[i + 1].begin);
      counted += c.node_count;
    }
    CHECK(node->node_count == counted);
  }
}

TEST_CASE("every body token has exactly one deepest owning node", "[extract][tree]") {
  auto rec = testkit::make_record("int f() { a; { b; { c; } } { d; } }");
  auto tree = sgp::build_nesting_tree(rec);
  std::vector<const sgp::NestingTree*> nodes;
  sgp::collect_nodes(tree, nodes);
  for (std::size_t i = tree.begin; i <= tree.end; ++i) {
    int holders = 0;
    for (const sgp::NestingTree* node : nodes) {
      if (node->begin <= i && i <= node->end) {
        bool in_child = false;
        for (const auto& c : node->children) {
          if (c.begin <= i && i <= c.end) in_child = true;
        }
        if (!in_child) ++holders;
      }
    }
    CHECK(holders == 1);
  }
}

// ---------------------------------------------------------------------------
// Corpus round trip

TEST_CASE("store then load corpus is the identity", "[extract][corpus]") {
  testkit::TempDir tmp("corpus");
  sgp::Corpus corpus;
  corpus.records = extract_functions(kTwoFunctions, sgp::c_like_profile(), "repo", "math.c").records;

  const auto path = tmp.path() / "corpus.jsonl";
  sgp::store_corpus(corpus, path);
  sgp::Corpus loaded = sgp::load_corpus(path);
  CHECK(loaded == corpus);

  // Round trip is also byte stable.
  const auto path2 = tmp.path() / "again.jsonl";
  sgp::store_corpus(loaded, path2);
  CHECK(testkit::read_file(path) == testkit::read_file(path2));
}

TEST_CASE("missing tokens field reports MissingField", "[extract][corpus]") {
  testkit::TempDir tmp("corpus_bad");
  const auto path = tmp.path() / "bad.jsonl";
  testkit::write_file(path,
                      R"({"function_id":"00000000000000aa","repo_id":"r","file_path":"f","name":"g","start_line":1,"end_line":1})"
                      "\n");
  try {
    sgp::load_corpus(path);
    FAIL("expected MissingField");
  } catch (const sgp::error& e) {
    CHECK(e.code() == "MissingField");
    CHECK(std::string(e.what()).find("tokens") != std::string::npos);
  }
}

TEST_CASE("malformed JSONL line reports its line number", "[extract][corpus]") {
  testkit::TempDir tmp("corpus_bad2");
  const auto path = tmp.path() / "bad.jsonl";
  sgp::Corpus one;
  one.records.push_back(testkit::make_record("int f() { }"));
  sgp::store_corpus(one, path);
  testkit::write_file(tmp.path() / "bad2.jsonl", testkit::read_file(path) + "{not json\n");
  try {
    sgp::load_corpus(tmp.path() / "bad2.jsonl");
    FAIL("expected MalformedLine");
  } catch (const sgp::error& e) {
    CHECK(e.code() == "MalformedLine");
    CHECK(std::string(e.what()).find("2") != std::string::npos);
  }
}

TEST_CASE("directory input runs extraction per file", "[extract][corpus]") {
  testkit::TempDir tmp("corpus_dir");
  testkit::write_file(tmp.path() / "src" / "repoA" / "one.c",
                      "int f() { return 1; }\nint g() { return 2; }\n");
  testkit::write_file(tmp.path() / "src" / "repoB" / "two.c", "int h() { return 3; }\n");
  sgp::Corpus corpus = sgp::load_corpus(tmp.path() / "src");
  REQUIRE(corpus.records.size() == 3);
  CHECK(corpus.records[0].repo_id == "repoA");
  CHECK(corpus.records[2].repo_id == "repoB");
  CHECK(corpus.records[2].name == "h");
}
