#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "sgp/metrics.hpp"

#include "../support/builders.hpp"
#include "../support/oracles.hpp"

using Catch::Approx;
using sgp::function_value;

TEST_CASE("value anchors", "[metrics]") {
  CHECK(function_value(1, 1, 1) == 170.77);
  CHECK(function_value(0, 1, 1) == 170.77);  // hv floored at 1
  // Frozen from the extended-precision oracle; the (1000, 10, 100) point.
  CHECK(function_value(1000, 10, 100) ==
        Approx(58.17591553628579).epsilon(0).margin(1e-6));
  CHECK(static_cast<double>(oracle::value_formula(1000.0L, 10.0L, 100.0L)) ==
        Approx(58.17591553628579).epsilon(0).margin(1e-9));
}

TEST_CASE("value matches the extended-precision oracle on random triples", "[metrics]") {
  std::mt19937 rng(1234);
  std::uniform_real_distribution<double> hv(1.0, 1e6);
  std::uniform_int_distribution<int> cc(1, 200);
  std::uniform_int_distribution<int> loc(1, 10000);
  for (int i = 0; i < 500; ++i) {
    const double h = hv(rng);
    const int c = cc(rng), l = loc(rng);
    const double got = function_value(h, c, l);
    const double want = static_cast<double>(
        oracle::value_formula(static_cast<long double>(h), c, l));
    CHECK(got == Approx(want).epsilon(0).margin(1e-9));
  }
}

TEST_CASE("value rejects out-of-domain inputs", "[metrics]") {
  CHECK_THROWS_AS(function_value(1, 0, 1), sgp::error);
  CHECK_THROWS_AS(function_value(1, 1, 0), sgp::error);
}

TEST_CASE("value strictly decreases in each argument", "[metrics]") {
  std::mt19937 rng(77);
  std::uniform_real_distribution<double> hv(2.0, 1e5);
  std::uniform_int_distribution<int> cc(1, 100);
  std::uniform_int_distribution<int> loc(1, 5000);
  for (int i = 0; i < 200; ++i) {
    const double h = hv(rng);
    const int c = cc(rng), l = loc(rng);
    const double base = function_value(h, c, l);
    CHECK(function_value(h * 1.5, c, l) < base);
    CHECK(function_value(h, c + 1, l) < base);
    CHECK(function_value(h, c, l + 1) < base);
  }
}

TEST_CASE("halstead and cyclomatic counting", "[metrics]") {
  // N=10, eta=4 -> HV = 10 * log2(4) = 20
  auto rec = testkit::make_record("a a a b b b c c c d");
  rec.line_count = 1;
  auto m = sgp::compute_metrics(rec, sgp::c_like_profile());
  CHECK(m.halstead_volume == Approx(20.0));
  CHECK(m.cyclomatic == 1);

  // Single distinct token: HV = log2(1) = 0, value clamps it to 1.
  auto single = testkit::make_record("x");
  auto ms = sgp::compute_metrics(single, sgp::c_like_profile());
  CHECK(ms.halstead_volume == 0.0);
  CHECK(ms.value == Approx(170.77));

  // if, while, && once each with the c_like branch set -> CC = 4.
  auto branchy = testkit::make_record("if (a && b) { } while (c) { }");
  CHECK(sgp::compute_metrics(branchy, sgp::c_like_profile()).cyclomatic == 4);

  // Comments are excluded from every count.
  auto commented = testkit::make_record("x /* if while && */ // if\n");
  CHECK(sgp::compute_metrics(commented, sgp::c_like_profile()).cyclomatic == 1);
  CHECK(sgp::compute_metrics(commented, sgp::c_like_profile()).halstead_volume == 0.0);
}

TEST_CASE("repo contribution hand cases", "[metrics]") {
  using sgp::ValuedFunction;
  // [(8,1),(6,3)], f_common=100: sum = 8/1 + 6/3 = 10; unique/all = 1/2 -> 5
  auto stats = sgp::repo_contribution({{8, 1}, {6, 3}}, 100);
  CHECK(stats.contribution == Approx(5.0));
  CHECK(stats.unique_func_count == 1);
  CHECK(stats.function_count == 2);

  CHECK(sgp::repo_contribution({}, 100).contribution == 0.0);

  // Everything more common than f_common contributes nothing.
  CHECK(sgp::repo_contribution({{8, 50}, {6, 50}}, 10).contribution == 0.0);

  // Negative values floor to zero.
  CHECK(sgp::repo_contribution({{-5, 1}}, 100).contribution == 0.0);
}

TEST_CASE("contribution bounds", "[metrics]") {
  std::mt19937 rng(42);
  std::uniform_real_distribution<double> value(-10.0, 50.0);
  std::uniform_int_distribution<int> freq(1, 120);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<sgp::ValuedFunction> funcs;
    double cap = 0.0;
    const int n = std::uniform_int_distribution<int>(1, 20)(rng);
    for (int i = 0; i < n; ++i) {
      funcs.push_back({value(rng), freq(rng)});
      cap += std::max(funcs.back().value, 0.0);
    }
    const double c = sgp::repo_contribution(funcs, 100).contribution;
    CHECK(c >= 0.0);
    CHECK(c <= cap + 1e-12);
  }
}

// ---------------------------------------------------------------------------
// Selection

namespace {

sgp::RepoMetadata repo(const std::string& id, long long stars, long long forks, long long issues,
                       long long commits, long long contributors) {
  return {id, "https://example.test/" + id, stars, forks, issues, commits, contributors};
}

sgp::SelectionConfig thresholds(long long stars, long long forks, long long issues,
                                long long commits, long long contributors) {
  sgp::SelectionConfig cfg;
  cfg.thresholds = {{"stars", stars},
                    {"forks", forks},
                    {"issues", issues},
                    {"commits", commits},
                    {"contributors", contributors}};
  return cfg;
}

}  // namespace

TEST_CASE("selection partitions by conjunction of thresholds", "[metrics][select]") {
  const std::vector<sgp::RepoMetadata> repos = {
      repo("a", 500, 50, 10, 900, 8),  repo("b", 99, 50, 10, 900, 8),
      repo("c", 100, 10, 5, 200, 3),   repo("d", 100, 10, 5, 200, 2),
      repo("e", 1000, 9, 50, 500, 10), repo("f", 0, 0, 0, 0, 0),
      repo("g", 150, 40, 6, 201, 4),   repo("h", 100, 10, 4, 200, 3),
      repo("i", 2000, 300, 80, 5000, 40), repo("j", 100, 10, 5, 199, 3),
  };
  auto result = select_repos(repos, thresholds(100, 10, 5, 200, 3));

  auto ids = [](const std::vector<sgp::RepoMetadata>& v) {
    std::vector<std::string> out;
    for (const auto& r : v) out.push_back(r.repo_id);
    return out;
  };
  CHECK(ids(result.selected) == std::vector<std::string>{"a", "c", "g", "i"});
  CHECK(ids(result.excluded) == std::vector<std::string>{"b", "d", "e", "f", "h", "j"});

  // All-zero thresholds select everything.
  auto all = select_repos(repos, thresholds(0, 0, 0, 0, 0));
  CHECK(all.excluded.empty());

  // Selection is idempotent on its own output.
  auto again = select_repos(result.selected, thresholds(100, 10, 5, 200, 3));
  CHECK(again.excluded.empty());
}

TEST_CASE("failing exactly one metric excludes", "[metrics][select]") {
  auto r = select_repos({repo("x", 99, 100, 100, 1000, 100)}, thresholds(100, 10, 5, 200, 3));
  CHECK(r.selected.empty());
  REQUIRE(r.excluded.size() == 1);
}

TEST_CASE("incomplete thresholds are rejected", "[metrics][select]") {
  sgp::SelectionConfig cfg;
  cfg.thresholds.erase("stars");
  CHECK_THROWS_AS(select_repos({}, cfg), sgp::error);
}

// ---------------------------------------------------------------------------
// LOF

TEST_CASE("all-identical points score exactly 1", "[metrics][lof]") {
  std::vector<std::vector<double>> pts(8, {3.0, 7.0});
  for (double s : sgp::lof_scores(pts, 3)) CHECK(s == Approx(1.0).margin(1e-12));
}

TEST_CASE("uniform lattice interiors stay near 1", "[metrics][lof]") {
  std::vector<std::vector<double>> pts;
  for (int i = 0; i < 20; ++i) pts.push_back({static_cast<double>(i)});
  auto scores = sgp::lof_scores(pts, 2);
  for (int i = 3; i <= 16; ++i) {
    CHECK(scores[static_cast<std::size_t>(i)] >= 0.9);
    CHECK(scores[static_cast<std::size_t>(i)] <= 1.1);
  }
}

TEST_CASE("a planted distant outlier is the argmax", "[metrics][lof]") {
  std::mt19937 rng(9);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<std::vector<double>> pts;
  for (int i = 0; i < 30; ++i) pts.push_back({unit(rng), unit(rng), unit(rng)});
  pts.push_back({10.0, 10.0, 10.0});  // ~10x the cluster diameter away
  auto scores = sgp::lof_scores(pts, 5);
  const auto argmax = std::max_element(scores.begin(), scores.end()) - scores.begin();
  CHECK(argmax == static_cast<std::ptrdiff_t>(pts.size() - 1));
  CHECK(scores.back() > 1.5);
}

TEST_CASE("LOF equals the brute-force definition on random sets", "[metrics][lof]") {
  std::mt19937 rng(2024);
  for (int trial = 0; trial < 25; ++trial) {
    const int dims = std::uniform_int_distribution<int>(2, 5)(rng);
    const int k = std::uniform_int_distribution<int>(2, 8)(rng);
    const int n = std::uniform_int_distribution<int>(k + 2, 50)(rng);
    std::uniform_real_distribution<double> coord(-5.0, 5.0);
    std::vector<std::vector<double>> pts;
    for (int i = 0; i < n; ++i) {
      std::vector<double> p;
      for (int d = 0; d < dims; ++d) p.push_back(coord(rng));
      pts.push_back(std::move(p));
    }
    const auto got = sgp::lof_scores(pts, k);
    const auto want = oracle::lof(pts, k);
    REQUIRE(got.size() == want.size());
    for (std::size_t i = 0; i < got.size(); ++i) {
      CHECK(got[i] == Approx(want[i]).epsilon(0).margin(1e-9));
    }
  }
}

TEST_CASE("LOF is scale invariant after standardization", "[metrics][lof]") {
  std::mt19937 rng(5150);
  std::uniform_real_distribution<double> coord(0.0, 10.0);
  std::vector<std::vector<double>> pts, scaled;
  for (int i = 0; i < 25; ++i) {
    const double a = coord(rng), b = coord(rng);
    pts.push_back({a, b});
    scaled.push_back({a * 1000.0, b});
  }
  const auto base = sgp::lof_scores(pts, 4);
  const auto after = sgp::lof_scores(scaled, 4);
  for (std::size_t i = 0; i < base.size(); ++i) {
    CHECK(base[i] == Approx(after[i]).epsilon(0).margin(1e-9));
  }
}

TEST_CASE("too few points raise InsufficientPoints", "[metrics][lof]") {
  std::vector<std::vector<double>> pts(4, {1.0});
  CHECK_THROWS_AS(sgp::lof_scores(pts, 4), sgp::error);
}

TEST_CASE("prioritize_excluded ranks the outlier first and breaks ties by id", "[metrics][lof]") {
  std::vector<sgp::RepoMetadata> excluded;
  for (int i = 0; i < 12; ++i) {
    excluded.push_back(repo("repo" + std::string(1, static_cast<char>('a' + i)), 10 + i % 3,
                            5 + i % 2, 3, 50 + i % 4, 2));
  }
  excluded.push_back(repo("outlier", 11, 5, 3, 90000, 2));
  auto result = sgp::prioritize_excluded(excluded, 5);
  REQUIRE(result.ordered.size() == excluded.size());
  CHECK(result.ordered.front().repo_id == "outlier");
  CHECK(result.diagnostics.empty());

  // Identical repos keep id order.
  std::vector<sgp::RepoMetadata> twins;
  for (int i = 0; i < 6; ++i) twins.push_back(repo("t" + std::to_string(i), 1, 1, 1, 1, 1));
  std::swap(twins[0], twins[5]);
  auto tied = sgp::prioritize_excluded(twins, 2);
  for (std::size_t i = 0; i + 1 < tied.ordered.size(); ++i) {
    CHECK(tied.ordered[i].repo_id < tied.ordered[i + 1].repo_id);
  }

  // Degenerate set size: order preserved, diagnostic emitted.
  std::vector<sgp::RepoMetadata> tiny = {repo("z", 1, 1, 1, 1, 1), repo("a", 2, 2, 2, 2, 2)};
  auto skipped = sgp::prioritize_excluded(tiny, 5);
  REQUIRE(skipped.diagnostics.size() == 1);
  CHECK(skipped.ordered[0].repo_id == "z");
}
