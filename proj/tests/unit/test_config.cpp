#include <catch2/catch_amalgamated.hpp>

#include "sgp/config.hpp"

using sgp::GlobalConfig;

TEST_CASE("config serializes to JSON and back losslessly", "[config]") {
  GlobalConfig cfg;
  cfg.profile = "pre_extracted";
  cfg.format = "json";
  cfg.jobs = 3;
  cfg.selection.thresholds["stars"] = 250;
  cfg.selection.lof_k = 7;
  cfg.selection.f_common = 42;
  cfg.weights = {0.3, 0.7};
  cfg.tau = 0.55;
  cfg.clone.n_lines = 6;
  cfg.clone.theta_token = 0.65;
  cfg.theta_component = 0.2;
  cfg.portrait.security = 0.5;
  cfg.portrait.quality = 0.1;
  cfg.portrait.aggregate = sgp::PortraitWeights::Aggregate::Sum;

  GlobalConfig loaded;
  loaded.merge_json(cfg.to_json());
  CHECK(loaded.to_json().dump() == cfg.to_json().dump());
}

TEST_CASE("merge overlays only the fields present", "[config]") {
  GlobalConfig cfg;
  cfg.merge_json(nlohmann::json::parse(R"({"tau":0.9,"clone":{"theta_verify":0.95}})"));
  CHECK(cfg.tau == 0.9);
  CHECK(cfg.clone.theta_verify == 0.95);
  // Untouched fields keep their defaults.
  CHECK(cfg.clone.n_lines == 4);
  CHECK(cfg.theta_component == 0.1);
  CHECK(cfg.weights.w_centrality == 0.5);
  CHECK(cfg.portrait.security == 0.4);
}

TEST_CASE("documented defaults", "[config]") {
  const GlobalConfig cfg;
  CHECK(cfg.profile == "c_like");
  CHECK(cfg.format == "text");
  CHECK(cfg.tau == 0.2);
  CHECK(cfg.selection.lof_k == 5);
  CHECK(cfg.selection.f_common == 100);
  CHECK(cfg.clone.n_lines == 4);
  CHECK(cfg.clone.min_shared == 1);
  CHECK(cfg.clone.theta_token == 0.6);
  CHECK(cfg.clone.theta_verify == 0.8);
  CHECK(cfg.theta_component == 0.1);
  CHECK(cfg.portrait.security == 0.40);
  CHECK(cfg.portrait.quality == 0.20);
  CHECK(cfg.portrait.oss_composition == 0.15);
  CHECK(cfg.portrait.maintainability == 0.15);
  CHECK(cfg.portrait.business_risk == 0.10);
  CHECK_NOTHROW(cfg.validate());
}

TEST_CASE("invalid configs are rejected", "[config]") {
  GlobalConfig cfg;
  cfg.format = "yaml";
  CHECK_THROWS_AS(cfg.validate(), sgp::error);

  GlobalConfig cfg2;
  cfg2.weights = {0.9, 0.9};
  CHECK_THROWS_AS(cfg2.validate(), sgp::error);

  GlobalConfig cfg3;
  cfg3.tau = 1.5;
  CHECK_THROWS_AS(cfg3.validate(), sgp::error);
}
