#pragma once

// One configuration object covering every module, serializable to a single
// JSON file. Precedence is defaults < config file < CLI flags; the CLI
// layer applies the last step.

#include <filesystem>
#include <fstream>
#include <string>

#include <json.hpp>

#include "sgp/advisory.hpp"
#include "sgp/clone.hpp"
#include "sgp/common.hpp"
#include "sgp/genepool.hpp"
#include "sgp/metrics.hpp"

namespace sgp {

struct GlobalConfig {
  std::string profile = "c_like";
  std::string format = "text";  // "text" | "json"
  int jobs = 0;                 // 0 = available parallelism
  SelectionConfig selection;
  RankWeights weights;
  double tau = 0.2;
  CloneConfig clone;
  double theta_component = 0.1;
  PortraitWeights portrait;

  void validate() const {
    if (format != "text" && format != "json") {
      throw error("InvalidConfig", "format must be 'text' or 'json'");
    }
    find_profile(profile);
    selection.validate();
    weights.validate();
    clone.validate();
    portrait.validate();
    if (tau < 0.0 || tau > 1.0) throw error("InvalidConfig", "tau must lie in [0,1]");
    if (theta_component < 0.0 || theta_component > 1.0) {
      throw error("InvalidConfig", "theta_component must lie in [0,1]");
    }
  }

  nlohmann::ordered_json to_json() const {
    nlohmann::ordered_json j;
    j["profile"] = profile;
    j["format"] = format;
    j["jobs"] = jobs;
    nlohmann::ordered_json sel;
    nlohmann::ordered_json thresholds;
    for (const auto& name : repo_metric_names()) thresholds[name] = selection.thresholds.at(name);
    sel["thresholds"] = std::move(thresholds);
    sel["lof_k"] = selection.lof_k;
    sel["f_common"] = selection.f_common;
    j["selection"] = std::move(sel);
    j["weights"] = {{"w_centrality", weights.w_centrality}, {"w_value", weights.w_value}};
    j["tau"] = tau;
    j["clone"] = {{"n_lines", clone.n_lines},
                  {"min_shared", clone.min_shared},
                  {"theta_token", clone.theta_token},
                  {"theta_verify", clone.theta_verify}};
    j["theta_component"] = theta_component;
    j["portrait"] = {
        {"security", portrait.security},
        {"quality", portrait.quality},
        {"oss_composition", portrait.oss_composition},
        {"maintainability", portrait.maintainability},
        {"business_risk", portrait.business_risk},
        {"aggregate", portrait.aggregate == PortraitWeights::Aggregate::Max ? "max" : "sum"}};
    return j;
  }

  /// Overlays the fields present in j onto the current values; anything
  /// absent keeps its previous (default or earlier-layer) value.
  void merge_json(const nlohmann::json& j) {
    if (!j.is_object()) throw error("InvalidConfig", "config must be a JSON object");
    profile = j.value("profile", profile);
    format = j.value("format", format);
    jobs = j.value("jobs", jobs);
    if (j.contains("selection")) {
      const auto& sel = j["selection"];
      if (sel.contains("thresholds")) {
        for (const auto& [name, value] : sel["thresholds"].items()) {
          selection.thresholds[name] = value.get<long long>();
        }
      }
      selection.lof_k = sel.value("lof_k", selection.lof_k);
      selection.f_common = sel.value("f_common", selection.f_common);
    }
    if (j.contains("weights")) {
      weights.w_centrality = j["weights"].value("w_centrality", weights.w_centrality);
      weights.w_value = j["weights"].value("w_value", weights.w_value);
    }
    tau = j.value("tau", tau);
    if (j.contains("clone")) {
      const auto& c = j["clone"];
      clone.n_lines = c.value("n_lines", clone.n_lines);
      clone.min_shared = c.value("min_shared", clone.min_shared);
      clone.theta_token = c.value("theta_token", clone.theta_token);
      clone.theta_verify = c.value("theta_verify", clone.theta_verify);
    }
    theta_component = j.value("theta_component", theta_component);
    if (j.contains("portrait")) {
      const auto& p = j["portrait"];
      portrait.security = p.value("security", portrait.security);
      portrait.quality = p.value("quality", portrait.quality);
      portrait.oss_composition = p.value("oss_composition", portrait.oss_composition);
      portrait.maintainability = p.value("maintainability", portrait.maintainability);
      portrait.business_risk = p.value("business_risk", portrait.business_risk);
      if (p.contains("aggregate")) {
        const std::string agg = p["aggregate"].get<std::string>();
        if (agg == "max") {
          portrait.aggregate = PortraitWeights::Aggregate::Max;
        } else if (agg == "sum") {
          portrait.aggregate = PortraitWeights::Aggregate::Sum;
        } else {
          throw error("InvalidConfig", "portrait.aggregate must be 'max' or 'sum'");
        }
      }
    }
  }

  void merge_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw error("IoError", "cannot open config " + path.string());
    nlohmann::json j = nlohmann::json::parse(in, nullptr, false);
    if (j.is_discarded()) throw error("InvalidConfig", "config " + path.string() + " is not JSON");
    merge_json(j);
  }
};

}  // namespace sgp
