#pragma once

// Shared fixtures: the bundled graph and catalog plus tiny hand-built ones.

#include <fstream>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "acd/attack_graph.hpp"
#include "acd/defense_catalog.hpp"
#include "acd/environment.hpp"
#include "acd/harness.hpp"

namespace testing {

inline nlohmann::json read_json(const std::filesystem::path& file) {
  std::ifstream in(file);
  return nlohmann::json::parse(in);
}

inline std::shared_ptr<const acd::AttackGraph> default_graph() {
  static const auto graph =
      std::make_shared<const acd::AttackGraph>(acd::AttackGraph::load(acd::default_graph_file()));
  return graph;
}

inline std::shared_ptr<const acd::DefenseCatalog> default_catalog() {
  static const auto catalog = std::make_shared<const acd::DefenseCatalog>(
      acd::DefenseCatalog::load(acd::default_catalog_file(), *default_graph()));
  return catalog;
}

// Tactics 0..n, one technique per stage 1..n, linear edges. Technique n is
// the goal.
inline nlohmann::json chain_graph_doc(int n) {
  nlohmann::json doc;
  for (int t = 0; t <= n; ++t) doc["tactics"].push_back({{"id", t}, {"name", "t" + std::to_string(t)}});
  for (int id = 1; id <= n; ++id) {
    doc["techniques"].push_back({{"id", id}, {"name", "k" + std::to_string(id)}, {"tactic", id}, {"is_goal", id == n}});
  }
  doc["edges"].push_back({"initiated", "technique:1"});
  for (int id = 1; id < n; ++id) {
    doc["edges"].push_back({"technique:" + std::to_string(id), "technique:" + std::to_string(id + 1)});
  }
  return doc;
}

inline std::shared_ptr<const acd::AttackGraph> chain_graph(int n) {
  return std::make_shared<const acd::AttackGraph>(
      acd::AttackGraph::from_json(chain_graph_doc(n), acd::GraphCheck::kRelaxed));
}

// Inactive, reactive and one proactive action covering every technique of
// `graph` with `block_prob`.
inline nlohmann::json small_catalog_doc(const acd::AttackGraph& graph, double block_prob, double impl_cost = 0.5,
                                        double unit_cost = 0.1, double reactive = 0.9) {
  std::vector<int> all;
  for (const auto& t : graph.techniques()) all.push_back(t.id);
  nlohmann::json doc;
  doc["actions"] = {
      {{"id", 0}, {"kind", "inactive"}, {"name", "none"}},
      {{"id", 1}, {"kind", "reactive"}, {"name", "kill"}, {"fp_scale", 1.0}},
      {{"id", 2}, {"kind", "proactive"}, {"name", "all"}, {"covers", all}, {"block_prob", block_prob}, {"fp_scale", 1.0}},
  };
  doc["reactive_block_prob"] = reactive;
  doc["cost"] = {{"impl_cost", impl_cost},
                 {"unit_interruption_cost", unit_cost},
                 {"powerlaw_exponent", 2.5},
                 {"powerlaw_max", 50},
                 {"depth_attenuation", 0.7}};
  return doc;
}

inline std::shared_ptr<const acd::DefenseCatalog> small_catalog(const acd::AttackGraph& graph, double block_prob,
                                                                double impl_cost = 0.5, double unit_cost = 0.1) {
  return std::make_shared<const acd::DefenseCatalog>(acd::DefenseCatalog::from_json(
      small_catalog_doc(graph, block_prob, impl_cost, unit_cost), graph, acd::CatalogCheck::kRelaxed));
}

inline acd::AdversaryProfile profile(double rho, int tau, double accuracy = 1.0) {
  acd::AdversaryProfile p;
  p.name = "test";
  p.rho = rho;
  p.tau = tau;
  p.obs_accuracy = accuracy;
  return p;
}

inline acd::EnvConfig env_config(std::shared_ptr<const acd::AttackGraph> graph,
                                 std::shared_ptr<const acd::DefenseCatalog> catalog, acd::AdversaryProfile p,
                                 std::uint64_t seed, int horizon = 64) {
  acd::EnvConfig c;
  c.graph = std::move(graph);
  c.catalog = std::move(catalog);
  c.profile = std::move(p);
  c.horizon = horizon;
  c.seed = seed;
  return c;
}

}  // namespace testing
