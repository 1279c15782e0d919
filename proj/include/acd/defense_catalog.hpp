#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "acd/attack_graph.hpp"
#include "acd/rng.hpp"

namespace acd {

enum class ActionKind { kInactive, kReactive, kProactive };

std::string to_string(ActionKind kind);
ActionKind parse_action_kind(const std::string& text);

struct DefenseAction {
  int id = 0;
  ActionKind kind = ActionKind::kInactive;
  std::string name;
  std::vector<int> covers;  // technique ids, sorted; empty unless proactive
  double block_prob = 0.0;
  double fp_scale = 0.0;    // multiplier on benign-interruption counts

  bool covers_technique(int technique) const;
  friend bool operator==(const DefenseAction&, const DefenseAction&) = default;
};

struct CostParams {
  double impl_cost = 0.5;
  double unit_interruption_cost = 0.1;
  double powerlaw_exponent = 2.5;
  int powerlaw_max = 50;
  double depth_attenuation = 0.7;

  friend bool operator==(const CostParams&, const CostParams&) = default;
};

enum class CatalogCheck {
  kStrict,   // 23 actions: inactive, reactive, 21 proactive
  kRelaxed,  // exactly one inactive (id 0), at most one reactive
};

class DefenseCatalog {
 public:
  static DefenseCatalog from_json(const nlohmann::json& doc, const AttackGraph& graph,
                                  CatalogCheck check = CatalogCheck::kStrict);
  static DefenseCatalog load(const std::filesystem::path& file, const AttackGraph& graph,
                             CatalogCheck check = CatalogCheck::kStrict);
  nlohmann::json to_json() const;

  const std::vector<DefenseAction>& actions() const { return actions_; }
  const DefenseAction& action(std::size_t id) const;
  std::size_t size() const { return actions_.size(); }
  double reactive_block_prob() const { return reactive_block_prob_; }
  const CostParams& cost() const { return cost_; }

  // Cumulative distribution of the truncated power law over k = 1..max.
  const std::vector<double>& interruption_cdf() const { return cdf_; }

  friend bool operator==(const DefenseCatalog& a, const DefenseCatalog& b) {
    return a.actions_ == b.actions_ && a.reactive_block_prob_ == b.reactive_block_prob_ &&
           a.cost_ == b.cost_;
  }

 private:
  DefenseCatalog() = default;

  std::vector<DefenseAction> actions_;  // indexed by id
  double reactive_block_prob_ = 0.9;
  CostParams cost_;
  std::vector<double> cdf_;
};

// Probability that `action` stops an attempt on technique `target`.
double block_probability(const DefenseCatalog& catalog, const DefenseAction& action, int target);

// P(k) proportional to k^-exponent on k = 1..max.
std::vector<double> powerlaw_pmf(double exponent, int max);

// Raw power-law draw k in 1..powerlaw_max (one uniform).
int sample_raw_interruptions(const DefenseCatalog& catalog, Rng& rng);

// round(k * fp_scale * attenuation^depth); 0 for Inactive.
int scale_interruptions(const DefenseCatalog& catalog, const DefenseAction& action, int raw, int depth);

// Benign operations interrupted by executing `action` with the attacker at
// tactic depth `depth`. Inactive draws nothing and returns 0.
int sample_interruptions(const DefenseCatalog& catalog, const DefenseAction& action, int depth, Rng& rng);

// C_f: implementation cost plus linear interruption cost; 0 for Inactive.
double action_cost(const DefenseCatalog& catalog, const DefenseAction& action, int interrupted);

}  // namespace acd
