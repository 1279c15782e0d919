#include "acd/defense_catalog.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

#include "acd/errors.hpp"

namespace acd {

using nlohmann::json;

std::string to_string(ActionKind kind) {
  switch (kind) {
    case ActionKind::kInactive:
      return "inactive";
    case ActionKind::kReactive:
      return "reactive";
    case ActionKind::kProactive:
      return "proactive";
  }
  return "inactive";
}

ActionKind parse_action_kind(const std::string& text) {
  if (text == "inactive") return ActionKind::kInactive;
  if (text == "reactive") return ActionKind::kReactive;
  if (text == "proactive") return ActionKind::kProactive;
  throw ConfigError("catalog: unknown action kind '" + text + "'");
}

bool DefenseAction::covers_technique(int technique) const {
  return std::binary_search(covers.begin(), covers.end(), technique);
}

namespace {

void check_probability(double p, const std::string& what) {
  if (!(p >= 0.0 && p <= 1.0)) throw ConfigError("catalog: " + what + " must lie in [0, 1]");
}

}  // namespace

DefenseCatalog DefenseCatalog::from_json(const json& doc, const AttackGraph& graph, CatalogCheck check) {
  DefenseCatalog c;
  try {
    for (const auto& a : doc.at("actions")) {
      DefenseAction act;
      act.id = a.at("id").get<int>();
      act.kind = parse_action_kind(a.at("kind").get<std::string>());
      act.name = a.at("name").get<std::string>();
      act.covers = a.value("covers", std::vector<int>{});
      act.block_prob = a.value("block_prob", 0.0);
      act.fp_scale = a.value("fp_scale", 0.0);
      c.actions_.push_back(std::move(act));
    }
    c.reactive_block_prob_ = doc.at("reactive_block_prob").get<double>();
    if (doc.contains("cost")) {
      const auto& k = doc.at("cost");
      c.cost_.impl_cost = k.value("impl_cost", c.cost_.impl_cost);
      c.cost_.unit_interruption_cost = k.value("unit_interruption_cost", c.cost_.unit_interruption_cost);
      c.cost_.powerlaw_exponent = k.value("powerlaw_exponent", c.cost_.powerlaw_exponent);
      c.cost_.powerlaw_max = k.value("powerlaw_max", c.cost_.powerlaw_max);
      c.cost_.depth_attenuation = k.value("depth_attenuation", c.cost_.depth_attenuation);
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("catalog: ") + e.what());
  }

  std::sort(c.actions_.begin(), c.actions_.end(),
            [](const DefenseAction& a, const DefenseAction& b) { return a.id < b.id; });
  std::size_t inactive = 0, reactive = 0, proactive = 0;
  for (std::size_t i = 0; i < c.actions_.size(); ++i) {
    auto& a = c.actions_[i];
    if (a.id != static_cast<int>(i)) throw ConfigError("catalog: action ids must be contiguous from 0");
    std::sort(a.covers.begin(), a.covers.end());
    if (std::adjacent_find(a.covers.begin(), a.covers.end()) != a.covers.end()) {
      throw ConfigError("catalog: action " + a.name + " lists a technique twice");
    }
    check_probability(a.block_prob, "block_prob of " + a.name);
    if (!(a.fp_scale >= 0.0)) throw ConfigError("catalog: fp_scale of " + a.name + " must be non-negative");
    for (int t : a.covers) {
      if (!graph.has_technique(t)) {
        throw ConfigError("catalog: action " + a.name + " covers unknown technique " + std::to_string(t));
      }
    }
    switch (a.kind) {
      case ActionKind::kInactive:
        ++inactive;
        if (a.id != 0) throw ConfigError("catalog: the inactive action must have id 0");
        if (!a.covers.empty() || a.fp_scale != 0.0) {
          throw ConfigError("catalog: the inactive action has no coverage and no interruptions");
        }
        break;
      case ActionKind::kReactive:
        ++reactive;
        if (!a.covers.empty()) throw ConfigError("catalog: the reactive action has no technique coverage");
        break;
      case ActionKind::kProactive:
        ++proactive;
        if (a.covers.empty()) throw ConfigError("catalog: proactive action " + a.name + " covers nothing");
        break;
    }
  }
  if (inactive != 1) throw ConfigError("catalog: expected exactly one inactive action");
  if (check == CatalogCheck::kStrict) {
    if (c.actions_.size() != 23 || reactive != 1 || proactive != 21) {
      throw ConfigError("catalog: expected 23 actions (1 inactive, 1 reactive, 21 proactive), got " +
                        std::to_string(c.actions_.size()) + " (" + std::to_string(reactive) + " reactive, " +
                        std::to_string(proactive) + " proactive)");
    }
    if (c.actions_[1].kind != ActionKind::kReactive) throw ConfigError("catalog: the reactive action must have id 1");
  } else if (reactive > 1) {
    throw ConfigError("catalog: at most one reactive action");
  }

  std::set<int> covered;
  for (const auto& a : c.actions_) {
    if (a.kind == ActionKind::kProactive) covered.insert(a.covers.begin(), a.covers.end());
  }
  for (const auto& t : graph.techniques()) {
    if (!covered.count(t.id)) {
      throw ConfigError("catalog: technique " + std::to_string(t.id) + " (" + t.name +
                        ") is not covered by any proactive action");
    }
  }

  check_probability(c.reactive_block_prob_, "reactive_block_prob");
  const auto& k = c.cost_;
  if (!(k.impl_cost >= 0.0) || !(k.unit_interruption_cost >= 0.0)) {
    throw ConfigError("catalog: costs must be non-negative");
  }
  if (!(k.powerlaw_exponent > 1.0)) throw ConfigError("catalog: powerlaw_exponent must exceed 1");
  if (k.powerlaw_max < 1) throw ConfigError("catalog: powerlaw_max must be positive");
  if (!(k.depth_attenuation > 0.0 && k.depth_attenuation <= 1.0)) {
    throw ConfigError("catalog: depth_attenuation must lie in (0, 1]");
  }

  const auto pmf = powerlaw_pmf(k.powerlaw_exponent, k.powerlaw_max);
  double acc = 0.0;
  for (double p : pmf) c.cdf_.push_back(acc += p);
  c.cdf_.back() = 1.0;
  return c;
}

DefenseCatalog DefenseCatalog::load(const std::filesystem::path& file, const AttackGraph& graph,
                                    CatalogCheck check) {
  std::ifstream in(file);
  if (!in) throw ConfigError("cannot open catalog document " + file.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("catalog document " + file.string() + ": " + e.what());
  }
  return from_json(doc, graph, check);
}

json DefenseCatalog::to_json() const {
  json doc;
  doc["actions"] = json::array();
  for (const auto& a : actions_) {
    doc["actions"].push_back({{"id", a.id},
                              {"kind", to_string(a.kind)},
                              {"name", a.name},
                              {"covers", a.covers},
                              {"block_prob", a.block_prob},
                              {"fp_scale", a.fp_scale}});
  }
  doc["reactive_block_prob"] = reactive_block_prob_;
  doc["cost"] = {{"impl_cost", cost_.impl_cost},
                 {"unit_interruption_cost", cost_.unit_interruption_cost},
                 {"powerlaw_exponent", cost_.powerlaw_exponent},
                 {"powerlaw_max", cost_.powerlaw_max},
                 {"depth_attenuation", cost_.depth_attenuation}};
  return doc;
}

const DefenseAction& DefenseCatalog::action(std::size_t id) const {
  if (id >= actions_.size()) throw PreconditionError("action id " + std::to_string(id) + " out of range");
  return actions_[id];
}

double block_probability(const DefenseCatalog& catalog, const DefenseAction& action, int target) {
  switch (action.kind) {
    case ActionKind::kInactive:
      return 0.0;
    case ActionKind::kReactive:
      return catalog.reactive_block_prob();
    case ActionKind::kProactive:
      break;
  }
  return action.covers_technique(target) ? action.block_prob : 0.0;
}

std::vector<double> powerlaw_pmf(double exponent, int max) {
  std::vector<double> pmf(static_cast<std::size_t>(max));
  double z = 0.0;
  for (int k = 1; k <= max; ++k) z += pmf[k - 1] = std::pow(static_cast<double>(k), -exponent);
  for (double& p : pmf) p /= z;
  return pmf;
}

int sample_raw_interruptions(const DefenseCatalog& catalog, Rng& rng) {
  const auto& cdf = catalog.interruption_cdf();
  const double u = rng.uniform();
  auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
  if (it == cdf.end()) --it;
  return static_cast<int>(it - cdf.begin()) + 1;
}

int scale_interruptions(const DefenseCatalog& catalog, const DefenseAction& action, int raw, int depth) {
  if (action.kind == ActionKind::kInactive) return 0;
  const double scaled =
      raw * action.fp_scale * std::pow(catalog.cost().depth_attenuation, std::max(depth, 0));
  return static_cast<int>(std::lround(scaled));
}

int sample_interruptions(const DefenseCatalog& catalog, const DefenseAction& action, int depth, Rng& rng) {
  if (action.kind == ActionKind::kInactive) return 0;
  return scale_interruptions(catalog, action, sample_raw_interruptions(catalog, rng), depth);
}

double action_cost(const DefenseCatalog& catalog, const DefenseAction& action, int interrupted) {
  if (action.kind == ActionKind::kInactive) return 0.0;
  return catalog.cost().impl_cost + catalog.cost().unit_interruption_cost * interrupted;
}

}  // namespace acd
