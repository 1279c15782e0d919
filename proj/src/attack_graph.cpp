#include "acd/attack_graph.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

#include "acd/errors.hpp"
#include "acd/rng.hpp"

namespace acd {

using nlohmann::json;

AttackState AttackState::parse(const std::string& text) {
  if (text == "initiated") return initiated();
  if (text == "terminated") return terminated();
  const std::string prefix = "technique:";
  if (text.rfind(prefix, 0) == 0) {
    try {
      std::size_t used = 0;
      int id = std::stoi(text.substr(prefix.size()), &used);
      if (used == text.size() - prefix.size()) return technique(id);
    } catch (const std::exception&) {
    }
  }
  throw ConfigError("bad attack state name '" + text + "'");
}

std::string AttackState::to_string() const {
  switch (kind_) {
    case Kind::kInitiated:
      return "initiated";
    case Kind::kTerminated:
      return "terminated";
    case Kind::kTechnique:
      break;
  }
  return "technique:" + std::to_string(technique_);
}

namespace {

template <typename T>
T field(const json& obj, const char* key, const char* what) {
  if (!obj.is_object() || !obj.contains(key)) {
    throw ConfigError(std::string(what) + ": missing field '" + key + "'");
  }
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(std::string(what) + ": field '" + key + "' has the wrong type");
  }
}

const json& array_field(const json& doc, const char* key) {
  if (!doc.is_object() || !doc.contains(key) || !doc.at(key).is_array()) {
    throw ConfigError(std::string("graph: '") + key + "' must be a list");
  }
  return doc.at(key);
}

}  // namespace

AttackGraph AttackGraph::from_json(const json& doc, GraphCheck check) {
  AttackGraph g;

  for (const auto& t : array_field(doc, "tactics")) {
    g.tactics_.push_back({field<int>(t, "id", "tactic"), field<std::string>(t, "name", "tactic")});
  }
  std::sort(g.tactics_.begin(), g.tactics_.end(),
            [](const Tactic& a, const Tactic& b) { return a.id < b.id; });
  for (std::size_t i = 0; i < g.tactics_.size(); ++i) {
    if (g.tactics_[i].id != static_cast<int>(i)) {
      throw ConfigError("graph: tactic ids must be unique and contiguous from 0");
    }
  }
  if (g.tactics_.size() < 3) throw ConfigError("graph: need at least tactics 0, 1 and a goal tactic");
  g.goal_tactic_ = static_cast<int>(g.tactics_.size()) - 1;
  if (check == GraphCheck::kStrict && g.goal_tactic_ != 7) {
    throw ConfigError("graph: expected 7 tactics (ids 1..7) plus the pre-attack tactic 0, got " +
                      std::to_string(g.tactics_.size() - 1));
  }

  for (const auto& t : array_field(doc, "techniques")) {
    Technique tech{field<int>(t, "id", "technique"), field<std::string>(t, "name", "technique"),
                   field<int>(t, "tactic", "technique"), field<bool>(t, "is_goal", "technique")};
    if (tech.tactic < 1 || tech.tactic > g.goal_tactic_) {
      throw ConfigError("graph: technique " + std::to_string(tech.id) + " has out-of-range tactic id " +
                        std::to_string(tech.tactic));
    }
    if (tech.is_goal != (tech.tactic == g.goal_tactic_)) {
      throw ConfigError("graph: technique " + std::to_string(tech.id) +
                        " is_goal disagrees with its tactic");
    }
    g.techniques_.push_back(std::move(tech));
  }
  std::sort(g.techniques_.begin(), g.techniques_.end(),
            [](const Technique& a, const Technique& b) { return a.id < b.id; });
  for (std::size_t i = 0; i < g.techniques_.size(); ++i) {
    if (!g.index_of_.emplace(g.techniques_[i].id, i + 1).second) {
      throw ConfigError("graph: duplicate technique id " + std::to_string(g.techniques_[i].id));
    }
  }

  if (doc.contains("interchangeable_tactics")) {
    g.interchangeable_ = field<std::vector<int>>(doc, "interchangeable_tactics", "graph");
    std::sort(g.interchangeable_.begin(), g.interchangeable_.end());
    if (g.interchangeable_.size() != 2 || g.interchangeable_[1] != g.interchangeable_[0] + 1 ||
        g.interchangeable_[0] < 1 || g.interchangeable_[1] >= g.goal_tactic_) {
      throw ConfigError("graph: interchangeable_tactics must name two adjacent non-goal tactics");
    }
  }

  g.successors_.assign(g.state_count(), {});
  for (const auto& e : array_field(doc, "edges")) {
    if (!e.is_array() || e.size() != 2 || !e[0].is_string() || !e[1].is_string()) {
      throw ConfigError("graph: edges must be [from_state, to_technique] string pairs");
    }
    AttackState from = AttackState::parse(e[0].get<std::string>());
    AttackState to = AttackState::parse(e[1].get<std::string>());
    if (!to.is_technique()) throw ConfigError("graph: edge target must be a technique");
    if (from.is_terminated()) throw ConfigError("graph: the terminated state has no outgoing edges");
    if (from.is_technique() && !g.has_technique(from.technique_id())) {
      throw ConfigError("graph: edge from unknown technique " + std::to_string(from.technique_id()));
    }
    if (!g.has_technique(to.technique_id())) {
      throw ConfigError("graph: edge to unknown technique " + std::to_string(to.technique_id()));
    }
    auto& out = g.successors_[g.state_index(from)];
    if (std::find(out.begin(), out.end(), to.technique_id()) != out.end()) {
      throw ConfigError("graph: duplicate edge " + e.dump());
    }
    out.push_back(to.technique_id());
    g.edges_.push_back({from, to.technique_id()});
  }
  for (auto& out : g.successors_) std::sort(out.begin(), out.end());

  g.validate(check);
  return g;
}

AttackGraph AttackGraph::load(const std::filesystem::path& file, GraphCheck check) {
  std::ifstream in(file);
  if (!in) throw ConfigError("cannot open graph document " + file.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("graph document " + file.string() + ": " + e.what());
  }
  return from_json(doc, check);
}

void AttackGraph::validate(GraphCheck check) const {
  if (techniques_.empty()) throw ConfigError("graph: no techniques");

  std::size_t goals = 0;
  for (const auto& t : techniques_) goals += t.is_goal ? 1 : 0;
  if (check == GraphCheck::kStrict) {
    if (techniques_.size() != 15) {
      throw ConfigError("graph: expected 15 techniques, got " + std::to_string(techniques_.size()));
    }
    if (goals != 3) throw ConfigError("graph: expected 3 goal techniques, got " + std::to_string(goals));
  } else if (goals == 0) {
    throw ConfigError("graph: no goal technique");
  }

  // Stage rule: an edge stays within a tactic or moves to the next one. With
  // an interchangeable pair (a, a+1) the pair may be visited in either order,
  // so a-1 -> a+1, a+1 -> a and a -> a+2 are also legal.
  auto legal_step = [&](int from, int to) {
    if (to == from || to == from + 1) return true;
    if (interchangeable_.empty()) return false;
    const int a = interchangeable_[0];
    return (from == a - 1 && to == a + 1) || (from == a + 1 && to == a) || (from == a && to == a + 2);
  };

  for (const auto& e : edges_) {
    const Technique& to = technique(e.to);
    if (e.from.is_initiated()) {
      if (to.tactic != 1) {
        throw ConfigError("graph: initiated may only lead to first-stage techniques, not " +
                          std::to_string(e.to));
      }
      continue;
    }
    const Technique& from = technique(e.from.technique_id());
    if (from.is_goal) {
      throw ConfigError("graph: goal technique " + std::to_string(from.id) + " has an outgoing edge");
    }
    if (!legal_step(from.tactic, to.tactic)) {
      throw ConfigError("graph: edge " + std::to_string(from.id) + " -> " + std::to_string(to.id) +
                        " skips or reverses a tactic stage");
    }
  }

  const auto& first = successors_[0];
  for (const auto& t : techniques_) {
    if (t.tactic == 1 && std::find(first.begin(), first.end(), t.id) == first.end()) {
      throw ConfigError("graph: first-stage technique " + std::to_string(t.id) +
                        " is unreachable from initiated");
    }
    if (!t.is_goal && successors_[index_of_.at(t.id)].empty()) {
      throw ConfigError("graph: non-goal technique " + std::to_string(t.id) + " has no outgoing edge");
    }
  }
}

json AttackGraph::to_json() const {
  json doc;
  doc["tactics"] = json::array();
  for (const auto& t : tactics_) doc["tactics"].push_back({{"id", t.id}, {"name", t.name}});
  doc["techniques"] = json::array();
  for (const auto& t : techniques_) {
    doc["techniques"].push_back({{"id", t.id}, {"name", t.name}, {"tactic", t.tactic}, {"is_goal", t.is_goal}});
  }
  if (!interchangeable_.empty()) doc["interchangeable_tactics"] = interchangeable_;
  doc["edges"] = json::array();
  for (const auto& e : edges_) {
    doc["edges"].push_back({e.from.to_string(), AttackState::technique(e.to).to_string()});
  }
  return doc;
}

const Technique& AttackGraph::technique(int id) const {
  auto it = index_of_.find(id);
  if (it == index_of_.end()) throw PreconditionError("unknown technique id " + std::to_string(id));
  return techniques_[it->second - 1];
}

std::size_t AttackGraph::state_index(const AttackState& s) const {
  switch (s.kind()) {
    case AttackState::Kind::kInitiated:
      return 0;
    case AttackState::Kind::kTerminated:
      return techniques_.size() + 1;
    case AttackState::Kind::kTechnique:
      break;
  }
  auto it = index_of_.find(s.technique_id());
  if (it == index_of_.end()) throw PreconditionError("unknown technique id " + std::to_string(s.technique_id()));
  return it->second;
}

AttackState AttackGraph::state_at(std::size_t index) const {
  if (index == 0) return AttackState::initiated();
  if (index == techniques_.size() + 1) return AttackState::terminated();
  if (index > techniques_.size()) throw PreconditionError("state index out of range");
  return AttackState::technique(techniques_[index - 1].id);
}

const std::vector<int>& AttackGraph::successors(const AttackState& s) const {
  if (s.is_terminated()) throw PreconditionError("the terminated state has no successors");
  return successors_[state_index(s)];
}

bool AttackGraph::has_edge(const AttackState& from, int to) const {
  if (from.is_terminated()) return false;
  const auto& out = successors_[state_index(from)];
  return std::binary_search(out.begin(), out.end(), to);
}

int AttackGraph::tactic_depth(const AttackState& s) const {
  switch (s.kind()) {
    case AttackState::Kind::kInitiated:
      return 0;
    case AttackState::Kind::kTerminated:
      return kTerminatedDepth;
    case AttackState::Kind::kTechnique:
      break;
  }
  return technique(s.technique_id()).tactic;
}

bool AttackGraph::contains(const AttackPath& path) const {
  if (path.steps.empty()) return false;
  std::set<int> seen;
  AttackState at = AttackState::initiated();
  for (int step : path.steps) {
    if (!has_technique(step) || !has_edge(at, step) || !seen.insert(step).second) return false;
    at = AttackState::technique(step);
  }
  return is_goal(path.steps.back());
}

namespace {

void extend_paths(const AttackGraph& g, std::vector<int>& prefix, std::vector<bool>& visited,
                  std::vector<AttackPath>& out) {
  const int last = prefix.back();
  if (g.is_goal(last)) {
    out.push_back({prefix});
    return;
  }
  for (int next : g.successors(AttackState::technique(last))) {
    const std::size_t idx = g.state_index(AttackState::technique(next));
    if (visited[idx]) continue;
    visited[idx] = true;
    prefix.push_back(next);
    extend_paths(g, prefix, visited, out);
    prefix.pop_back();
    visited[idx] = false;
  }
}

}  // namespace

std::vector<AttackPath> enumerate_paths(const AttackGraph& graph) {
  std::vector<AttackPath> out;
  std::vector<bool> visited(graph.state_count(), false);
  std::vector<int> prefix;
  for (int first : graph.successors(AttackState::initiated())) {
    const std::size_t idx = graph.state_index(AttackState::technique(first));
    visited[idx] = true;
    prefix.assign(1, first);
    extend_paths(graph, prefix, visited, out);
    visited[idx] = false;
  }
  return out;
}

PathSplit split_paths(std::vector<AttackPath> paths, double train_fraction, std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw PreconditionError("train fraction must lie strictly between 0 and 1");
  }
  if (paths.empty()) throw PreconditionError("cannot split an empty path list");

  Rng rng(seed);
  for (std::size_t i = paths.size() - 1; i > 0; --i) {
    std::swap(paths[i], paths[rng.index(i + 1)]);
  }
  const auto n_train = static_cast<std::size_t>(
      std::floor(train_fraction * static_cast<double>(paths.size()) + 0.5));

  PathSplit split;
  split.train.assign(paths.begin(), paths.begin() + static_cast<std::ptrdiff_t>(n_train));
  split.test.assign(paths.begin() + static_cast<std::ptrdiff_t>(n_train), paths.end());
  return split;
}

}  // namespace acd
