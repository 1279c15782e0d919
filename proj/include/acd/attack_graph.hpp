#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace acd {

struct Tactic {
  int id = 0;
  std::string name;
};

struct Technique {
  int id = 0;
  std::string name;
  int tactic = 0;
  bool is_goal = false;
};

// Attacker position: Attack Initiated, a technique, or Attack Terminated.
class AttackState {
 public:
  enum class Kind { kInitiated, kTechnique, kTerminated };

  static AttackState initiated() { return AttackState(Kind::kInitiated, -1); }
  static AttackState terminated() { return AttackState(Kind::kTerminated, -1); }
  static AttackState technique(int id) { return AttackState(Kind::kTechnique, id); }

  // Parses "initiated", "terminated" or "technique:<id>".
  static AttackState parse(const std::string& text);

  Kind kind() const { return kind_; }
  bool is_initiated() const { return kind_ == Kind::kInitiated; }
  bool is_terminated() const { return kind_ == Kind::kTerminated; }
  bool is_technique() const { return kind_ == Kind::kTechnique; }
  int technique_id() const { return technique_; }

  std::string to_string() const;

  friend bool operator==(const AttackState&, const AttackState&) = default;

 private:
  AttackState(Kind kind, int technique) : kind_(kind), technique_(technique) {}

  Kind kind_;
  int technique_;
};

struct Edge {
  AttackState from;
  int to = 0;
};

// Ordered technique ids from a first-stage technique to a goal technique.
struct AttackPath {
  std::vector<int> steps;

  std::size_t size() const { return steps.size(); }
  int operator[](std::size_t i) const { return steps[i]; }
  friend auto operator<=>(const AttackPath&, const AttackPath&) = default;
};

enum class GraphCheck {
  kStrict,   // 7 tactics, 15 techniques, 3 goals, goal tactic id 7
  kRelaxed,  // any size; goal tactic is the highest tactic id
};

// Returned by tactic_depth() for the Attack Terminated state.
inline constexpr int kTerminatedDepth = -1;

// Tactic/technique propagation graph. Immutable once built; every accessor is
// const and safe to call concurrently.
class AttackGraph {
 public:
  static AttackGraph from_json(const nlohmann::json& doc,
                               GraphCheck check = GraphCheck::kStrict);
  static AttackGraph load(const std::filesystem::path& file,
                          GraphCheck check = GraphCheck::kStrict);
  nlohmann::json to_json() const;

  const std::vector<Tactic>& tactics() const { return tactics_; }
  const std::vector<Technique>& techniques() const { return techniques_; }
  const std::vector<Edge>& edges() const { return edges_; }
  int goal_tactic() const { return goal_tactic_; }

  const Technique& technique(int id) const;
  bool has_technique(int id) const { return index_of_.count(id) != 0; }
  bool is_goal(int technique_id) const { return technique(technique_id).is_goal; }

  // Dense state indexing: 0 = Initiated, 1..N = techniques in id order,
  // N + 1 = Terminated.
  std::size_t state_count() const { return techniques_.size() + 2; }
  std::size_t state_index(const AttackState& s) const;
  AttackState state_at(std::size_t index) const;

  // Edge targets in ascending id order. Throws PreconditionError for
  // Terminated.
  const std::vector<int>& successors(const AttackState& s) const;
  bool has_edge(const AttackState& from, int to) const;

  // Tactic id of the position; 0 for Initiated, kTerminatedDepth for
  // Terminated.
  int tactic_depth(const AttackState& s) const;

  // True when the path is a well-formed episode path of this graph.
  bool contains(const AttackPath& path) const;

 private:
  AttackGraph() = default;
  void validate(GraphCheck check) const;

  std::vector<Tactic> tactics_;
  std::vector<Technique> techniques_;  // sorted by id
  std::vector<Edge> edges_;
  std::vector<int> interchangeable_;   // tactic ids that may appear in either order
  std::map<int, std::size_t> index_of_;
  std::vector<std::vector<int>> successors_;  // by dense state index
  int goal_tactic_ = 7;
};

// Every no-revisit path from a first-stage technique to a goal technique, in
// lexicographic order of technique ids.
std::vector<AttackPath> enumerate_paths(const AttackGraph& graph);

struct PathSplit {
  std::vector<AttackPath> train;
  std::vector<AttackPath> test;
};

// Seeded shuffle, then the first round-half-up(fraction * n) paths train.
PathSplit split_paths(std::vector<AttackPath> paths, double train_fraction,
                      std::uint64_t seed);

}  // namespace acd
