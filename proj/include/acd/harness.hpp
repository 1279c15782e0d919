#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "acd/adversary.hpp"
#include "acd/agents/hyperparams.hpp"
#include "acd/agents/training.hpp"
#include "acd/attack_graph.hpp"
#include "acd/defense_catalog.hpp"
#include "acd/environment.hpp"

namespace acd {

// Desk-scale defaults: 1/50 of the full-scale step budget with the
// exploration decay shrunk to match.
HyperParams desk_scale_hyperparams();

struct ExperimentConfig {
  Algorithm algorithm = Algorithm::kDqn;
  AdversaryProfile profile;
  HyperParams hyperparams = desk_scale_hyperparams();
  std::filesystem::path graph_file;
  std::filesystem::path catalog_file;
  std::vector<std::uint64_t> seeds{1};
  double train_fraction = 0.8;
  std::uint64_t split_seed = 7;  // path split, shared by all run seeds
  std::filesystem::path output_dir = "runs";
  RewardModel reward;
  int horizon = 64;
  int batch_episodes = 200;
  int eval_episodes = 1000;

  // Relative paths resolve against `base_dir`. Missing files fall back to
  // the bundled defaults. Throws ConfigError.
  static ExperimentConfig from_json(const nlohmann::json& doc, const std::filesystem::path& base_dir = {});
  static ExperimentConfig load(const std::filesystem::path& file);
  nlohmann::json to_json() const;
  void validate() const;
};

std::filesystem::path default_graph_file();
std::filesystem::path default_catalog_file();

// Graph, catalog and path split built from a config.
struct Experiment {
  std::shared_ptr<const AttackGraph> graph;
  std::shared_ptr<const DefenseCatalog> catalog;
  PathSplit split;
};

Experiment build_experiment(const ExperimentConfig& config);

EnvConfig make_env_config(const ExperimentConfig& config, const Experiment& experiment, std::uint64_t env_seed);

// Environment factory over the training split for run `seed`.
EnvFactory make_env_factory(const ExperimentConfig& config, const Experiment& experiment, std::uint64_t seed);

// Truncated episodes count as defender wins.
bool defender_won(Outcome outcome);

// wins / episodes. Throws PreconditionError unless 0 <= wins <= episodes and episodes > 0.
double dwr(int wins, int episodes);

// 100 * max(0, (mean - worst) / (best - worst)). Throws PreconditionError
// unless best > worst.
double mean_reward_percent(double mean_return, double best_return, double worst_return = 0.0);

// Return of the ideal episode on a path of `path_length` techniques: the
// attacker is blocked at its initial position failure_limit() times in a
// row at zero cost.
double ideal_episode_return(std::size_t path_length, const AdversaryProfile& profile, const RewardModel& reward);

struct BatchMetrics {
  std::uint64_t seed = 0;
  int batch = 0;
  int episodes = 0;
  int wins = 0;
  double dwr = 0.0;
  double mean_return = 0.0;
  double mean_len = 0.0;
};

inline constexpr const char* kMetricsHeader = "seed,batch,episodes,wins,dwr,mean_return,mean_len";
std::string format_metrics_row(const BatchMetrics& m);

// Groups completed training episodes into fixed-size batches.
class BatchMetricsMonitor : public TrainingMonitor {
 public:
  using BatchSink = std::function<void(const BatchMetrics&)>;
  using EpochSink = std::function<void(int, const nlohmann::json&)>;

  BatchMetricsMonitor(std::uint64_t seed, int batch_episodes, BatchSink on_batch = {}, EpochSink on_epoch = {});

  void on_episode(const EpisodeRecord& record) override;
  void on_epoch(int epoch, const nlohmann::json& checkpoint) override;

  const std::vector<BatchMetrics>& batches() const { return batches_; }

 private:
  std::uint64_t seed_;
  int batch_episodes_;
  BatchSink on_batch_;
  EpochSink on_epoch_;
  std::vector<BatchMetrics> batches_;
  int episodes_ = 0;
  int wins_ = 0;
  double return_sum_ = 0.0;
  double length_sum_ = 0.0;
};

// Mean DWR over the last `count` batches (all if fewer).
double final_dwr(const std::vector<BatchMetrics>& batches, std::size_t count = 5);

struct RunResult {
  std::uint64_t seed = 0;
  std::vector<BatchMetrics> batches;
  nlohmann::json checkpoint;
  std::filesystem::path run_dir;
};

// Trains one seed. Writes <output>/seed_<seed>/metrics.csv (one row per
// completed batch) and checkpoint.json (rewritten at each epoch boundary).
RunResult train_seed(const ExperimentConfig& config, const Experiment& experiment, std::uint64_t seed);

// Every configured seed in order.
std::vector<RunResult> train(const ExperimentConfig& config);

struct EvalReport {
  int episodes = 0;
  int wins = 0;
  double dwr = 0.0;
  std::vector<double> stop_histogram;  // fraction per tactic id 0..goal
  double cumulative_tactic3 = 0.0;
  double cumulative_tactic6 = 0.0;
  double mean_return = 0.0;
  double mean_length = 0.0;
  double best_return = 0.0;   // ideal-episode anchor
  double worst_return = 0.0;  // always-inactive anchor
  double mean_reward_percent = 0.0;

  nlohmann::json to_json() const;
  void write_histogram_csv(std::ostream& out) const;
};

// Runs `policy` deterministically for config.eval_episodes episodes, cycling
// through `paths`.
EvalReport evaluate(const Policy& policy, const ExperimentConfig& config, const Experiment& experiment,
                    const std::vector<AttackPath>& paths, std::uint64_t seed);

// Loads a checkpoint and evaluates it on the test split. Throws ConfigError
// when the checkpoint does not fit the config's graph and catalog.
EvalReport evaluate_checkpoint(const nlohmann::json& checkpoint, const ExperimentConfig& config,
                               const Experiment& experiment, std::uint64_t seed);

enum class SweepAxis { kGamma, kAlpha };

SweepAxis parse_sweep_axis(const std::string& text);
std::string to_string(SweepAxis axis);

struct SweepEntry {
  double value = 0.0;
  double gamma = 0.0;
  double alpha = 0.0;
  double score = 0.0;  // mean final-5-batch DWR over seeds
  std::filesystem::path run_dir;
};

struct SweepResult {
  SweepAxis axis = SweepAxis::kGamma;
  std::vector<SweepEntry> entries;  // in axis order
  std::size_t winner = 0;           // index into entries; first wins ties
};

// One training run per axis value under <output>/<axis>_<value>, plus
// <output>/sweep_summary.csv. Up to `parallel` values train concurrently.
SweepResult sweep(const ExperimentConfig& base, SweepAxis axis, const std::vector<double>& values, int parallel = 1);

}  // namespace acd
