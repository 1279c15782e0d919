#include "acd/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <mutex>
#include <numeric>
#include <set>
#include <thread>

#include "acd/errors.hpp"

#ifndef ACD_DATA_DIR
#define ACD_DATA_DIR "data"
#endif

namespace acd {

namespace fs = std::filesystem;

HyperParams desk_scale_hyperparams() {
  HyperParams hp;
  hp.epochs = 20;
  hp.steps_per_epoch = 2500;
  hp.eps_decay_steps = 6000;
  return hp;
}

namespace {

fs::path data_dir() {
  if (const char* env = std::getenv("ACD_DATA_DIR"); env && *env) return env;
  return ACD_DATA_DIR;
}

fs::path resolve(const fs::path& p, const fs::path& base) {
  if (p.empty() || p.is_absolute() || base.empty()) return p;
  return base / p;
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

void write_text(const fs::path& file, const std::string& text) {
  const fs::path tmp = file.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("cannot write " + tmp.string());
    out << text;
  }
  fs::rename(tmp, file);
}

}  // namespace

fs::path default_graph_file() { return data_dir() / "attack_graph.default"; }
fs::path default_catalog_file() { return data_dir() / "defense_catalog.default"; }

ExperimentConfig ExperimentConfig::from_json(const nlohmann::json& doc, const fs::path& base_dir) {
  static const std::set<std::string> known = {
      "algorithm", "profile", "hyperparams", "graph", "catalog", "seeds", "train_fraction", "split_seed",
      "output_dir", "reward", "horizon", "batch_episodes", "eval_episodes"};
  if (!doc.is_object()) throw ConfigError("config: expected an object");
  for (const auto& [key, _] : doc.items()) {
    if (!known.count(key)) throw ConfigError("config: unknown key '" + key + "'");
  }

  ExperimentConfig c;
  try {
    if (doc.contains("algorithm")) c.algorithm = parse_algorithm(doc.at("algorithm").get<std::string>());
    const nlohmann::json profile = doc.value("profile", nlohmann::json("Av1"));
    if (profile.is_string()) {
      auto p = find_builtin_profile(profile.get<std::string>());
      if (!p) throw ConfigError("config: unknown profile '" + profile.get<std::string>() + "'");
      c.profile = *p;
    } else {
      c.profile = AdversaryProfile::from_json(profile);
    }
    if (doc.contains("hyperparams")) c.hyperparams = HyperParams::from_json(doc.at("hyperparams"), c.hyperparams);
    c.graph_file = resolve(doc.value("graph", std::string{}), base_dir);
    c.catalog_file = resolve(doc.value("catalog", std::string{}), base_dir);
    if (doc.contains("seeds")) c.seeds = doc.at("seeds").get<std::vector<std::uint64_t>>();
    c.train_fraction = doc.value("train_fraction", c.train_fraction);
    c.split_seed = doc.value("split_seed", c.split_seed);
    c.output_dir = resolve(doc.value("output_dir", c.output_dir.string()), base_dir);
    if (doc.contains("reward")) {
      const auto& r = doc.at("reward");
      c.reward.impact = r.value("impact", c.reward.impact);
      c.reward.literal_iv = r.value("literal_iv", c.reward.literal_iv);
    }
    c.horizon = doc.value("horizon", c.horizon);
    c.batch_episodes = doc.value("batch_episodes", c.batch_episodes);
    c.eval_episodes = doc.value("eval_episodes", c.eval_episodes);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  if (c.graph_file.empty()) c.graph_file = default_graph_file();
  if (c.catalog_file.empty()) c.catalog_file = default_catalog_file();
  c.validate();
  return c;
}

ExperimentConfig ExperimentConfig::load(const fs::path& file) {
  std::ifstream in(file);
  if (!in) throw ConfigError("cannot open config " + file.string());
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config " + file.string() + ": " + e.what());
  }
  return from_json(doc, file.parent_path());
}

nlohmann::json ExperimentConfig::to_json() const {
  return {{"algorithm", to_string(algorithm)},
          {"profile", profile.to_json()},
          {"hyperparams", hyperparams.to_json()},
          {"graph", graph_file.string()},
          {"catalog", catalog_file.string()},
          {"seeds", seeds},
          {"train_fraction", train_fraction},
          {"split_seed", split_seed},
          {"output_dir", output_dir.string()},
          {"reward", {{"impact", reward.impact}, {"literal_iv", reward.literal_iv}}},
          {"horizon", horizon},
          {"batch_episodes", batch_episodes},
          {"eval_episodes", eval_episodes}};
}

void ExperimentConfig::validate() const {
  profile.validate();
  hyperparams.validate();
  if (seeds.empty()) throw ConfigError("config: need at least one seed");
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) throw ConfigError("config: train_fraction must lie in (0, 1)");
  if (horizon < 1) throw ConfigError("config: horizon must be positive");
  if (batch_episodes < 1) throw ConfigError("config: batch_episodes must be positive");
  if (eval_episodes < 1) throw ConfigError("config: eval_episodes must be positive");
  if (!(reward.impact >= 0.0)) throw ConfigError("config: reward impact must be non-negative");
  if (!fs::exists(graph_file)) throw ConfigError("config: graph file not found: " + graph_file.string());
  if (!fs::exists(catalog_file)) throw ConfigError("config: catalog file not found: " + catalog_file.string());
}

Experiment build_experiment(const ExperimentConfig& config) {
  Experiment e;
  auto graph = std::make_shared<const AttackGraph>(AttackGraph::load(config.graph_file));
  e.catalog = std::make_shared<const DefenseCatalog>(DefenseCatalog::load(config.catalog_file, *graph));
  e.split = split_paths(enumerate_paths(*graph), config.train_fraction, config.split_seed);
  if (e.split.train.empty() || e.split.test.empty()) throw ConfigError("path split leaves an empty side");
  e.graph = std::move(graph);
  return e;
}

EnvConfig make_env_config(const ExperimentConfig& config, const Experiment& experiment, std::uint64_t env_seed) {
  EnvConfig ec;
  ec.graph = experiment.graph;
  ec.catalog = experiment.catalog;
  ec.profile = config.profile;
  ec.reward_model = config.reward;
  ec.horizon = config.horizon;
  ec.seed = env_seed;
  return ec;
}

EnvFactory make_env_factory(const ExperimentConfig& config, const Experiment& experiment, std::uint64_t seed) {
  return [config, experiment, seed](int index) -> std::unique_ptr<EpisodicEnv> {
    const auto w = static_cast<std::uint64_t>(index);
    return std::make_unique<PathPoolEnv>(make_env_config(config, experiment, derive_seed(seed, 200 + w)),
                                         experiment.split.train, derive_seed(seed, 300 + w));
  };
}

bool defender_won(Outcome outcome) { return outcome == Outcome::kDefenderWin || outcome == Outcome::kTruncated; }

double dwr(int wins, int episodes) {
  if (episodes <= 0) throw PreconditionError("dwr needs at least one episode");
  if (wins < 0 || wins > episodes) throw PreconditionError("dwr needs 0 <= wins <= episodes");
  return static_cast<double>(wins) / static_cast<double>(episodes);
}

double mean_reward_percent(double mean_return, double best_return, double worst_return) {
  if (!(best_return > worst_return)) {
    throw PreconditionError("mean reward percentage needs best_return > worst_return");
  }
  return 100.0 * std::max(0.0, (mean_return - worst_return) / (best_return - worst_return));
}

double ideal_episode_return(std::size_t path_length, const AdversaryProfile& profile, const RewardModel& reward) {
  const int limit = profile.failure_limit();
  double total = 0.0;
  for (int k = 1; k <= limit; ++k) {
    const bool terminated = k == limit;
    const double p = terminated ? 0.0 : compute_p_goal(path_length, limit - k, profile.rho);
    total += reward_of_transition(reward, p, terminated ? Outcome::kDefenderWin : Outcome::kOngoing, 0.0);
  }
  return total;
}

std::string format_metrics_row(const BatchMetrics& m) {
  return std::to_string(m.seed) + "," + std::to_string(m.batch) + "," + std::to_string(m.episodes) + "," +
         std::to_string(m.wins) + "," + format_double(m.dwr) + "," + format_double(m.mean_return) + "," +
         format_double(m.mean_len);
}

BatchMetricsMonitor::BatchMetricsMonitor(std::uint64_t seed, int batch_episodes, BatchSink on_batch,
                                         EpochSink on_epoch)
    : seed_(seed), batch_episodes_(batch_episodes), on_batch_(std::move(on_batch)), on_epoch_(std::move(on_epoch)) {
  if (batch_episodes < 1) throw PreconditionError("batch size must be positive");
}

void BatchMetricsMonitor::on_episode(const EpisodeRecord& record) {
  ++episodes_;
  if (defender_won(record.outcome)) ++wins_;
  return_sum_ += record.total_return;
  length_sum_ += record.length;
  if (episodes_ < batch_episodes_) return;

  BatchMetrics m;
  m.seed = seed_;
  m.batch = static_cast<int>(batches_.size());
  m.episodes = episodes_;
  m.wins = wins_;
  m.dwr = dwr(wins_, episodes_);
  m.mean_return = return_sum_ / episodes_;
  m.mean_len = length_sum_ / episodes_;
  batches_.push_back(m);
  episodes_ = wins_ = 0;
  return_sum_ = length_sum_ = 0.0;
  if (on_batch_) on_batch_(m);
}

void BatchMetricsMonitor::on_epoch(int epoch, const nlohmann::json& checkpoint) {
  if (on_epoch_) on_epoch_(epoch, checkpoint);
}

double final_dwr(const std::vector<BatchMetrics>& batches, std::size_t count) {
  if (batches.empty()) return 0.0;
  const std::size_t n = std::min(count, batches.size());
  double sum = 0.0;
  for (std::size_t i = batches.size() - n; i < batches.size(); ++i) sum += batches[i].dwr;
  return sum / static_cast<double>(n);
}

RunResult train_seed(const ExperimentConfig& config, const Experiment& experiment, std::uint64_t seed) {
  RunResult run;
  run.seed = seed;
  run.run_dir = config.output_dir / ("seed_" + std::to_string(seed));
  fs::create_directories(run.run_dir);
  write_text(run.run_dir / "config.json", config.to_json().dump(2) + "\n");

  std::ofstream csv(run.run_dir / "metrics.csv", std::ios::binary | std::ios::trunc);
  if (!csv) throw ConfigError("cannot write " + (run.run_dir / "metrics.csv").string());
  csv << kMetricsHeader << "\n" << std::flush;

  const fs::path checkpoint_file = run.run_dir / "checkpoint.json";
  BatchMetricsMonitor monitor(
      seed, config.batch_episodes, [&](const BatchMetrics& m) { csv << format_metrics_row(m) << "\n" << std::flush; },
      [&](int, const nlohmann::json& ckpt) { write_text(checkpoint_file, ckpt.dump() + "\n"); });

  TrainResult result = train_agent(config.algorithm, make_env_factory(config, experiment, seed), config.hyperparams,
                                   seed, &monitor);
  write_text(checkpoint_file, result.checkpoint.dump() + "\n");
  run.batches = monitor.batches();
  run.checkpoint = std::move(result.checkpoint);
  return run;
}

std::vector<RunResult> train(const ExperimentConfig& config) {
  const Experiment experiment = build_experiment(config);
  std::vector<RunResult> runs;
  for (auto seed : config.seeds) runs.push_back(train_seed(config, experiment, seed));
  return runs;
}

nlohmann::json EvalReport::to_json() const {
  return {{"episodes", episodes},
          {"wins", wins},
          {"dwr", dwr},
          {"stop_histogram", stop_histogram},
          {"cumulative_tactic3", cumulative_tactic3},
          {"cumulative_tactic6", cumulative_tactic6},
          {"mean_return", mean_return},
          {"mean_length", mean_length},
          {"best_return", best_return},
          {"worst_return", worst_return},
          {"mean_reward_percent", mean_reward_percent}};
}

void EvalReport::write_histogram_csv(std::ostream& out) const {
  out << "tactic,fraction,cumulative\n";
  double cum = 0.0;
  for (std::size_t t = 0; t < stop_histogram.size(); ++t) {
    cum += stop_histogram[t];
    out << t << "," << format_double(stop_histogram[t]) << "," << format_double(cum) << "\n";
  }
}

namespace {

struct EpisodeSummary {
  double total_return = 0.0;
  int length = 0;
  Outcome outcome = Outcome::kOngoing;
  int stop_tactic = 0;
};

EpisodeSummary run_episode(CyberDefenseEnv& env, const AttackPath& path, const Policy& policy) {
  const AttackGraph& graph = *env.config().graph;
  EpisodeSummary s;
  Observation obs = env.reset(path);
  AttackState last = env.adversary().position;
  while (!env.done()) {
    last = env.adversary().position;
    StepOutcome out = env.step(policy.act(obs));
    s.total_return += out.reward;
    ++s.length;
    s.outcome = out.info.outcome;
    obs = std::move(out.observation);
  }
  switch (s.outcome) {
    case Outcome::kDefenderWin:
      s.stop_tactic = graph.tactic_depth(last);
      break;
    case Outcome::kAdversaryWin:
      s.stop_tactic = graph.goal_tactic();
      break;
    default:
      s.stop_tactic = graph.tactic_depth(env.adversary().position);
      break;
  }
  return s;
}

}  // namespace

EvalReport evaluate(const Policy& policy, const ExperimentConfig& config, const Experiment& experiment,
                    const std::vector<AttackPath>& paths, std::uint64_t seed) {
  if (paths.empty()) throw PreconditionError("evaluation needs at least one path");
  const AttackGraph& graph = *experiment.graph;
  if (policy.observation_size() != graph.state_count() || policy.action_count() != experiment.catalog->size()) {
    throw ConfigError("checkpoint does not match the configured graph and catalog (expects " +
                      std::to_string(policy.observation_size()) + " states, " +
                      std::to_string(policy.action_count()) + " actions)");
  }

  const FunctionPolicy inactive(graph.state_count(), experiment.catalog->size(),
                                [](const Observation&) { return std::size_t{0}; });
  CyberDefenseEnv env(make_env_config(config, experiment, derive_seed(seed, 500)));
  CyberDefenseEnv baseline_env(make_env_config(config, experiment, derive_seed(seed, 500)));

  EvalReport r;
  r.episodes = config.eval_episodes;
  r.stop_histogram.assign(static_cast<std::size_t>(graph.goal_tactic()) + 1, 0.0);
  std::vector<int> counts(r.stop_histogram.size(), 0);
  double best = 0.0;
  double worst = 0.0;
  double length = 0.0;
  for (int i = 0; i < config.eval_episodes; ++i) {
    const AttackPath& path = paths[static_cast<std::size_t>(i) % paths.size()];
    const EpisodeSummary s = run_episode(env, path, policy);
    if (defender_won(s.outcome)) ++r.wins;
    ++counts[static_cast<std::size_t>(std::clamp(s.stop_tactic, 0, graph.goal_tactic()))];
    r.mean_return += s.total_return;
    length += s.length;
    best += ideal_episode_return(path.size(), config.profile, config.reward);
    worst += run_episode(baseline_env, path, inactive).total_return;
  }
  const double n = static_cast<double>(config.eval_episodes);
  r.dwr = dwr(r.wins, r.episodes);
  for (std::size_t t = 0; t < counts.size(); ++t) r.stop_histogram[t] = counts[t] / n;
  double cum = 0.0;
  for (std::size_t t = 0; t < counts.size(); ++t) {
    cum += counts[t];
    if (t == 3) r.cumulative_tactic3 = cum / n;
    if (t == 6) r.cumulative_tactic6 = cum / n;
  }
  r.mean_return /= n;
  r.mean_length = length / n;
  r.best_return = best / n;
  r.worst_return = worst / n;
  r.mean_reward_percent = mean_reward_percent(r.mean_return, r.best_return, r.worst_return);
  return r;
}

EvalReport evaluate_checkpoint(const nlohmann::json& checkpoint, const ExperimentConfig& config,
                               const Experiment& experiment, std::uint64_t seed) {
  const auto policy = policy_from_checkpoint(checkpoint);
  return evaluate(*policy, config, experiment, experiment.split.test, seed);
}

SweepAxis parse_sweep_axis(const std::string& text) {
  if (text == "gamma") return SweepAxis::kGamma;
  if (text == "alpha") return SweepAxis::kAlpha;
  throw ConfigError("unknown sweep axis '" + text + "' (expected gamma or alpha)");
}

std::string to_string(SweepAxis axis) { return axis == SweepAxis::kGamma ? "gamma" : "alpha"; }

SweepResult sweep(const ExperimentConfig& base, SweepAxis axis, const std::vector<double>& values, int parallel) {
  if (values.empty()) throw ConfigError("sweep axis has no values");
  const Experiment experiment = build_experiment(base);

  SweepResult result;
  result.axis = axis;
  result.entries.resize(values.size());
  std::vector<ExperimentConfig> configs;
  for (std::size_t i = 0; i < values.size(); ++i) {
    ExperimentConfig c = base;
    (axis == SweepAxis::kGamma ? c.hyperparams.gamma : c.hyperparams.alpha) = values[i];
    c.hyperparams.validate();
    c.output_dir = base.output_dir / (to_string(axis) + "_" + format_double(values[i]));
    result.entries[i] = {values[i], c.hyperparams.gamma, c.hyperparams.alpha, 0.0, c.output_dir};
    configs.push_back(std::move(c));
  }

  std::atomic<std::size_t> next{0};
  std::mutex mu;
  std::exception_ptr failure;
  auto work = [&] {
    for (std::size_t i = next++; i < configs.size(); i = next++) {
      try {
        double score = 0.0;
        for (auto seed : configs[i].seeds) score += final_dwr(train_seed(configs[i], experiment, seed).batches);
        result.entries[i].score = score / static_cast<double>(configs[i].seeds.size());
      } catch (...) {
        std::lock_guard lock(mu);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  const int pool = std::clamp(parallel, 1, static_cast<int>(configs.size()));
  if (pool == 1) {
    work();
  } else {
    std::vector<std::thread> threads;
    for (int t = 0; t < pool; ++t) threads.emplace_back(work);
    for (auto& t : threads) t.join();
  }
  if (failure) std::rethrow_exception(failure);

  for (std::size_t i = 1; i < result.entries.size(); ++i) {
    if (result.entries[i].score > result.entries[result.winner].score) result.winner = i;
  }

  fs::create_directories(base.output_dir);
  std::string csv = "axis,value,gamma,alpha,final_dwr,winner\n";
  for (std::size_t i = 0; i < result.entries.size(); ++i) {
    const auto& e = result.entries[i];
    csv += to_string(axis) + "," + format_double(e.value) + "," + format_double(e.gamma) + "," +
           format_double(e.alpha) + "," + format_double(e.score) + "," + (i == result.winner ? "1" : "0") + "\n";
  }
  write_text(base.output_dir / "sweep_summary.csv", csv);
  return result;
}

}  // namespace acd
