// simctl: command-line front end for path inspection, training, evaluation
// and hyperparameter sweeps.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "acd/errors.hpp"
#include "acd/harness.hpp"

namespace fs = std::filesystem;

namespace {

std::vector<double> parse_axis_values(const std::string& text, std::string* name) {
  const auto eq = text.find('=');
  if (eq == std::string::npos) throw acd::ConfigError("--axis expects NAME=v1,v2,...");
  *name = text.substr(0, eq);
  std::vector<double> values;
  std::stringstream ss(text.substr(eq + 1));
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    try {
      std::size_t used = 0;
      values.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw acd::ConfigError("--axis: not a number: '" + item + "'");
    }
  }
  if (values.empty()) throw acd::ConfigError("--axis has no values");
  return values;
}

nlohmann::json read_json(const fs::path& file) {
  std::ifstream in(file);
  if (!in) throw acd::ConfigError("cannot open " + file.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw acd::ConfigError(file.string() + ": " + e.what());
  }
}

int cmd_paths(const fs::path& graph_file, bool relaxed, bool count_only) {
  const auto graph = acd::AttackGraph::load(graph_file, relaxed ? acd::GraphCheck::kRelaxed : acd::GraphCheck::kStrict);
  const auto paths = acd::enumerate_paths(graph);
  if (!count_only) {
    for (const auto& p : paths) {
      for (std::size_t i = 0; i < p.size(); ++i) std::cout << (i ? " " : "") << p[i];
      std::cout << "\n";
    }
  }
  if (count_only) {
    std::cout << paths.size() << "\n";
  } else {
    std::cerr << paths.size() << " paths\n";
  }
  return 0;
}

int cmd_validate(const fs::path& graph_file, const fs::path& catalog_file, bool relaxed) {
  const auto graph = acd::AttackGraph::load(graph_file, relaxed ? acd::GraphCheck::kRelaxed : acd::GraphCheck::kStrict);
  const auto catalog =
      acd::DefenseCatalog::load(catalog_file, graph, relaxed ? acd::CatalogCheck::kRelaxed : acd::CatalogCheck::kStrict);
  const auto paths = acd::enumerate_paths(graph);
  std::cout << "graph ok: " << graph.tactics().size() << " tactics, " << graph.techniques().size() << " techniques, "
            << graph.edges().size() << " edges, " << paths.size() << " paths\n";
  std::cout << "catalog ok: " << catalog.size() << " actions\n";
  return 0;
}

int cmd_train(const fs::path& config_file, const std::vector<std::uint64_t>& seeds) {
  auto config = acd::ExperimentConfig::load(config_file);
  if (!seeds.empty()) config.seeds = seeds;
  const auto experiment = acd::build_experiment(config);
  for (auto seed : config.seeds) {
    const auto run = acd::train_seed(config, experiment, seed);
    std::printf("seed %llu: %zu batches, final-5 DWR %.4f -> %s\n", static_cast<unsigned long long>(seed),
                run.batches.size(), acd::final_dwr(run.batches), run.run_dir.string().c_str());
  }
  return 0;
}

int cmd_eval(const fs::path& checkpoint_file, const fs::path& config_file, std::optional<std::uint64_t> seed,
             fs::path out_dir) {
  const auto config = acd::ExperimentConfig::load(config_file);
  const auto experiment = acd::build_experiment(config);
  const auto checkpoint = read_json(checkpoint_file);
  const auto report = acd::evaluate_checkpoint(checkpoint, config, experiment, seed.value_or(config.seeds.front()));
  if (out_dir.empty()) out_dir = checkpoint_file.parent_path();
  if (out_dir.empty()) out_dir = ".";
  fs::create_directories(out_dir);
  {
    std::ofstream json(out_dir / "eval_report.json", std::ios::binary | std::ios::trunc);
    json << report.to_json().dump(2) << "\n";
    std::ofstream csv(out_dir / "eval_histogram.csv", std::ios::binary | std::ios::trunc);
    report.write_histogram_csv(csv);
  }
  std::cout << report.to_json().dump(2) << "\n";
  return 0;
}

int cmd_sweep(const fs::path& config_file, const std::string& axis_text, int parallel) {
  const auto config = acd::ExperimentConfig::load(config_file);
  std::string name;
  const auto values = parse_axis_values(axis_text, &name);
  const auto result = acd::sweep(config, acd::parse_sweep_axis(name), values, parallel);
  for (std::size_t i = 0; i < result.entries.size(); ++i) {
    const auto& e = result.entries[i];
    std::printf("%s=%g  final-5 DWR %.4f%s\n", name.c_str(), e.value, e.score, i == result.winner ? "  (winner)" : "");
  }
  std::printf("summary: %s\n", (config.output_dir / "sweep_summary.csv").string().c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cyber-defense reinforcement learning simulator"};
  app.require_subcommand(1);

  fs::path graph_file, catalog_file, config_file, checkpoint_file, out_dir;
  bool relaxed = false, count_only = false;
  std::vector<std::uint64_t> seeds;
  std::uint64_t eval_seed = 0;
  std::string axis;
  int parallel = 1;

  auto* paths = app.add_subcommand("paths", "enumerate the attack paths of a graph");
  paths->add_option("--graph", graph_file, "attack graph file")->required()->check(CLI::ExistingFile);
  paths->add_flag("--relaxed", relaxed, "skip the default-size checks");
  paths->add_flag("--count", count_only, "print only the number of paths");

  auto* validate = app.add_subcommand("validate", "check a graph and defense catalog");
  validate->add_option("--graph", graph_file, "attack graph file")->required()->check(CLI::ExistingFile);
  validate->add_option("--catalog", catalog_file, "defense catalog file")->required()->check(CLI::ExistingFile);
  validate->add_flag("--relaxed", relaxed, "skip the default-size checks");

  auto* train = app.add_subcommand("train", "train agents for every configured seed");
  train->add_option("--config", config_file, "experiment config")->required()->check(CLI::ExistingFile);
  train->add_option("--seed", seeds, "override the config's seed list");

  auto* eval = app.add_subcommand("eval", "evaluate a checkpoint on the held-out paths");
  eval->add_option("--checkpoint", checkpoint_file, "agent checkpoint")->required()->check(CLI::ExistingFile);
  eval->add_option("--config", config_file, "experiment config")->required()->check(CLI::ExistingFile);
  auto* seed_opt = eval->add_option("--seed", eval_seed, "evaluation seed (default: first config seed)");
  eval->add_option("--out", out_dir, "report directory (default: next to the checkpoint)");

  auto* sweep = app.add_subcommand("sweep", "train once per value of one hyperparameter");
  sweep->add_option("--config", config_file, "base experiment config")->required()->check(CLI::ExistingFile);
  sweep->add_option("--axis", axis, "gamma=v1,v2,... or alpha=v1,v2,...")->required();
  sweep->add_option("--parallel", parallel, "concurrent runs")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*paths) return cmd_paths(graph_file, relaxed, count_only);
    if (*validate) return cmd_validate(graph_file, catalog_file, relaxed);
    if (*train) return cmd_train(config_file, seeds);
    if (*eval) {
      std::optional<std::uint64_t> seed;
      if (*seed_opt) seed = eval_seed;
      return cmd_eval(checkpoint_file, config_file, seed, out_dir);
    }
    if (*sweep) return cmd_sweep(config_file, axis, parallel);
  } catch (const acd::DivergenceError& e) {
    std::cerr << "simctl: training diverged: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "simctl: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
