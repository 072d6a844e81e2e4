#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "minactor/agent.hpp"
#include "minactor/search.hpp"

namespace minactor {

/// One batch experiment: which env, which algorithms, how to search.
/// Parsing resolves every default, so two configs compare equal iff they
/// describe the same experiment.
struct ExperimentConfig {
  std::string name = "experiment";
  std::string env = "toy";
  std::vector<Algo> algos;
  Ladder ladder = Ladder::standard();
  std::map<Algo, double> thresholds;
  double tolerance_fraction = 0.10;
  std::vector<std::uint64_t> seeds;
  int parallelism = 1;
  std::string output_dir;

  /// Shared training hyper-parameters; `algo` and `arch` are set per run.
  AgentConfig agent;

  bool run_baseline = true;
  std::map<Algo, std::vector<int>> baseline_hidden;
  bool audit = false;
  bool resume = false;

  ThresholdSpec threshold_spec(Algo algo) const;
  /// Fully resolved training config for one cell of the search.
  AgentConfig agent_config(Algo algo, const ArchPair& arch) const;

  bool operator==(const ExperimentConfig&) const = default;
};

/// Threshold defaults: -160 on pendulum for every algorithm; -10 on the toy.
double default_threshold(const std::string& env, Algo algo);
std::vector<int> default_baseline_hidden(Algo algo);

/// Parses a JSON document. Throws ConfigError naming the offending key for
/// malformed JSON, unknown keys, or invalid values.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);
std::string serialize_config(const ExperimentConfig& config);

nlohmann::json agent_config_to_json(const AgentConfig& config);
/// Reads the keys present in `j` on top of `base`; unknown keys are errors.
AgentConfig agent_config_from_json(const nlohmann::json& j, AgentConfig base);

/// Output directory default: $MINACTOR_OUT, else "runs".
std::string default_output_dir();

}  // namespace minactor
