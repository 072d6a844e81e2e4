#pragma once

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "minactor/config.hpp"
#include "minactor/io.hpp"
#include "minactor/search.hpp"

namespace minactor {

struct AlgoOutcome {
  Algo algo = Algo::ddpg;
  ThresholdSpec spec;
  SearchResult result;
  std::int64_t fresh_evaluations = 0;  // evaluations not served from a resumed ledger
};

struct ExperimentResult {
  std::string env;
  int obs_dim = 1;
  int act_dim = 1;
  std::vector<AlgoOutcome> outcomes;
};

using TrainerFactory = std::function<Trainer(Algo)>;

struct RunOptions {
  /// Replaces real training, e.g. with a stub in tests.
  TrainerFactory trainer_factory;
  /// Progress lines, one per finished evaluation.
  std::ostream* log = nullptr;
};

/// Trains one cell with `train_run`, writes its CSVs and snapshot under the
/// run directory and reports the final evaluation. With `config.resume`, a
/// snapshot left by an identical earlier run is reused.
Trainer make_default_trainer(const ExperimentConfig& config, Algo algo);

/// Identifies everything that influences an algorithm's search results.
std::string config_fingerprint(const ExperimentConfig& config, Algo algo);

fs::path ledger_path(const ExperimentConfig& config, Algo algo);

/// Baseline, symmetric search and asymmetric search for every algorithm.
/// The ledger is rewritten after every evaluation; with `config.resume` a
/// matching ledger is replayed instead of retraining.
ExperimentResult run_experiment(const ExperimentConfig& config, const RunOptions& options = {});

/// Rebuilds results from the ledgers under `output_dir/env`, replaying
/// each recorded search without training.
ExperimentResult load_results(const fs::path& output_dir, const std::string& env);

enum class ReportFormat { markdown, csv };

struct ReportRow {
  std::string algo;
  std::string threshold;
  std::string baseline_size;
  std::string baseline_reward;
  std::string symmetric_size;
  std::string symmetric_reward;
  std::string asymmetric_actor_size;
  std::string reduction;
  std::string critic_size;
  std::string reward;
};

std::vector<ReportRow> report_rows(const ExperimentResult& result);
std::string emit_report(const ExperimentResult& result, ReportFormat format);

}  // namespace minactor
