#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "minactor/agent.hpp"

namespace minactor {

/// Ordered candidate hidden-layer configurations, smallest first.
struct Ladder {
  std::vector<std::vector<int>> rungs;

  /// |1,1| |4,4| |8,8| |16,16| |32,32| |64,64| |128,128| |256,256| |400,300|
  static Ladder standard();

  std::size_t size() const { return rungs.size(); }
  const std::vector<int>& operator[](std::size_t i) const { return rungs.at(i); }
  std::optional<std::size_t> index_of(const std::vector<int>& hidden) const;

  /// Throws ConfigError unless rungs are strictly increasing in param_count
  /// for the given input/output dims.
  void validate(int in_dim, int out_dim) const;

  bool operator==(const Ladder&) const = default;
};

struct ThresholdSpec {
  double threshold = 0.0;
  double tolerance_fraction = 0.10;
  int n_seeds = 6;

  bool operator==(const ThresholdSpec&) const = default;
};

/// mean >= threshold - tolerance_fraction * |threshold| (inclusive).
bool passes_threshold(double mean_reward, const ThresholdSpec& spec);

/// (1 - asym/sym) * 100.
double reduction_percent(std::int64_t sym_actor_params, std::int64_t asym_actor_params);

struct SeedResult {
  std::uint64_t seed = 0;
  double mean = 0.0;  // final evaluation mean of this run
  double std = 0.0;
  bool diverged = false;

  bool operator==(const SeedResult&) const = default;
};

/// Aggregate over seeds for one architecture pair.
struct ArchEval {
  ArchPair arch;
  std::string phase;  // "baseline", "symmetric", "asymmetric" or "audit"
  std::vector<SeedResult> seeds;
  double mean = 0.0;  // over non-diverged seeds; NaN if all diverged
  double std = 0.0;
  bool pass = false;

  bool operator==(const ArchEval&) const = default;
};

/// Trains one (arch, seed) cell and reports its final evaluation.
using Trainer = std::function<SeedResult(const ArchPair&, std::uint64_t seed)>;

/// Runs every seed (up to `parallelism` at once) and aggregates. Any
/// diverged seed fails the architecture.
ArchEval run_arch_eval(const Trainer& trainer, const ArchPair& arch, const ThresholdSpec& spec,
                       const std::vector<std::uint64_t>& seeds, int parallelism);

/// Smallest index in [0, n) whose evaluation passes, assuming pass/fail is
/// monotone in the index; nullopt when none passes. At most
/// ceil(log2(n + 1)) evaluations.
std::optional<std::size_t> binary_search_min(std::size_t n, const std::function<bool(std::size_t)>& evaluate);

inline std::optional<std::size_t> binary_search_min(const Ladder& ladder,
                                                    const std::function<bool(std::size_t)>& evaluate) {
  return binary_search_min(ladder.size(), evaluate);
}

/// Exhaustive scan counterpart, used by audit mode and tests.
std::optional<std::size_t> linear_search_min(std::size_t n, const std::function<bool(std::size_t)>& evaluate);

struct SearchResult {
  std::optional<ArchEval> baseline;
  std::optional<std::size_t> symmetric_index;
  std::optional<ArchEval> symmetric;
  std::optional<std::size_t> asymmetric_index;
  std::optional<ArchEval> asymmetric;
  double reduction_percent = 0.0;
  std::vector<ArchEval> ledger;  // every evaluation, in the order it ran

  // Audit mode: linear-scan answers for the same ladders.
  std::optional<std::size_t> audit_symmetric_index;
  std::optional<std::size_t> audit_asymmetric_index;
  bool audited = false;
};

/// Two-phase minimal-architecture search. Every evaluated pair is cached,
/// so a preloaded ledger lets an interrupted search resume without
/// retraining.
class ArchSearch {
 public:
  struct Options {
    Ladder ladder = Ladder::standard();
    ThresholdSpec spec;
    std::vector<std::uint64_t> seeds;
    int parallelism = 1;
    int obs_dim = 1;  // for reduction percentages
    int act_dim = 1;
  };

  ArchSearch(Trainer trainer, Options options);

  /// Seeds the cache; entries must come from the same configuration.
  void preload(const std::vector<ArchEval>& ledger);
  /// Called after every fresh (non-cached) evaluation.
  void on_evaluation(std::function<void(const ArchEval&)> callback) { callback_ = std::move(callback); }

  ArchEval evaluate(const ArchPair& arch, const std::string& phase);

  /// Smallest passing symmetric rung.
  std::optional<std::size_t> search_symmetric();
  /// Smallest passing actor rung at or below `symmetric_index` with the
  /// critic locked; returns `symmetric_index` when nothing smaller passes.
  std::size_t search_asymmetric(std::size_t symmetric_index, const std::vector<int>& locked_critic);

  /// Baseline (optional), symmetric phase, asymmetric phase; audit adds a
  /// linear scan of both phases.
  SearchResult run(const std::optional<std::vector<int>>& baseline_hidden, bool audit);

  const std::vector<ArchEval>& ledger() const { return ledger_; }
  std::int64_t fresh_evaluations() const { return fresh_; }

 private:
  const ArchEval* find(const ArchPair& arch) const;

  Trainer trainer_;
  Options opt_;
  std::vector<ArchEval> ledger_;
  std::vector<ArchEval> preloaded_;
  std::function<void(const ArchEval&)> callback_;
  std::int64_t fresh_ = 0;
};

}  // namespace minactor
