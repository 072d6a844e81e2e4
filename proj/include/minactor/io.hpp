#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "minactor/search.hpp"
#include "minactor/train.hpp"

namespace minactor {

namespace fs = std::filesystem;

/// Shortest decimal that parses back to the same double; "" for NaN.
std::string format_number(double v);

void write_episodes_csv(const RunRecord& record, const fs::path& path);
/// alpha is left empty unless the run is SAC; pi_loss is empty for update
/// phases without an actor step.
void write_updates_csv(const RunRecord& record, const fs::path& path);
void write_eval_csv(const RunRecord& record, const fs::path& path);

/// "a16-16_c16-16"; an empty hidden list is written as "none".
std::string arch_dir_name(const ArchPair& arch);
fs::path run_dir(const fs::path& out, const std::string& env, Algo algo, const ArchPair& arch,
                 std::uint64_t seed);

/// Everything needed to rebuild and replay a trained actor.
struct Snapshot {
  std::string env;
  std::uint64_t seed = 0;
  AgentConfig config;
  nn::MlpParams actor;
  EvalStats final_eval;
  double best_seen = 0.0;
  bool diverged = false;
};

nlohmann::json snapshot_to_json(const RunRecord& record);
Snapshot snapshot_from_json(const nlohmann::json& j);
Snapshot load_snapshot(const fs::path& path);
/// Deterministic policy of a snapshot (SAC: squashed mean).
Policy snapshot_policy(const Snapshot& snap);

/// episodes.csv, updates.csv, eval.csv and snapshot.json into `dir`.
void write_run(const RunRecord& record, const fs::path& dir);

/// Search ledger for one (env, algo): every evaluated pair in order, plus a
/// fingerprint of the configuration that produced it.
struct LedgerFile {
  std::string fingerprint;
  nlohmann::json config;  // the single-algorithm experiment config
  std::vector<ArchEval> entries;
};

nlohmann::json arch_eval_to_json(const ArchEval& ev);
ArchEval arch_eval_from_json(const nlohmann::json& j);
void write_ledger(const LedgerFile& ledger, const fs::path& path);
LedgerFile read_ledger(const fs::path& path);

/// Writes through a temporary file and a rename so readers never see a
/// half-written document.
void write_text_atomic(const fs::path& path, const std::string& text);
std::string read_text(const fs::path& path);

}  // namespace minactor
