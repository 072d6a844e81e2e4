#include "minactor/experiment.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <sstream>

#include "minactor/envs.hpp"
#include "minactor/errors.hpp"
#include "minactor/train.hpp"

namespace minactor {
namespace {

ExperimentConfig single_algo(const ExperimentConfig& config, Algo algo) {
  ExperimentConfig c = config;
  c.name.clear();
  c.algos = {algo};
  c.thresholds = {{algo, config.threshold_spec(algo).threshold}};
  const auto it = config.baseline_hidden.find(algo);
  c.baseline_hidden = {{algo, it != config.baseline_hidden.end() ? it->second : default_baseline_hidden(algo)}};
  c.output_dir.clear();
  c.parallelism = 1;
  c.resume = false;
  c.audit = false;
  return c;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string fmt(const char* pattern, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, pattern, v);
  return buf;
}

std::string reward_cell(const ArchEval& ev) {
  if (std::isnan(ev.mean)) return "diverged";
  return fmt("%.2f", ev.mean) + " ± " + fmt("%.2f", ev.std);
}

std::string upper(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return s;
}

void log_eval(std::ostream* log, Algo algo, const ArchEval& ev) {
  if (!log) return;
  int diverged = 0;
  for (const auto& s : ev.seeds) diverged += s.diverged ? 1 : 0;
  *log << "[" << to_string(algo) << "] " << ev.phase << " actor " << format_hidden(ev.arch.actor_hidden)
       << " critic " << format_hidden(ev.arch.critic_hidden) << ": " << reward_cell(ev) << (ev.pass ? " pass" : " fail");
  if (diverged) *log << " (" << diverged << " diverged)";
  *log << '\n' << std::flush;
}

ArchSearch::Options search_options(const ExperimentConfig& config, Algo algo) {
  const auto env = envs::make_env(config.env);
  ArchSearch::Options opt;
  opt.ladder = config.ladder;
  opt.spec = config.threshold_spec(algo);
  opt.seeds = config.seeds;
  opt.parallelism = config.parallelism;
  opt.obs_dim = env->obs_dim();
  opt.act_dim = env->act_dim();
  return opt;
}

}  // namespace

std::string config_fingerprint(const ExperimentConfig& config, Algo algo) {
  const auto text = serialize_config(single_algo(config, algo));
  std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return hex64(h);
}

fs::path ledger_path(const ExperimentConfig& config, Algo algo) {
  return fs::path(config.output_dir) / config.env / to_string(algo) / "ledger.json";
}

Trainer make_default_trainer(const ExperimentConfig& config, Algo algo) {
  return [config, algo](const ArchPair& arch, std::uint64_t seed) {
    const AgentConfig agent = config.agent_config(algo, arch);
    const auto dir = run_dir(config.output_dir, config.env, algo, arch, seed);
    const auto snapshot_file = dir / "snapshot.json";
    if (config.resume && fs::exists(snapshot_file)) {
      try {
        const auto snap = load_snapshot(snapshot_file);
        if (snap.env == config.env && snap.seed == seed && snap.config == agent) {
          return SeedResult{seed, snap.final_eval.mean, snap.final_eval.std, snap.diverged};
        }
      } catch (const IoError&) {
        // Unreadable leftovers are simply retrained.
      }
    }
    const auto rec = train_run(config.env, agent, seed);
    write_run(rec, dir);
    return SeedResult{seed, rec.final_eval.mean, rec.final_eval.std, rec.diverged};
  };
}

ExperimentResult run_experiment(const ExperimentConfig& config, const RunOptions& options) {
  // Name typos must fail before anything trains.
  const auto env = envs::make_env(config.env);
  if (config.algos.empty()) throw ConfigError("algos", "at least one algorithm is required");
  if (config.seeds.empty()) throw ConfigError("seeds", "at least one seed is required");
  config.ladder.validate(env->obs_dim(), env->act_dim());
  config.agent.validate();

  ExperimentResult out;
  out.env = config.env;
  out.obs_dim = env->obs_dim();
  out.act_dim = env->act_dim();

  for (Algo algo : config.algos) {
    Trainer trainer = options.trainer_factory ? options.trainer_factory(algo) : make_default_trainer(config, algo);
    ArchSearch search(std::move(trainer), search_options(config, algo));

    LedgerFile ledger;
    ledger.fingerprint = config_fingerprint(config, algo);
    ledger.config = nlohmann::json::parse(serialize_config(single_algo(config, algo)));
    const auto path = ledger_path(config, algo);

    if (config.resume && fs::exists(path)) {
      const auto previous = read_ledger(path);
      if (previous.fingerprint != ledger.fingerprint) {
        throw ConfigError("resume", "ledger at '" + path.string() +
                                        "' was produced by a different configuration; "
                                        "use a fresh output_dir or drop resume");
      }
      search.preload(previous.entries);
    }

    search.on_evaluation([&](const ArchEval& ev) {
      ledger.entries.push_back(ev);
      write_ledger(ledger, path);
      log_eval(options.log, algo, ev);
    });

    std::optional<std::vector<int>> baseline;
    if (config.run_baseline) {
      const auto it = config.baseline_hidden.find(algo);
      baseline = it != config.baseline_hidden.end() ? it->second : default_baseline_hidden(algo);
    }

    AlgoOutcome outcome;
    outcome.algo = algo;
    outcome.spec = config.threshold_spec(algo);
    outcome.result = search.run(baseline, config.audit);
    outcome.fresh_evaluations = search.fresh_evaluations();
    ledger.entries = outcome.result.ledger;
    write_ledger(ledger, path);
    out.outcomes.push_back(std::move(outcome));
  }
  return out;
}

ExperimentResult load_results(const fs::path& output_dir, const std::string& env_name) {
  const auto env = envs::make_env(env_name);
  ExperimentResult out;
  out.env = env_name;
  out.obs_dim = env->obs_dim();
  out.act_dim = env->act_dim();

  for (Algo algo : {Algo::ddpg, Algo::td3, Algo::sac}) {
    const auto path = output_dir / env_name / to_string(algo) / "ledger.json";
    if (!fs::exists(path)) continue;
    const auto ledger = read_ledger(path);
    const auto config = parse_config(ledger.config.dump());

    ArchSearch search(
        [path](const ArchPair& arch, std::uint64_t) -> SeedResult {
          throw IoError("ledger '" + path.string() + "' has no entry for actor " + format_hidden(arch.actor_hidden) +
                        " critic " + format_hidden(arch.critic_hidden) + "; the search did not finish");
        },
        search_options(config, algo));
    search.preload(ledger.entries);

    std::optional<std::vector<int>> baseline;
    bool audit = false;
    for (const auto& e : ledger.entries) {
      if (e.phase == "baseline") baseline = e.arch.actor_hidden;
      if (e.phase == "audit") audit = true;
    }

    AlgoOutcome outcome;
    outcome.algo = algo;
    outcome.spec = config.threshold_spec(algo);
    outcome.result = search.run(baseline, audit);
    out.outcomes.push_back(std::move(outcome));
  }
  if (out.outcomes.empty()) {
    throw IoError("no ledgers found under '" + (output_dir / env_name).string() + "'");
  }
  return out;
}

std::vector<ReportRow> report_rows(const ExperimentResult& result) {
  std::vector<ReportRow> rows;
  for (const auto& o : result.outcomes) {
    const auto& r = o.result;
    ReportRow row;
    row.algo = upper(to_string(o.algo));
    row.threshold = fmt("%g", o.spec.threshold);
    row.baseline_size = r.baseline ? format_hidden(r.baseline->arch.actor_hidden) : "n/a";
    row.baseline_reward = r.baseline ? reward_cell(*r.baseline) : "n/a";
    if (r.symmetric && r.asymmetric) {
      row.symmetric_size = format_hidden(r.symmetric->arch.actor_hidden);
      row.symmetric_reward = reward_cell(*r.symmetric);
      row.asymmetric_actor_size = format_hidden(r.asymmetric->arch.actor_hidden);
      const auto sym = nn::param_count(result.obs_dim, r.symmetric->arch.actor_hidden, result.act_dim);
      const auto asym = nn::param_count(result.obs_dim, r.asymmetric->arch.actor_hidden, result.act_dim);
      row.reduction = fmt("%.2f", reduction_percent(sym, asym)) + "%";
      row.critic_size = format_hidden(r.asymmetric->arch.critic_hidden);
      row.reward = reward_cell(*r.asymmetric);
    } else {
      row.symmetric_size = "none passed";
      row.symmetric_reward = row.asymmetric_actor_size = row.reduction = row.critic_size = row.reward = "n/a";
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string emit_report(const ExperimentResult& result, ReportFormat format) {
  static const std::vector<std::string> header = {
      "Algorithm",  "Threshold",           "Baseline size", "Baseline reward", "Symmetric size",
      "Symmetric reward", "Asymmetric actor size", "Reduction %",   "Critic size",     "Reward"};
  const auto rows = report_rows(result);
  auto cells = [](const ReportRow& r) {
    return std::vector<std::string>{r.algo,           r.threshold,
                                    r.baseline_size,  r.baseline_reward,
                                    r.symmetric_size, r.symmetric_reward,
                                    r.asymmetric_actor_size, r.reduction,
                                    r.critic_size,    r.reward};
  };

  std::ostringstream out;
  if (format == ReportFormat::markdown) {
    auto line = [&](const std::vector<std::string>& v) {
      out << '|';
      for (const auto& c : v) {
        std::string escaped;
        for (char ch : c) {
          if (ch == '|') escaped += '\\';
          escaped += ch;
        }
        out << ' ' << escaped << " |";
      }
      out << '\n';
    };
    out << "### " << result.env << "\n\n";
    line(header);
    out << '|';
    for (std::size_t i = 0; i < header.size(); ++i) out << " --- |";
    out << '\n';
    for (const auto& r : rows) line(cells(r));
  } else {
    auto line = [&](const std::vector<std::string>& v) {
      for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out << ',';
        if (v[i].find_first_of(",\"\n") != std::string::npos) {
          out << '"';
          for (char ch : v[i]) {
            if (ch == '"') out << '"';
            out << ch;
          }
          out << '"';
        } else {
          out << v[i];
        }
      }
      out << '\n';
    };
    line(header);
    for (const auto& r : rows) line(cells(r));
  }
  return out.str();
}

}  // namespace minactor
