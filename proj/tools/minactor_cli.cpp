// minactor: train single runs, run architecture searches, replay snapshots,
// print actor parameter counts and re-emit reports.

#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "minactor/config.hpp"
#include "minactor/envs.hpp"
#include "minactor/errors.hpp"
#include "minactor/experiment.hpp"
#include "minactor/io.hpp"
#include "minactor/train.hpp"

namespace {

using namespace minactor;

// "key=value" pairs; values are read as JSON when possible, else as strings.
nlohmann::json parse_overrides(const std::vector<std::string>& items) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& item : items) {
    const auto eq = item.find('=');
    if (eq == std::string::npos || eq == 0) throw ConfigError(item, "expected key=value");
    const auto key = item.substr(0, eq);
    const auto value = item.substr(eq + 1);
    auto parsed = nlohmann::json::parse(value, nullptr, false);
    j[key] = parsed.is_discarded() ? nlohmann::json(value) : parsed;
  }
  return j;
}

ReportFormat format_from(const std::string& s) { return s == "csv" ? ReportFormat::csv : ReportFormat::markdown; }

std::string summary(const EvalStats& e) {
  char buf[96];
  std::snprintf(buf, sizeof buf, "%.2f ± %.2f", e.mean, e.std);
  return buf;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Actor/critic size search for off-policy actor-critic agents"};
  app.require_subcommand(1);

  // train
  auto* train = app.add_subcommand("train", "Train one (env, algo, actor, critic, seed) run");
  std::string env = "toy", algo = "ddpg", actor, critic, out_dir = default_output_dir();
  std::uint64_t seed = 0;
  std::int64_t steps = 0;
  std::vector<std::string> sets;
  bool actor_given = false, critic_given = false;
  train->add_option("--env", env, "toy or pendulum")->capture_default_str();
  train->add_option("--algo", algo, "ddpg, td3 or sac")->capture_default_str();
  train->add_option("--actor", actor, "actor hidden sizes, e.g. 16,16 (empty for none)")
      ->each([&](const std::string&) { actor_given = true; });
  train->add_option("--critic", critic, "critic hidden sizes")->each([&](const std::string&) { critic_given = true; });
  train->add_option("--seed", seed)->capture_default_str();
  train->add_option("--steps", steps, "override total_steps");
  train->add_option("--set", sets, "agent override key=value (repeatable)");
  train->add_option("--out", out_dir, "output directory")->capture_default_str();

  // search
  auto* search = app.add_subcommand("search", "Run the full baseline / symmetric / asymmetric search");
  std::string config_path;
  bool resume = false, audit = false;
  std::string search_out;
  std::string format = "markdown";
  search->add_option("--config", config_path, "experiment JSON file")->required();
  search->add_option("--out", search_out, "override output_dir");
  search->add_flag("--resume", resume, "reuse a matching ledger in the output directory");
  search->add_flag("--audit", audit, "also run a linear scan of every ladder");
  search->add_option("--format", format, "report format")->check(CLI::IsMember({"markdown", "csv"}));

  // eval
  auto* eval = app.add_subcommand("eval", "Evaluate a saved snapshot");
  std::string snapshot_path;
  int episodes = 10;
  std::uint64_t eval_seed = 0;
  bool eval_seed_given = false;
  eval->add_option("--snapshot", snapshot_path, "snapshot.json of a finished run")->required();
  eval->add_option("--episodes", episodes)->capture_default_str()->check(CLI::PositiveNumber);
  eval->add_option("--seed", eval_seed, "evaluation seed (default: the run's own)")
      ->each([&](const std::string&) { eval_seed_given = true; });

  // params
  auto* params = app.add_subcommand("params", "Actor parameter counts over the standard ladder");
  std::vector<std::string> param_envs;
  params->add_option("--env", param_envs, "environment(s)")->required();

  // report
  auto* report = app.add_subcommand("report", "Re-emit the results table from saved ledgers");
  std::string report_out = default_output_dir(), report_env;
  report->add_option("--out", report_out, "output directory")->capture_default_str();
  report->add_option("--env", report_env, "environment")->required();
  report->add_option("--format", format, "report format")->check(CLI::IsMember({"markdown", "csv"}));

  CLI11_PARSE(app, argc, argv);

  try {
    if (*train) {
      if (!envs::is_known_env(env)) throw ConfigError("env", "unknown environment '" + env + "'");
      const Algo a = algo_from_string(algo);
      AgentConfig cfg = default_agent_config(a, env);
      if (actor_given) cfg.arch.actor_hidden = parse_hidden(actor);
      if (critic_given) cfg.arch.critic_hidden = parse_hidden(critic);
      if (steps > 0) cfg.total_steps = steps;
      cfg = agent_config_from_json(parse_overrides(sets), cfg);

      const auto rec = train_run(env, cfg, seed);
      const auto dir = run_dir(out_dir, env, a, cfg.arch, seed);
      write_run(rec, dir);
      std::cout << "actor " << format_hidden(cfg.arch.actor_hidden) << " critic " << format_hidden(cfg.arch.critic_hidden)
                << " seed " << seed << ": final " << summary(rec.final_eval) << ", " << rec.episodes.size()
                << " episodes, " << rec.gradient_updates << " updates";
      if (rec.diverged) std::cout << ", diverged (" << rec.divergence_reason << ")";
      std::cout << "\nwrote " << dir.string() << '\n';
      return rec.diverged ? 2 : 0;
    }

    if (*search) {
      auto cfg = load_config(config_path);
      if (!search_out.empty()) cfg.output_dir = search_out;
      if (resume) cfg.resume = true;
      if (audit) cfg.audit = true;
      RunOptions opts;
      opts.log = &std::cerr;
      const auto result = run_experiment(cfg, opts);
      const auto fmt = format_from(format);
      const auto text = emit_report(result, fmt);
      write_text_atomic(fs::path(cfg.output_dir) / cfg.env / (fmt == ReportFormat::csv ? "report.csv" : "report.md"),
                        text);
      std::cout << text;
      return 0;
    }

    if (*eval) {
      const auto snap = load_snapshot(snapshot_path);
      auto env_ptr = envs::make_env(snap.env);
      const auto s = eval_seed_given ? eval_seed : eval_seed_for(snap.seed);
      const auto stats = evaluate_policy(snapshot_policy(snap), *env_ptr, episodes, s);
      std::cout << snap.env << " " << to_string(snap.config.algo) << " actor "
                << format_hidden(snap.config.arch.actor_hidden) << ": " << summary(stats) << " over " << episodes
                << " episodes\n";
      return 0;
    }

    if (*params) {
      std::vector<std::unique_ptr<envs::Environment>> es;
      for (const auto& e : param_envs) es.push_back(envs::make_env(e));
      const auto ladder = Ladder::standard();
      std::printf("%-12s", "hidden");
      for (const auto& e : es) std::printf(" %10s", e->name().c_str());
      std::printf("\n");
      for (std::size_t i = ladder.size(); i-- > 0;) {
        std::printf("%-12s", format_hidden(ladder[i]).c_str());
        for (const auto& e : es) {
          std::printf(" %10lld", static_cast<long long>(nn::param_count(e->obs_dim(), ladder[i], e->act_dim())));
        }
        std::printf("\n");
      }
      return 0;
    }

    if (*report) {
      const auto result = load_results(report_out, report_env);
      std::cout << emit_report(result, format_from(format));
      return 0;
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
