#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "minactor/agent.hpp"
#include "minactor/envs.hpp"

namespace minactor {

using Policy = std::function<Vec(const Vec&)>;

struct EvalStats {
  double mean = 0.0;
  double std = 0.0;  // population std over episodes
  std::vector<double> per_episode;
};

struct EpisodeRow {
  std::int64_t episode = 0;
  std::int64_t step = 0;  // env steps taken when the episode ended
  double ep_return = 0.0;
};

/// Losses averaged over the gradient steps of one update phase.
struct UpdateRow {
  std::int64_t step = 0;
  double q_loss = 0.0;
  double pi_loss = 0.0;
  double alpha = 0.0;
};

struct RunRecord {
  std::string env_name;
  AgentConfig config;
  std::uint64_t seed = 0;

  std::vector<EpisodeRow> episodes;
  std::vector<UpdateRow> updates;
  std::int64_t gradient_updates = 0;

  EvalStats final_eval;
  double best_seen = 0.0;
  std::int64_t best_seen_step = 0;

  bool diverged = false;
  std::string divergence_reason;
  double wall_clock_seconds = 0.0;

  nn::MlpParams actor;  // final actor, for snapshots and replays
};

/// Runs `n_episodes` episodes of `policy` on `env`; episode i resets with
/// mix_seed(seed, i).
EvalStats evaluate_policy(const Policy& policy, envs::Environment& env, int n_episodes,
                          std::uint64_t seed);

/// Deterministic-mode evaluation of a trained agent.
EvalStats evaluate_policy(Agent& agent, envs::Environment& env, int n_episodes, std::uint64_t seed);

/// Per-run seed from which final-evaluation episode seeds are derived.
std::uint64_t eval_seed_for(std::uint64_t run_seed);

/// Full interaction loop: uniform random actions for `start_steps`, then
/// exploration; `update_every` gradient steps every `update_every` env
/// steps once `update_after` is reached; final deterministic evaluation.
/// A divergence ends the run early with `diverged` set.
RunRecord train_run(const std::string& env_name, const AgentConfig& config, std::uint64_t seed);
RunRecord train_run(envs::Environment& env, const AgentConfig& config, std::uint64_t seed);

/// Reference policies for the tracking toy.
Vec toy_ideal_action(const Vec& obs);
Vec zero_action(const Vec& obs);

/// Fraction of the way from the zero-action policy's return to the ideal
/// policy's return; 1 is ideal, 0 is no better than doing nothing.
double normalized_score(double ret, double zero_return, double ideal_return);

}  // namespace minactor
