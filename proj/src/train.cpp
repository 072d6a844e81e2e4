#include "minactor/train.hpp"

#include <chrono>
#include <cmath>
#include <limits>

#include "minactor/errors.hpp"

namespace minactor {
namespace {

EvalStats summarize(std::vector<double> returns) {
  EvalStats s;
  double sum = 0.0;
  for (double r : returns) sum += r;
  s.mean = sum / static_cast<double>(returns.size());
  double sq = 0.0;
  for (double r : returns) sq += (r - s.mean) * (r - s.mean);
  s.std = std::sqrt(sq / static_cast<double>(returns.size()));
  s.per_episode = std::move(returns);
  return s;
}

}  // namespace

EvalStats evaluate_policy(const Policy& policy, envs::Environment& env, int n_episodes,
                          std::uint64_t seed) {
  if (n_episodes < 1) throw ContractError("evaluate_policy: n_episodes must be >= 1");
  std::vector<double> returns;
  returns.reserve(static_cast<std::size_t>(n_episodes));
  for (int ep = 0; ep < n_episodes; ++ep) {
    auto step = env.reset(mix_seed(seed, static_cast<std::uint64_t>(ep)));
    double total = 0.0;
    while (!step.done) {
      step = env.step(policy(step.observation));
      total += step.reward;
    }
    returns.push_back(total);
  }
  return summarize(std::move(returns));
}

EvalStats evaluate_policy(Agent& agent, envs::Environment& env, int n_episodes, std::uint64_t seed) {
  return evaluate_policy([&agent](const Vec& o) { return agent.select_action(o, ActionMode::deterministic); },
                         env, n_episodes, seed);
}

std::uint64_t eval_seed_for(std::uint64_t run_seed) { return mix_seed(run_seed, 0xe7a1); }

RunRecord train_run(const std::string& env_name, const AgentConfig& config, std::uint64_t seed) {
  auto env = envs::make_env(env_name);
  return train_run(*env, config, seed);
}

RunRecord train_run(envs::Environment& env, const AgentConfig& config, std::uint64_t seed) {
  const auto started = std::chrono::steady_clock::now();

  RunRecord rec;
  rec.env_name = env.name();
  rec.config = config;
  rec.seed = seed;
  rec.best_seen = -std::numeric_limits<double>::infinity();

  AgentConfig resolved = config;
  resolved.actor_output = resolve_actor_output(config.actor_output, env.name());
  Agent agent(resolved, env.obs_dim(), env.act_dim(), env.action_bound(), seed);
  ReplayBuffer buffer(config.replay_capacity, env.obs_dim(), env.act_dim());
  Rng sampler(mix_seed(seed, 5));
  const std::uint64_t episode_seeds = mix_seed(seed, 6);
  const std::uint64_t eval_seed = eval_seed_for(seed);
  auto eval_env = env.clone();

  try {
    std::int64_t episode = 0;
    auto step = env.reset(mix_seed(episode_seeds, 0));
    double ep_return = 0.0;

    for (std::int64_t t = 1; t <= config.total_steps; ++t) {
      const Vec a = t <= config.start_steps ? agent.random_action()
                                            : agent.select_action(step.observation, ActionMode::explore);
      if (!a.allFinite()) throw DivergenceError("non-finite action");
      auto next = env.step(a);
      // Time-limit ends are truncations, not terminal states.
      buffer.push({step.observation, a, next.reward, next.observation, false});
      ep_return += next.reward;
      step = std::move(next);

      if (step.done) {
        rec.episodes.push_back({episode, t, ep_return});
        ++episode;
        ep_return = 0.0;
        step = env.reset(mix_seed(episode_seeds, static_cast<std::uint64_t>(episode)));
      }

      if (t >= config.update_after && t % config.update_every == 0) {
        double q_sum = 0.0, pi_sum = 0.0, alpha = 0.0;
        int pi_n = 0;
        for (std::int64_t j = 0; j < config.update_every; ++j) {
          const auto stats = agent.update(buffer.sample(config.batch_size, sampler));
          q_sum += stats.q_loss;
          if (stats.pi_loss) {
            pi_sum += *stats.pi_loss;
            ++pi_n;
          }
          alpha = stats.alpha;
          ++rec.gradient_updates;
        }
        rec.updates.push_back({t, q_sum / static_cast<double>(config.update_every),
                               pi_n ? pi_sum / pi_n : std::numeric_limits<double>::quiet_NaN(),
                               alpha});
      }

      if (config.eval_every > 0 && t % config.eval_every == 0 && t < config.total_steps) {
        const auto ev = evaluate_policy(agent, *eval_env, config.eval_episodes, eval_seed);
        if (ev.mean > rec.best_seen) {
          rec.best_seen = ev.mean;
          rec.best_seen_step = t;
        }
      }
    }

    rec.final_eval = evaluate_policy(agent, *eval_env, config.eval_episodes, eval_seed);
    if (!std::isfinite(rec.final_eval.mean)) throw DivergenceError("non-finite evaluation return");
    if (rec.final_eval.mean > rec.best_seen) {
      rec.best_seen = rec.final_eval.mean;
      rec.best_seen_step = config.total_steps;
    }
  } catch (const DivergenceError& e) {
    rec.diverged = true;
    rec.divergence_reason = e.what();
    rec.final_eval = EvalStats{-std::numeric_limits<double>::infinity(), 0.0, {}};
  }

  rec.actor = agent.actor();
  rec.wall_clock_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return rec;
}

Vec toy_ideal_action(const Vec& obs) { return obs; }

Vec zero_action(const Vec& obs) { return Vec::Zero(obs.size()); }

double normalized_score(double ret, double zero_return, double ideal_return) {
  const double span = ideal_return - zero_return;
  if (!(std::abs(span) > 0.0)) throw ContractError("normalized_score: ideal equals zero-policy return");
  return (ret - zero_return) / span;
}

}  // namespace minactor
