#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "minactor/nn.hpp"
#include "minactor/replay.hpp"
#include "minactor/rng.hpp"

namespace minactor {

enum class Algo { ddpg, td3, sac };

std::string to_string(Algo algo);
/// Throws ConfigError for anything but "ddpg", "td3", "sac".
Algo algo_from_string(const std::string& name);

/// Hidden widths of the actor and of the critic, chosen independently.
struct ArchPair {
  std::vector<int> actor_hidden;
  std::vector<int> critic_hidden;

  static ArchPair symmetric(const std::vector<int>& hidden) { return {hidden, hidden}; }
  bool is_symmetric() const { return actor_hidden == critic_hidden; }

  auto operator<=>(const ArchPair&) const = default;
};

/// "|16,16|"; an empty list prints as "||".
std::string format_hidden(const std::vector<int>& hidden);
/// "16,16" -> {16, 16}; "" -> {}. Throws ConfigError on junk.
std::vector<int> parse_hidden(const std::string& text);

/// How DDPG/TD3 actors squash their output. `automatic` picks tanh scaled to
/// the action bound, except on the toy task where the actor is linear.
enum class ActorOutput { automatic, linear, tanh };

std::string to_string(ActorOutput o);
ActorOutput actor_output_from_string(const std::string& name);
ActorOutput resolve_actor_output(ActorOutput requested, const std::string& env_name);

struct AgentConfig {
  Algo algo = Algo::ddpg;
  ArchPair arch{{400, 300}, {400, 300}};

  double gamma = 0.99;
  double tau = 0.005;
  double actor_lr = 1e-3;
  double critic_lr = 1e-3;
  int batch_size = 128;
  std::int64_t replay_capacity = 1'000'000;
  std::int64_t start_steps = 1000;
  std::int64_t update_after = 1000;
  std::int64_t update_every = 50;

  double exploration_sigma = 0.1;  // ddpg/td3, as a fraction of the action bound

  double target_noise_sigma = 0.2;  // td3
  double target_noise_clip = 0.5;
  int policy_delay = 2;

  double alpha = 0.2;  // sac
  bool auto_alpha = false;

  std::int64_t total_steps = 30'000;
  int eval_episodes = 10;
  std::int64_t eval_every = 5000;  // 0 disables periodic evaluation

  nn::Activation hidden_activation = nn::Activation::relu;
  ActorOutput actor_output = ActorOutput::automatic;

  /// Throws ConfigError naming the first invalid field.
  void validate() const;

  bool operator==(const AgentConfig&) const = default;
};

/// Defaults for an algorithm/environment pair (step budget differs per env).
AgentConfig default_agent_config(Algo algo, const std::string& env_name);

enum class ActionMode { explore, deterministic };

struct UpdateStats {
  double q_loss = 0.0;
  std::optional<double> pi_loss;  // absent when TD3 skipped its delayed actor step
  double alpha = 0.0;
};

/// Off-policy actor-critic learner with separately sized actor and critic.
///
/// DDPG keeps one critic; TD3 and SAC keep twin critics initialised from
/// different seeds. DDPG/TD3 actors are deterministic; the SAC actor emits
/// a mean and a log-std per action dimension and acts through a tanh squash.
class Agent {
 public:
  /// `config.actor_output` must already be resolved (not `automatic`);
  /// automatic is treated as tanh here.
  Agent(AgentConfig config, int obs_dim, int act_dim, double action_bound, std::uint64_t seed);

  const AgentConfig& config() const { return config_; }
  int obs_dim() const { return obs_dim_; }
  int act_dim() const { return act_dim_; }
  double action_bound() const { return bound_; }

  Vec select_action(const Vec& obs, ActionMode mode);
  /// Uniform in [-bound, bound], drawn from the agent's noise stream.
  Vec random_action();

  /// One critic step; returns the MSE (averaged over twins).
  double critic_update(const Batch& batch);
  /// One actor step; returns the negated objective. Does not touch targets.
  double actor_update(const Batch& batch);
  /// Polyak-average every target network toward its online counterpart.
  void update_targets();

  /// Critic step, then (delayed for TD3) actor step plus target tracking.
  UpdateStats update(const Batch& batch);

  double alpha() const;

  std::int64_t critic_updates() const { return critic_updates_; }
  std::int64_t actor_updates() const { return actor_updates_; }

  const nn::MlpParams& actor() const { return actor_; }
  nn::MlpParams& mutable_actor() { return actor_; }
  const nn::MlpParams& actor_target() const { return actor_target_; }
  int critic_count() const { return static_cast<int>(critics_.size()); }
  const nn::MlpParams& critic(int i) const { return critics_.at(static_cast<std::size_t>(i)); }
  nn::MlpParams& mutable_critic(int i) { return critics_.at(static_cast<std::size_t>(i)); }
  const nn::MlpParams& critic_target(int i) const {
    return critic_targets_.at(static_cast<std::size_t>(i));
  }

  /// Throws DivergenceError if any online network holds a non-finite value.
  void check_finite() const;

 private:
  struct SquashedSample {
    Mat action;      // act x B, already scaled by the bound
    Vec log_prob;    // B
    Mat mean;        // act x B (pre-squash)
    Mat log_std;     // act x B, clamped
    Mat clamp_mask;  // 1 where log_std was inside the clamp range
    Mat noise;       // standard normal draws used
    Mat pre_squash;  // mean + std * noise
  };

  Mat deterministic_actions(const Mat& obs) const;
  SquashedSample sample_sac(const nn::MlpParams& actor, const Mat& obs, nn::ForwardCache* cache);
  Mat critic_input(const Mat& s, const Mat& a) const;
  double critic_step(int i, const Mat& sa, const Vec& target);

  AgentConfig config_;
  int obs_dim_;
  int act_dim_;
  double bound_;

  nn::MlpParams actor_;
  nn::MlpParams actor_target_;
  std::vector<nn::MlpParams> critics_;
  std::vector<nn::MlpParams> critic_targets_;
  nn::AdamState actor_opt_;
  std::vector<nn::AdamState> critic_opts_;

  double log_alpha_;
  double alpha_m_ = 0.0;
  double alpha_v_ = 0.0;
  std::int64_t alpha_steps_ = 0;

  Rng rng_;
  std::int64_t critic_updates_ = 0;
  std::int64_t actor_updates_ = 0;
};

}  // namespace minactor
