#include "minactor/agent.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "minactor/errors.hpp"

namespace minactor {
namespace {

constexpr double kLogStdMin = -20.0;
constexpr double kLogStdMax = 2.0;

double softplus(double x) { return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x))); }

void require_finite(double value, const char* what) {
  if (!std::isfinite(value)) throw DivergenceError(std::string("non-finite ") + what);
}

}  // namespace

std::string to_string(Algo algo) {
  switch (algo) {
    case Algo::ddpg:
      return "ddpg";
    case Algo::td3:
      return "td3";
    case Algo::sac:
      return "sac";
  }
  return "?";
}

Algo algo_from_string(const std::string& name) {
  if (name == "ddpg") return Algo::ddpg;
  if (name == "td3") return Algo::td3;
  if (name == "sac") return Algo::sac;
  throw ConfigError("algo", "unknown algorithm '" + name + "' (expected ddpg, td3 or sac)");
}

std::string format_hidden(const std::vector<int>& hidden) {
  std::string out = "|";
  for (std::size_t i = 0; i < hidden.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(hidden[i]);
  }
  return out + "|";
}

std::vector<int> parse_hidden(const std::string& text) {
  std::vector<int> out;
  std::string body = text;
  std::erase_if(body, [](char c) { return c == ' ' || c == '|'; });
  if (body.empty() || body == "none") return out;
  std::stringstream ss(body);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    int v = 0;
    try {
      v = std::stoi(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != item.size() || v < 1) {
      throw ConfigError("hidden", "bad layer width '" + item + "' in '" + text + "'");
    }
    out.push_back(v);
  }
  if (out.size() > 2) throw ConfigError("hidden", "at most two hidden layers: '" + text + "'");
  return out;
}

std::string to_string(ActorOutput o) {
  switch (o) {
    case ActorOutput::automatic:
      return "auto";
    case ActorOutput::linear:
      return "linear";
    case ActorOutput::tanh:
      return "tanh";
  }
  return "?";
}

ActorOutput actor_output_from_string(const std::string& name) {
  if (name == "auto") return ActorOutput::automatic;
  if (name == "linear") return ActorOutput::linear;
  if (name == "tanh") return ActorOutput::tanh;
  throw ConfigError("actor_output", "expected auto, linear or tanh, got '" + name + "'");
}

ActorOutput resolve_actor_output(ActorOutput requested, const std::string& env_name) {
  if (requested != ActorOutput::automatic) return requested;
  return env_name == "toy" ? ActorOutput::linear : ActorOutput::tanh;
}

void AgentConfig::validate() const {
  auto fail = [](const char* key, const std::string& why) { throw ConfigError(key, why); };
  for (int h : arch.actor_hidden) {
    if (h < 1) fail("actor_hidden", "widths must be >= 1");
  }
  for (int h : arch.critic_hidden) {
    if (h < 1) fail("critic_hidden", "widths must be >= 1");
  }
  if (arch.actor_hidden.size() > 2) fail("actor_hidden", "at most two hidden layers");
  if (arch.critic_hidden.size() > 2) fail("critic_hidden", "at most two hidden layers");
  if (!(gamma >= 0.0 && gamma < 1.0)) fail("gamma", "must lie in [0, 1)");
  if (!(tau >= 0.0 && tau <= 1.0)) fail("tau", "must lie in [0, 1]");
  if (!(actor_lr > 0.0)) fail("actor_lr", "must be > 0");
  if (!(critic_lr > 0.0)) fail("critic_lr", "must be > 0");
  if (batch_size < 1) fail("batch_size", "must be >= 1");
  if (replay_capacity < batch_size) fail("replay_capacity", "must be >= batch_size");
  if (start_steps < 0) fail("start_steps", "must be >= 0");
  if (update_after < batch_size) fail("update_after", "must be >= batch_size");
  if (update_every < 1) fail("update_every", "must be >= 1");
  if (!(exploration_sigma >= 0.0)) fail("exploration_sigma", "must be >= 0");
  if (!(target_noise_sigma >= 0.0)) fail("target_noise_sigma", "must be >= 0");
  if (!(target_noise_clip >= 0.0)) fail("target_noise_clip", "must be >= 0");
  if (policy_delay < 1) fail("policy_delay", "must be >= 1");
  if (!(alpha >= 0.0)) fail("alpha", "must be >= 0");
  if (total_steps < 0) fail("total_steps", "must be >= 0");
  if (eval_episodes < 1) fail("eval_episodes", "must be >= 1");
  if (eval_every < 0) fail("eval_every", "must be >= 0");
}

AgentConfig default_agent_config(Algo algo, const std::string& env_name) {
  AgentConfig c;
  c.algo = algo;
  c.arch = algo == Algo::sac ? ArchPair::symmetric({256, 256}) : ArchPair::symmetric({400, 300});
  if (env_name == "pendulum") {
    c.total_steps = 50'000;
    c.gamma = 0.98;
    c.start_steps = 10'000;
    c.update_after = 10'000;
  } else {
    c.total_steps = 30'000;
  }
  return c;
}

Agent::Agent(AgentConfig config, int obs_dim, int act_dim, double action_bound, std::uint64_t seed)
    : config_(std::move(config)),
      obs_dim_(obs_dim),
      act_dim_(act_dim),
      bound_(action_bound),
      log_alpha_(std::log(std::max(config_.alpha, 1e-300))),
      rng_(mix_seed(seed, 4)) {
  config_.validate();
  if (obs_dim < 1 || act_dim < 1) throw SpecError("agent dims must be >= 1");
  if (!(action_bound > 0.0)) throw SpecError("action bound must be > 0");

  nn::MlpSpec actor_spec{obs_dim, config_.arch.actor_hidden, act_dim, config_.hidden_activation,
                         nn::OutputActivation::linear()};
  if (config_.algo == Algo::sac) {
    actor_spec.out_dim = 2 * act_dim;
  } else if (config_.actor_output != ActorOutput::linear) {
    actor_spec.output = nn::OutputActivation::tanh_scaled(action_bound);
  }
  actor_ = nn::init_mlp(actor_spec, mix_seed(seed, 1));
  actor_target_ = actor_;
  actor_opt_ = nn::AdamState::fresh(actor_, config_.actor_lr);

  const nn::MlpSpec critic_spec{obs_dim + act_dim, config_.arch.critic_hidden, 1,
                                config_.hidden_activation, nn::OutputActivation::linear()};
  const int n_critics = config_.algo == Algo::ddpg ? 1 : 2;
  for (int i = 0; i < n_critics; ++i) {
    critics_.push_back(nn::init_mlp(critic_spec, mix_seed(seed, 2 + static_cast<std::uint64_t>(i))));
    critic_opts_.push_back(nn::AdamState::fresh(critics_.back(), config_.critic_lr));
  }
  critic_targets_ = critics_;
}

double Agent::alpha() const { return config_.algo == Algo::sac ? std::exp(log_alpha_) : 0.0; }

Mat Agent::critic_input(const Mat& s, const Mat& a) const {
  Mat sa(obs_dim_ + act_dim_, s.cols());
  sa.topRows(obs_dim_) = s;
  sa.bottomRows(act_dim_) = a;
  return sa;
}

Mat Agent::deterministic_actions(const Mat& obs) const {
  Mat out = nn::forward_batch(actor_, obs);
  if (config_.algo == Algo::sac) {
    return (out.topRows(act_dim_).array().tanh() * bound_).matrix();
  }
  return out.cwiseMax(-bound_).cwiseMin(bound_);
}

Agent::SquashedSample Agent::sample_sac(const nn::MlpParams& actor, const Mat& obs,
                                        nn::ForwardCache* cache) {
  const Mat out = nn::forward_batch(actor, obs, cache);
  const Eigen::Index n = obs.cols();
  SquashedSample s;
  s.mean = out.topRows(act_dim_);
  const Mat raw = out.bottomRows(act_dim_);
  s.log_std = raw.cwiseMax(kLogStdMin).cwiseMin(kLogStdMax);
  s.clamp_mask = ((raw.array() >= kLogStdMin) && (raw.array() <= kLogStdMax)).cast<double>().matrix();
  s.noise.resize(act_dim_, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i < act_dim_; ++i) s.noise(i, j) = rng_.normal();
  }
  s.pre_squash = s.mean + (s.log_std.array().exp() * s.noise.array()).matrix();
  s.action = (s.pre_squash.array().tanh() * bound_).matrix();

  const double half_log_2pi = 0.5 * std::log(2.0 * std::numbers::pi);
  s.log_prob = Vec::Zero(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    double lp = 0.0;
    for (Eigen::Index i = 0; i < act_dim_; ++i) {
      const double u = s.pre_squash(i, j);
      const double e = s.noise(i, j);
      lp += -0.5 * e * e - s.log_std(i, j) - half_log_2pi;
      lp -= 2.0 * (std::numbers::ln2 - u - softplus(-2.0 * u));
    }
    s.log_prob(j) = lp;
  }
  return s;
}

Vec Agent::random_action() {
  Vec a(act_dim_);
  for (Eigen::Index i = 0; i < act_dim_; ++i) a(i) = rng_.uniform(-bound_, bound_);
  return a;
}

Vec Agent::select_action(const Vec& obs, ActionMode mode) {
  if (obs.size() != obs_dim_) throw ContractError("select_action: observation has wrong length");
  if (mode == ActionMode::deterministic) return deterministic_actions(obs).col(0);

  if (config_.algo == Algo::sac) return sample_sac(actor_, obs, nullptr).action.col(0);

  Vec a = deterministic_actions(obs).col(0);
  for (Eigen::Index i = 0; i < act_dim_; ++i) {
    a(i) += config_.exploration_sigma * bound_ * rng_.normal();
  }
  return a.cwiseMax(-bound_).cwiseMin(bound_);
}

double Agent::critic_step(int i, const Mat& sa, const Vec& target) {
  auto& critic = critics_[static_cast<std::size_t>(i)];
  nn::ForwardCache cache;
  const Mat q = nn::forward_batch(critic, sa, &cache);
  const Eigen::Index n = sa.cols();
  const Mat diff = q - target.transpose();
  const double loss = diff.squaredNorm() / static_cast<double>(n);
  require_finite(loss, "critic loss");
  const auto grads = nn::backward_batch(critic, cache, diff * (2.0 / static_cast<double>(n)), false);
  nn::adam_step(critic, grads.params, critic_opts_[static_cast<std::size_t>(i)]);
  return loss;
}

double Agent::critic_update(const Batch& batch) {
  if (batch.size() == 0) throw ContractError("critic_update: empty batch");
  const Eigen::Index n = batch.size();

  Vec next_value(n);
  switch (config_.algo) {
    case Algo::ddpg: {
      const Mat a2 = nn::forward_batch(actor_target_, batch.s2).cwiseMax(-bound_).cwiseMin(bound_);
      next_value = nn::forward_batch(critic_targets_[0], critic_input(batch.s2, a2)).row(0).transpose();
      break;
    }
    case Algo::td3: {
      Mat a2 = nn::forward_batch(actor_target_, batch.s2);
      const double clip = config_.target_noise_clip * bound_;
      for (Eigen::Index j = 0; j < n; ++j) {
        for (Eigen::Index i = 0; i < act_dim_; ++i) {
          const double eps = config_.target_noise_sigma * bound_ * rng_.normal();
          a2(i, j) += std::clamp(eps, -clip, clip);
        }
      }
      a2 = a2.cwiseMax(-bound_).cwiseMin(bound_);
      const Mat sa2 = critic_input(batch.s2, a2);
      const Mat q1 = nn::forward_batch(critic_targets_[0], sa2);
      const Mat q2 = nn::forward_batch(critic_targets_[1], sa2);
      next_value = q1.cwiseMin(q2).row(0).transpose();
      break;
    }
    case Algo::sac: {
      const auto next = sample_sac(actor_, batch.s2, nullptr);
      const Mat sa2 = critic_input(batch.s2, next.action);
      const Mat q1 = nn::forward_batch(critic_targets_[0], sa2);
      const Mat q2 = nn::forward_batch(critic_targets_[1], sa2);
      next_value = q1.cwiseMin(q2).row(0).transpose() - alpha() * next.log_prob;
      break;
    }
  }

  const Vec target =
      batch.r + config_.gamma * (Vec::Ones(n) - batch.done).cwiseProduct(next_value);
  const Mat sa = critic_input(batch.s, batch.a);
  double loss = 0.0;
  for (int i = 0; i < critic_count(); ++i) loss += critic_step(i, sa, target);
  ++critic_updates_;
  return loss / critic_count();
}

double Agent::actor_update(const Batch& batch) {
  if (batch.size() == 0) throw ContractError("actor_update: empty batch");
  const Eigen::Index n = batch.size();
  const double inv_n = 1.0 / static_cast<double>(n);

  double loss = 0.0;
  nn::ForwardCache actor_cache;
  Mat actor_out_grad;

  if (config_.algo != Algo::sac) {
    const Mat a = nn::forward_batch(actor_, batch.s, &actor_cache);
    nn::ForwardCache critic_cache;
    const Mat q = nn::forward_batch(critics_[0], critic_input(batch.s, a), &critic_cache);
    loss = -q.sum() * inv_n;
    require_finite(loss, "actor loss");
    const auto cg = nn::backward_batch(critics_[0], critic_cache, Mat::Constant(1, n, -inv_n), true);
    actor_out_grad = cg.inputs.bottomRows(act_dim_);
  } else {
    const auto smp = sample_sac(actor_, batch.s, &actor_cache);
    const Mat sa = critic_input(batch.s, smp.action);
    nn::ForwardCache c1, c2;
    const Mat q1 = nn::forward_batch(critics_[0], sa, &c1);
    const Mat q2 = nn::forward_batch(critics_[1], sa, &c2);
    const Mat pick1 = (q1.array() <= q2.array()).cast<double>().matrix();
    const Mat qmin = q1.cwiseMin(q2);
    const double a_coef = alpha();
    loss = (a_coef * smp.log_prob.sum() - qmin.sum()) * inv_n;
    require_finite(loss, "actor loss");

    // d(-Qmin)/da through whichever twin is smaller per sample.
    const auto g1 = nn::backward_batch(critics_[0], c1, -pick1 * inv_n, true);
    const auto g2 = nn::backward_batch(critics_[1], c2, -(Mat::Ones(1, n) - pick1) * inv_n, true);
    const Mat dloss_da = g1.inputs.bottomRows(act_dim_) + g2.inputs.bottomRows(act_dim_);

    const Mat th = smp.pre_squash.array().tanh().matrix();
    const Mat dloss_du = (a_coef * inv_n * 2.0 * th.array() +
                          dloss_da.array() * bound_ * (1.0 - th.array().square()))
                             .matrix();
    actor_out_grad.resize(2 * act_dim_, n);
    actor_out_grad.topRows(act_dim_) = dloss_du;
    actor_out_grad.bottomRows(act_dim_) =
        ((-a_coef * inv_n + dloss_du.array() * smp.log_std.array().exp() * smp.noise.array()) *
         smp.clamp_mask.array())
            .matrix();

    if (config_.auto_alpha) {
      const double target_entropy = -static_cast<double>(act_dim_);
      const double g = -(smp.log_prob.array() + target_entropy).mean();
      require_finite(g, "alpha gradient");
      ++alpha_steps_;
      const double b1 = 0.9, b2 = 0.999;
      alpha_m_ = b1 * alpha_m_ + (1.0 - b1) * g;
      alpha_v_ = b2 * alpha_v_ + (1.0 - b2) * g * g;
      const double mh = alpha_m_ / (1.0 - std::pow(b1, static_cast<double>(alpha_steps_)));
      const double vh = alpha_v_ / (1.0 - std::pow(b2, static_cast<double>(alpha_steps_)));
      log_alpha_ -= config_.actor_lr * mh / (std::sqrt(vh) + 1e-8);
    }
  }

  const auto ag = nn::backward_batch(actor_, actor_cache, actor_out_grad, false);
  nn::adam_step(actor_, ag.params, actor_opt_);
  ++actor_updates_;
  return loss;
}

void Agent::update_targets() {
  if (config_.algo != Algo::sac) nn::soft_update(actor_target_, actor_, config_.tau);
  for (std::size_t i = 0; i < critics_.size(); ++i) {
    nn::soft_update(critic_targets_[i], critics_[i], config_.tau);
  }
}

UpdateStats Agent::update(const Batch& batch) {
  UpdateStats stats;
  stats.q_loss = critic_update(batch);
  const bool actor_turn =
      config_.algo != Algo::td3 || critic_updates_ % config_.policy_delay == 0;
  if (actor_turn) {
    stats.pi_loss = actor_update(batch);
    update_targets();
  }
  stats.alpha = alpha();
  check_finite();
  return stats;
}

void Agent::check_finite() const {
  if (!actor_.all_finite()) throw DivergenceError("non-finite actor parameter");
  for (const auto& c : critics_) {
    if (!c.all_finite()) throw DivergenceError("non-finite critic parameter");
  }
  if (!std::isfinite(log_alpha_) && config_.algo == Algo::sac) {
    throw DivergenceError("non-finite entropy temperature");
  }
}

}  // namespace minactor
