#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <string>
#include <utility>

#include "minactor/nn.hpp"

namespace minactor::envs {

using nn::Vec;

struct EnvStep {
  Vec observation;
  double reward = 0.0;
  bool done = false;
  int t = 0;
};

// ---------------------------------------------------------------------------
// Goal tracking toy. The agent observes o = g - s and moves its internal state
// with s' = clip(s + a, -1, 1); reward is -|g' - s'|. Goals follow a smooth
// procedural noise signal. The analytic policy a = o is optimal.
// ---------------------------------------------------------------------------

struct ToyConfig {
  int episode_length = 200;
  double noise_frequency = 0.02;  // noise-space units per step
  std::uint64_t noise_seed = 0;
  double action_bound = 1.0;

  bool operator==(const ToyConfig&) const = default;
};

struct ToyState {
  double s = 0.0;
  double time_offset = 0.0;  // where this episode's goal signal starts
  int t = 0;
};

/// 2-D simplex gradient noise with a seeded permutation table.
class SimplexNoise2D {
 public:
  explicit SimplexNoise2D(std::uint64_t seed);

  /// Raw noise, roughly in [-1, 1].
  double operator()(double x, double y) const;

 private:
  std::array<std::uint8_t, 512> perm_{};
};

/// Goal signal: a 1-D slice of seeded simplex noise, clamped to [-1, 1].
double noise_eval(double t, const ToyConfig& config);

/// Same as noise_eval but reuses a prebuilt noise table.
double noise_eval(double t, const ToyConfig& config, const SimplexNoise2D& noise);

double toy_goal(const ToyState& state, int t, const ToyConfig& config);

/// Observation for internal state s and goal g.
inline Vec toy_observation(double s, double g) { return Vec::Constant(1, g - s); }

std::pair<ToyState, EnvStep> toy_reset(const ToyConfig& config, std::uint64_t episode_seed);

std::pair<ToyState, EnvStep> toy_step(const ToyState& state, double action, const ToyConfig& config);

// ---------------------------------------------------------------------------
// Inverted pendulum swing-up with the classic-control constants.
// ---------------------------------------------------------------------------

struct PendulumConfig {
  double gravity = 10.0;
  double mass = 1.0;
  double length = 1.0;
  double dt = 0.05;
  double max_torque = 2.0;
  double max_speed = 8.0;
  int episode_length = 200;

  bool operator==(const PendulumConfig&) const = default;
};

struct PendulumState {
  double theta = 0.0;
  double theta_dot = 0.0;
  int t = 0;
};

/// Maps an angle to [-pi, pi).
double wrap_angle(double theta);

inline Vec pendulum_observation(const PendulumState& s) {
  Vec o(3);
  o << std::cos(s.theta), std::sin(s.theta), s.theta_dot;
  return o;
}

std::pair<PendulumState, EnvStep> pendulum_reset(const PendulumConfig& config,
                                                 std::uint64_t episode_seed);

std::pair<PendulumState, EnvStep> pendulum_step(const PendulumState& state, double torque,
                                                const PendulumConfig& config);

// ---------------------------------------------------------------------------
// Common episodic interface used by the training loop.
// ---------------------------------------------------------------------------

class Environment {
 public:
  virtual ~Environment() = default;

  virtual std::string name() const = 0;
  virtual int obs_dim() const = 0;
  virtual int act_dim() const = 0;
  virtual double action_bound() const = 0;
  virtual int episode_length() const = 0;

  virtual EnvStep reset(std::uint64_t episode_seed) = 0;
  /// Actions are clipped to [-bound, bound] before use.
  virtual EnvStep step(const Vec& action) = 0;

  virtual std::unique_ptr<Environment> clone() const = 0;
};

class ToyEnv final : public Environment {
 public:
  explicit ToyEnv(ToyConfig config = {});

  std::string name() const override { return "toy"; }
  int obs_dim() const override { return 1; }
  int act_dim() const override { return 1; }
  double action_bound() const override { return config_.action_bound; }
  int episode_length() const override { return config_.episode_length; }

  EnvStep reset(std::uint64_t episode_seed) override;
  EnvStep step(const Vec& action) override;
  std::unique_ptr<Environment> clone() const override { return std::make_unique<ToyEnv>(*this); }

  const ToyState& state() const { return state_; }
  const ToyConfig& config() const { return config_; }
  /// Goal at step t of the current episode.
  double goal(int t) const;

 private:
  ToyConfig config_;
  SimplexNoise2D noise_;
  ToyState state_;
};

class PendulumEnv final : public Environment {
 public:
  explicit PendulumEnv(PendulumConfig config = {});

  std::string name() const override { return "pendulum"; }
  int obs_dim() const override { return 3; }
  int act_dim() const override { return 1; }
  double action_bound() const override { return config_.max_torque; }
  int episode_length() const override { return config_.episode_length; }

  EnvStep reset(std::uint64_t episode_seed) override;
  EnvStep step(const Vec& action) override;
  std::unique_ptr<Environment> clone() const override {
    return std::make_unique<PendulumEnv>(*this);
  }

  const PendulumState& state() const { return state_; }

 private:
  PendulumConfig config_;
  PendulumState state_;
};

/// "toy" or "pendulum"; throws ConfigError otherwise.
std::unique_ptr<Environment> make_env(const std::string& name);

bool is_known_env(const std::string& name);

}  // namespace minactor::envs
