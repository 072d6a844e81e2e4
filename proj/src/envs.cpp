#include "minactor/envs.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "minactor/errors.hpp"
#include "minactor/rng.hpp"

namespace minactor::envs {
namespace {

constexpr double kPi = std::numbers::pi;

// Slice height inside the 2-D noise field; off-lattice so the slice never
// runs along a simplex edge.
constexpr double kSliceY = 0.37;

// Episodes start at a random point of the goal signal in [0, kOffsetRange).
constexpr double kOffsetRange = 1.0e5;

constexpr std::array<std::array<double, 2>, 12> kGrad = {{{1, 1},
                                                          {-1, 1},
                                                          {1, -1},
                                                          {-1, -1},
                                                          {1, 0},
                                                          {-1, 0},
                                                          {1, 0},
                                                          {-1, 0},
                                                          {0, 1},
                                                          {0, -1},
                                                          {0, 1},
                                                          {0, -1}}};

double clip(double x, double lo, double hi) { return std::min(std::max(x, lo), hi); }

double scalar_action(const Vec& action) {
  if (action.size() != 1) throw ContractError("expected a 1-D action");
  if (!std::isfinite(action(0))) throw ContractError("non-finite action");
  return action(0);
}

ToyState initial_toy_state(std::uint64_t episode_seed) {
  Rng rng(mix_seed(episode_seed, 0x70f));
  ToyState st;
  st.s = rng.uniform(-1.0, 1.0);
  st.time_offset = std::floor(rng.uniform(0.0, kOffsetRange));
  return st;
}

}  // namespace

SimplexNoise2D::SimplexNoise2D(std::uint64_t seed) {
  std::array<std::uint8_t, 256> p{};
  std::iota(p.begin(), p.end(), 0);
  Rng rng(mix_seed(seed, 0x5eed));
  for (std::size_t i = p.size() - 1; i > 0; --i) {
    std::swap(p[i], p[rng.index(i + 1)]);
  }
  for (std::size_t i = 0; i < perm_.size(); ++i) perm_[i] = p[i & 255];
}

double SimplexNoise2D::operator()(double xin, double yin) const {
  const double f2 = 0.5 * (std::sqrt(3.0) - 1.0);
  const double g2 = (3.0 - std::sqrt(3.0)) / 6.0;

  const double s = (xin + yin) * f2;
  const double i = std::floor(xin + s);
  const double j = std::floor(yin + s);
  const double t = (i + j) * g2;
  const double x0 = xin - (i - t);
  const double y0 = yin - (j - t);

  const int i1 = x0 > y0 ? 1 : 0;
  const int j1 = 1 - i1;

  const double x1 = x0 - i1 + g2;
  const double y1 = y0 - j1 + g2;
  const double x2 = x0 - 1.0 + 2.0 * g2;
  const double y2 = y0 - 1.0 + 2.0 * g2;

  const int ii = static_cast<int>(static_cast<std::int64_t>(i) & 255);
  const int jj = static_cast<int>(static_cast<std::int64_t>(j) & 255);
  const int gi0 = perm_[ii + perm_[jj]] % 12;
  const int gi1 = perm_[ii + i1 + perm_[jj + j1]] % 12;
  const int gi2 = perm_[ii + 1 + perm_[jj + 1]] % 12;

  auto corner = [&](int gi, double x, double y) {
    double r = 0.5 - x * x - y * y;
    if (r < 0.0) return 0.0;
    r *= r;
    return r * r * (kGrad[gi][0] * x + kGrad[gi][1] * y);
  };

  return 70.0 * (corner(gi0, x0, y0) + corner(gi1, x1, y1) + corner(gi2, x2, y2));
}

double noise_eval(double t, const ToyConfig& config, const SimplexNoise2D& noise) {
  return clip(noise(t * config.noise_frequency, kSliceY), -1.0, 1.0);
}

double noise_eval(double t, const ToyConfig& config) {
  return noise_eval(t, config, SimplexNoise2D(config.noise_seed));
}

double toy_goal(const ToyState& state, int t, const ToyConfig& config) {
  return noise_eval(state.time_offset + t, config);
}

std::pair<ToyState, EnvStep> toy_reset(const ToyConfig& config, std::uint64_t episode_seed) {
  const ToyState st = initial_toy_state(episode_seed);
  const double g0 = toy_goal(st, 0, config);
  return {st, EnvStep{toy_observation(st.s, g0), 0.0, false, 0}};
}

std::pair<ToyState, EnvStep> toy_step(const ToyState& state, double action, const ToyConfig& config) {
  const double a = clip(action, -config.action_bound, config.action_bound);
  ToyState next = state;
  next.s = clip(state.s + a, -1.0, 1.0);
  next.t = state.t + 1;
  const double g = toy_goal(next, next.t, config);
  return {next, EnvStep{toy_observation(next.s, g), -std::abs(g - next.s),
                        next.t >= config.episode_length, next.t}};
}

double wrap_angle(double theta) {
  double w = std::fmod(theta + kPi, 2.0 * kPi);
  if (w < 0.0) w += 2.0 * kPi;
  return w - kPi;
}

std::pair<PendulumState, EnvStep> pendulum_reset(const PendulumConfig& config,
                                                 std::uint64_t episode_seed) {
  (void)config;
  Rng rng(mix_seed(episode_seed, 0x9e2d));
  PendulumState st;
  st.theta = rng.uniform(-kPi, kPi);
  st.theta_dot = rng.uniform(-1.0, 1.0);
  st.t = 0;
  return {st, EnvStep{pendulum_observation(st), 0.0, false, 0}};
}

std::pair<PendulumState, EnvStep> pendulum_step(const PendulumState& state, double torque,
                                                const PendulumConfig& c) {
  const double u = clip(torque, -c.max_torque, c.max_torque);
  const double th = state.theta;
  const double thdot = state.theta_dot;

  const double w = wrap_angle(th);
  const double cost = w * w + 0.1 * thdot * thdot + 0.001 * u * u;

  const double accel =
      3.0 * c.gravity / (2.0 * c.length) * std::sin(th) + 3.0 / (c.mass * c.length * c.length) * u;
  PendulumState next;
  next.theta_dot = clip(thdot + accel * c.dt, -c.max_speed, c.max_speed);
  next.theta = th + next.theta_dot * c.dt;
  next.t = state.t + 1;
  return {next, EnvStep{pendulum_observation(next), -cost, next.t >= c.episode_length, next.t}};
}

ToyEnv::ToyEnv(ToyConfig config) : config_(config), noise_(config.noise_seed) {}

double ToyEnv::goal(int t) const {
  return noise_eval(state_.time_offset + t, config_, noise_);
}

EnvStep ToyEnv::reset(std::uint64_t episode_seed) {
  state_ = initial_toy_state(episode_seed);
  return {toy_observation(state_.s, goal(0)), 0.0, false, 0};
}

EnvStep ToyEnv::step(const Vec& action) {
  const double a = clip(scalar_action(action), -config_.action_bound, config_.action_bound);
  state_.s = clip(state_.s + a, -1.0, 1.0);
  state_.t += 1;
  const double g = goal(state_.t);
  return {toy_observation(state_.s, g), -std::abs(g - state_.s),
          state_.t >= config_.episode_length, state_.t};
}

PendulumEnv::PendulumEnv(PendulumConfig config) : config_(config) {}

EnvStep PendulumEnv::reset(std::uint64_t episode_seed) {
  auto [st, step] = pendulum_reset(config_, episode_seed);
  state_ = st;
  return step;
}

EnvStep PendulumEnv::step(const Vec& action) {
  auto [st, step] = pendulum_step(state_, scalar_action(action), config_);
  state_ = st;
  return step;
}

bool is_known_env(const std::string& name) { return name == "toy" || name == "pendulum"; }

std::unique_ptr<Environment> make_env(const std::string& name) {
  if (name == "toy") return std::make_unique<ToyEnv>();
  if (name == "pendulum") return std::make_unique<PendulumEnv>();
  throw ConfigError("env", "unknown environment '" + name + "' (expected toy or pendulum)");
}

}  // namespace minactor::envs
