#include <gtest/gtest.h>

#include <cmath>

#include "minactor/envs.hpp"
#include "minactor/errors.hpp"
#include "minactor/rng.hpp"
#include "oracles.hpp"

using namespace minactor;
using namespace minactor::envs;

TEST(Noise, RangeDeterminismAndSmoothness) {
  ToyConfig cfg;
  SimplexNoise2D noise(cfg.noise_seed);
  double lo = 1, hi = -1;
  for (int i = 0; i < 20000; ++i) {
    const double t = i * 0.37;
    const double v = noise_eval(t, cfg, noise);
    ASSERT_GE(v, -1.0);
    ASSERT_LE(v, 1.0);
    ASSERT_EQ(v, noise_eval(t, cfg, noise));
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  // The goal has to actually move around the state range.
  EXPECT_LT(lo, -0.5);
  EXPECT_GT(hi, 0.5);

  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    ToyConfig c;
    c.noise_seed = seed;
    SimplexNoise2D n(seed);
    for (double t = 0; t < 5000; t += 0.5) {
      ASSERT_LT(std::abs(noise_eval(t + 0.01, c, n) - noise_eval(t, c, n)), 0.05) << "t=" << t;
    }
  }
}

TEST(Noise, SeedChangesSignal) {
  ToyConfig a, b;
  b.noise_seed = 1;
  int differ = 0;
  for (int t = 0; t < 100; ++t) differ += noise_eval(t, a) != noise_eval(t, b);
  EXPECT_GT(differ, 90);
}

TEST(Toy, ObservationIsGoalMinusState) {
  EXPECT_DOUBLE_EQ(toy_observation(0.5, 0.3)(0), 0.3 - 0.5);
  EXPECT_NEAR(toy_observation(0.5, 0.3)(0), -0.2, 1e-15);
  EXPECT_EQ(toy_observation(0.42, 0.42)(0), 0.0);
}

TEST(Toy, ResetIsDeterministic) {
  ToyConfig cfg;
  auto [s1, o1] = toy_reset(cfg, 123);
  auto [s2, o2] = toy_reset(cfg, 123);
  EXPECT_EQ(s1.s, s2.s);
  EXPECT_EQ(s1.time_offset, s2.time_offset);
  EXPECT_EQ(o1.observation, o2.observation);
  EXPECT_EQ(o1.observation(0), toy_goal(s1, 0, cfg) - s1.s);
  EXPECT_EQ(s1.t, 0);
}

TEST(Toy, StepClipsState) {
  ToyConfig cfg;
  ToyState st{0.5, 0.0, 0};
  auto [next, step] = toy_step(st, 0.7, cfg);
  EXPECT_EQ(next.s, 1.0);
  EXPECT_EQ(next.t, 1);
  const double g = toy_goal(next, 1, cfg);
  EXPECT_EQ(step.reward, -std::abs(g - 1.0));
}

TEST(Toy, RewardIsMinusDistance) {
  // Pick an offset where the next goal is known, then place the state so
  // that s' = 0.5 and check r = -|g - s'|.
  ToyConfig cfg;
  ToyState st{0.5, 10.0, 0};
  const double g1 = toy_goal(st, 1, cfg);
  auto [next, step] = toy_step(st, 0.0, cfg);
  EXPECT_EQ(next.s, 0.5);
  EXPECT_EQ(step.reward, -std::abs(g1 - 0.5));
}

TEST(Toy, TrackingTheGoalExactlyGivesZeroReward) {
  ToyConfig cfg;
  ToyState st{0.0, 42.0, 0};
  st.s = toy_goal(st, 1, cfg);
  auto [next, step] = toy_step(st, 0.0, cfg);
  EXPECT_EQ(step.reward, 0.0);
  (void)next;
}

TEST(Toy, ActionIsClippedToBound) {
  ToyConfig cfg;
  ToyState st{-1.0, 0.0, 0};
  auto [a, sa] = toy_step(st, 5.0, cfg);
  auto [b, sb] = toy_step(st, 1.0, cfg);
  EXPECT_EQ(a.s, b.s);
  EXPECT_EQ(a.s, 0.0);
  (void)sa;
  (void)sb;
}

TEST(Toy, EpisodeEndsAtLength) {
  ToyEnv env;
  auto step = env.reset(7);
  int n = 0;
  while (!step.done) {
    step = env.step(Vec::Zero(1));
    ++n;
  }
  EXPECT_EQ(n, 200);
  EXPECT_EQ(step.t, 200);
}

TEST(Toy, IdealPolicyRewardsAreGoalIncrements) {
  // With a = o the state lands on the current goal, so each reward is
  // -|g_{t+1} - g_t| (as long as nothing clips, which holds since |g| <= 1).
  ToyEnv env;
  auto step = env.reset(3);
  for (int t = 0; t < 200; ++t) {
    const double g_now = env.goal(t);
    step = env.step(step.observation);
    const double g_next = env.goal(t + 1);
    ASSERT_NEAR(step.reward, -std::abs(g_next - g_now), 1e-15);
  }
}

TEST(Pendulum, UprightObservation) {
  PendulumState s{0.0, 0.0, 0};
  const Vec o = pendulum_observation(s);
  EXPECT_EQ(o(0), 1.0);
  EXPECT_EQ(o(1), 0.0);
  EXPECT_EQ(o(2), 0.0);
}

TEST(Pendulum, ObservationOnUnitCircle) {
  PendulumEnv env;
  Rng rng(5);
  auto step = env.reset(11);
  for (int i = 0; i < 200; ++i) {
    ASSERT_NEAR(step.observation(0) * step.observation(0) + step.observation(1) * step.observation(1), 1.0, 1e-12);
    Vec u(1);
    u(0) = rng.uniform(-2, 2);
    step = env.step(u);
  }
}

TEST(Pendulum, ResetDeterministic) {
  PendulumConfig cfg;
  auto [a, oa] = pendulum_reset(cfg, 9);
  auto [b, ob] = pendulum_reset(cfg, 9);
  EXPECT_EQ(a.theta, b.theta);
  EXPECT_EQ(a.theta_dot, b.theta_dot);
  EXPECT_EQ(oa.observation, ob.observation);
  EXPECT_LE(std::abs(a.theta), M_PI);
  EXPECT_LE(std::abs(a.theta_dot), 1.0);
}

TEST(Pendulum, UprightEquilibrium) {
  PendulumConfig cfg;
  auto [next, step] = pendulum_step({0.0, 0.0, 0}, 0.0, cfg);
  EXPECT_EQ(next.theta, 0.0);
  EXPECT_EQ(next.theta_dot, 0.0);
  EXPECT_EQ(step.reward, 0.0);
}

TEST(Pendulum, HangingDownCost) {
  PendulumConfig cfg;
  auto [next, step] = pendulum_step({M_PI, 0.0, 0}, 0.0, cfg);
  EXPECT_NEAR(step.reward, -M_PI * M_PI, 1e-12);
  EXPECT_NEAR(step.reward, -9.8696, 1e-4);
  (void)next;
}

TEST(Pendulum, MatchesReferenceIntegrator) {
  PendulumConfig cfg;
  oracle::PendulumRef ref;
  {
    auto [next, step] = pendulum_step({0.1, 0.0, 0}, 0.0, cfg);
    auto r = ref.step(0.1, 0.0, 0.0);
    EXPECT_NEAR(next.theta, r.theta, 1e-12);
    EXPECT_NEAR(next.theta_dot, r.theta_dot, 1e-12);
    EXPECT_NEAR(step.reward, r.reward, 1e-12);
  }
  Rng rng(17);
  for (int i = 0; i < 1000; ++i) {
    const double th = rng.uniform(-3 * M_PI, 3 * M_PI), thd = rng.uniform(-8, 8), u = rng.uniform(-3, 3);
    auto [next, step] = pendulum_step({th, thd, 0}, u, cfg);
    auto r = ref.step(th, thd, u);
    ASSERT_NEAR(next.theta, r.theta, 1e-12);
    ASSERT_NEAR(next.theta_dot, r.theta_dot, 1e-12);
    ASSERT_NEAR(step.reward, r.reward, 1e-12);
  }
}

TEST(Pendulum, SpeedIsClamped) {
  PendulumConfig cfg;
  auto [next, step] = pendulum_step({M_PI / 2, 7.99, 0}, 2.0, cfg);
  EXPECT_EQ(next.theta_dot, 8.0);
  (void)step;
}

TEST(Pendulum, WrapAngle) {
  EXPECT_NEAR(wrap_angle(3 * M_PI / 2), -M_PI / 2, 1e-15);
  EXPECT_NEAR(wrap_angle(-3 * M_PI / 2), M_PI / 2, 1e-15);
  EXPECT_NEAR(wrap_angle(0.25), 0.25, 1e-15);
  EXPECT_NEAR(wrap_angle(M_PI), -M_PI, 1e-15);
}

TEST(Pendulum, EpisodeLength) {
  PendulumEnv env;
  auto step = env.reset(1);
  int n = 0;
  while (!step.done) {
    step = env.step(Vec::Zero(1));
    ++n;
  }
  EXPECT_EQ(n, 200);
}

TEST(MakeEnv, KnownAndUnknown) {
  EXPECT_EQ(make_env("toy")->obs_dim(), 1);
  EXPECT_EQ(make_env("pendulum")->obs_dim(), 3);
  EXPECT_EQ(make_env("pendulum")->action_bound(), 2.0);
  EXPECT_THROW(make_env("pendullum"), ConfigError);
  EXPECT_FALSE(is_known_env("cartpole"));
}

TEST(Environment, CloneIsIndependent) {
  PendulumEnv env;
  env.reset(4);
  auto copy = env.clone();
  Vec u = Vec::Constant(1, 1.0);
  const auto a = env.step(u);
  const auto b = copy->step(u);
  EXPECT_EQ(a.observation, b.observation);
  env.step(u);
  EXPECT_NE(env.state().t, static_cast<PendulumEnv&>(*copy).state().t);
}
