#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "minactor/config.hpp"
#include "minactor/errors.hpp"

using namespace minactor;

namespace {

std::string key_of(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e.key_path();
  }
  return "<no error>";
}

}  // namespace

TEST(Config, MinimalDocumentGetsDefaults) {
  const auto c = parse_config(R"({"env": "toy", "algos": ["ddpg"]})");
  EXPECT_EQ(c.env, "toy");
  EXPECT_EQ(c.algos, std::vector<Algo>{Algo::ddpg});
  EXPECT_EQ(c.seeds, (std::vector<std::uint64_t>{0, 1, 2, 3, 4, 5}));
  EXPECT_EQ(c.ladder, Ladder::standard());
  EXPECT_EQ(c.tolerance_fraction, 0.10);
  EXPECT_GE(c.parallelism, 1);
  EXPECT_LE(c.parallelism, 6);
  EXPECT_TRUE(c.run_baseline);
  EXPECT_FALSE(c.resume);
  EXPECT_EQ(c.agent.total_steps, 30000);
  EXPECT_EQ(c.agent.gamma, 0.99);
  EXPECT_EQ(c.agent.start_steps, 1000);
  EXPECT_EQ(c.baseline_hidden.at(Algo::ddpg), (std::vector<int>{400, 300}));
  EXPECT_EQ(c.threshold_spec(Algo::ddpg).n_seeds, 6);
}

TEST(Config, PendulumDefaults) {
  const auto c = parse_config(R"({"env": "pendulum", "algos": ["ddpg", "sac"]})");
  EXPECT_EQ(c.threshold_spec(Algo::ddpg).threshold, -160);
  EXPECT_EQ(c.threshold_spec(Algo::sac).threshold, -160);
  EXPECT_EQ(c.agent.total_steps, 50000);
  EXPECT_EQ(c.agent.gamma, 0.98);
  EXPECT_EQ(c.agent.start_steps, 10000);
  EXPECT_EQ(c.agent.update_after, 10000);
  EXPECT_EQ(c.baseline_hidden.at(Algo::sac), (std::vector<int>{256, 256}));
  const auto a = c.agent_config(Algo::sac, {{4, 4}, {16, 16}});
  EXPECT_EQ(a.algo, Algo::sac);
  EXPECT_EQ(a.arch.actor_hidden, (std::vector<int>{4, 4}));
}

TEST(Config, UnknownKeyIsNamed) {
  EXPECT_EQ(key_of(R"({"env": "toy", "algos": ["ddpg"], "actir_hidden": [4]})"), "actir_hidden");
  try {
    parse_config(R"({"env": "toy", "algos": ["ddpg"], "actir_hidden": [4]})");
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("actir_hidden"), std::string::npos);
  }
}

TEST(Config, InvalidValuesNameTheirKey) {
  EXPECT_EQ(key_of(R"({"env": "toy", "algos": ["ddpg"], "gamma": "high"})"), "gamma");
  EXPECT_EQ(key_of(R"({"env": "toy", "algos": ["ddpg"], "gamma": 1.5})"), "gamma");
  EXPECT_EQ(key_of(R"({"env": "toy", "algos": ["ddpgg"]})"), "algos[0]");
  EXPECT_EQ(key_of(R"({"env": "cartpole", "algos": ["ddpg"]})"), "env");
  EXPECT_EQ(key_of(R"({"algos": ["ddpg"]})"), "env");
  EXPECT_EQ(key_of(R"({"env": "toy"})"), "algos");
  EXPECT_EQ(key_of(R"({"env": "toy", "algos": ["ddpg"], "seeds": [0, -1]})"), "seeds[1]");
  EXPECT_EQ(key_of(R"({"env": "toy", "algos": ["ddpg"], "seeds": [0, 1], "n_seeds": 3})"), "n_seeds");
  EXPECT_EQ(key_of(R"({"env": "toy", "algos": ["ddpg"], "parallelism": 0})"), "parallelism");
  EXPECT_EQ(key_of(R"({"env": "toy", "algos": ["ddpg"], "ladder": [[8, 8], [4, 4]]})"), "ladder");
  EXPECT_EQ(key_of(R"({"env": "toy", "algos": ["ddpg"], "ladder": [[8, 0]]})"), "ladder[0][1]");
  EXPECT_EQ(key_of(R"({"env": "toy", "algos": ["ddpg"], "threshold": {"td3": -5}})"), "threshold.td3");
  EXPECT_EQ(key_of(R"({"env": "toy", "algos": ["ddpg"], "alpha": "sometimes"})"), "alpha");
  EXPECT_EQ(key_of(R"({"env": "toy", "algos": ["ddpg"], "hidden_activation": "gelu"})"), "hidden_activation");
  EXPECT_EQ(key_of(R"({"env": "toy", "algos": ["ddpg"], "tolerance_fraction": 2})"), "tolerance_fraction");
  EXPECT_EQ(key_of(R"({"env": "toy", "algos": ["ddpg"], "batch_size": 2.5})"), "batch_size");
  EXPECT_EQ(key_of(R"({"env": "toy", "algos": ["ddpg", "ddpg"]})"), "algos[1]");
}

TEST(Config, MalformedJson) {
  EXPECT_THROW(parse_config("{\"env\": "), ConfigError);
  EXPECT_THROW(parse_config("[1, 2]"), ConfigError);
}

TEST(Config, OverridesApply) {
  const auto c = parse_config(R"({
    "name": "small", "env": "pendulum", "algos": ["td3", "sac"],
    "ladder": [[1, 1], [4, 4], "16,16"],
    "threshold": {"td3": -150}, "tolerance_fraction": 0.2,
    "n_seeds": 3, "parallelism": 2, "output_dir": "/tmp/x",
    "gamma": 0.98, "batch_size": 64, "alpha": "auto", "total_steps": 1000,
    "run_baseline": false, "baseline_hidden": {"sac": [64, 64]}, "audit": true, "resume": true
  })");
  EXPECT_EQ(c.name, "small");
  EXPECT_EQ(c.ladder.size(), 3u);
  EXPECT_EQ(c.ladder[2], (std::vector<int>{16, 16}));
  EXPECT_EQ(c.threshold_spec(Algo::td3).threshold, -150);
  EXPECT_EQ(c.threshold_spec(Algo::sac).threshold, -160);
  EXPECT_EQ(c.threshold_spec(Algo::td3).tolerance_fraction, 0.2);
  EXPECT_EQ(c.seeds, (std::vector<std::uint64_t>{0, 1, 2}));
  EXPECT_EQ(c.parallelism, 2);
  EXPECT_EQ(c.output_dir, "/tmp/x");
  EXPECT_EQ(c.agent.gamma, 0.98);
  EXPECT_EQ(c.agent.batch_size, 64);
  EXPECT_TRUE(c.agent.auto_alpha);
  EXPECT_EQ(c.agent.total_steps, 1000);
  EXPECT_FALSE(c.run_baseline);
  EXPECT_EQ(c.baseline_hidden.at(Algo::sac), (std::vector<int>{64, 64}));
  EXPECT_EQ(c.baseline_hidden.at(Algo::td3), (std::vector<int>{400, 300}));
  EXPECT_TRUE(c.audit);
  EXPECT_TRUE(c.resume);
}

TEST(Config, ScalarThresholdAppliesToAll) {
  const auto c = parse_config(R"({"env": "toy", "algos": ["ddpg", "td3"], "threshold": -7.5})");
  EXPECT_EQ(c.threshold_spec(Algo::ddpg).threshold, -7.5);
  EXPECT_EQ(c.threshold_spec(Algo::td3).threshold, -7.5);
}

TEST(Config, RoundTrip) {
  for (const char* doc : {R"({"env": "toy", "algos": ["ddpg"]})",
                          R"({"env": "pendulum", "algos": ["sac", "td3"], "alpha": "auto", "seeds": [7, 9],
                              "ladder": [[2], [3, 3]], "threshold": {"sac": -123.25}, "actor_output": "tanh",
                              "hidden_activation": "tanh", "gamma": 0.98, "run_baseline": false})"}) {
    const auto a = parse_config(doc);
    const auto b = parse_config(serialize_config(a));
    EXPECT_EQ(a, b);
    EXPECT_EQ(serialize_config(a), serialize_config(b));
  }
}

TEST(Config, OutputDirFromEnvironment) {
  ::setenv("MINACTOR_OUT", "/tmp/minactor-env-out", 1);
  EXPECT_EQ(parse_config(R"({"env": "toy", "algos": ["ddpg"]})").output_dir, "/tmp/minactor-env-out");
  ::unsetenv("MINACTOR_OUT");
  EXPECT_EQ(parse_config(R"({"env": "toy", "algos": ["ddpg"]})").output_dir, "runs");
}

TEST(Config, LoadFromFile) {
  const auto path = std::filesystem::temp_directory_path() / "minactor_config_test.json";
  {
    std::ofstream out(path);
    out << R"({"env": "toy", "algos": ["td3"], "n_seeds": 2})";
  }
  const auto c = load_config(path.string());
  EXPECT_EQ(c.seeds.size(), 2u);
  std::filesystem::remove(path);
  EXPECT_THROW(load_config("/nonexistent/minactor.json"), ConfigError);
}

TEST(Config, AgentJsonRoundTrip) {
  auto a = default_agent_config(Algo::td3, "pendulum");
  a.arch = {{4, 4}, {16, 16}};
  a.auto_alpha = true;
  a.tau = 0.01;
  EXPECT_EQ(agent_config_from_json(agent_config_to_json(a), AgentConfig{}), a);
  try {
    agent_config_from_json(nlohmann::json{{"bogus", 1}}, AgentConfig{});
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.key_path(), "bogus");
  }
}
