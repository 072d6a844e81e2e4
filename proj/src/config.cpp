#include "minactor/config.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>
#include <thread>

#include "minactor/envs.hpp"
#include "minactor/errors.hpp"

namespace minactor {
namespace {

using nlohmann::json;

const std::set<std::string>& agent_keys() {
  static const std::set<std::string> keys = {
      "gamma",          "tau",           "actor_lr",          "critic_lr",
      "batch_size",     "replay_capacity", "start_steps",     "update_after",
      "update_every",   "exploration_sigma", "target_noise_sigma", "target_noise_clip",
      "policy_delay",   "alpha",         "total_steps",       "eval_episodes",
      "eval_every",     "hidden_activation", "actor_output"};
  return keys;
}

const std::set<std::string>& experiment_keys() {
  static const std::set<std::string> keys = {
      "name",     "env",         "algos",       "ladder",       "threshold", "tolerance_fraction",
      "n_seeds",  "seeds",       "parallelism", "output_dir",   "run_baseline", "baseline_hidden",
      "audit",    "resume"};
  return keys;
}

double get_number(const json& j, const std::string& key) {
  if (!j.is_number()) throw ConfigError(key, "expected a number");
  return j.get<double>();
}

std::int64_t get_integer(const json& j, const std::string& key) {
  if (!j.is_number_integer()) throw ConfigError(key, "expected an integer");
  return j.get<std::int64_t>();
}

bool get_bool(const json& j, const std::string& key) {
  if (!j.is_boolean()) throw ConfigError(key, "expected true or false");
  return j.get<bool>();
}

std::string get_string(const json& j, const std::string& key) {
  if (!j.is_string()) throw ConfigError(key, "expected a string");
  return j.get<std::string>();
}

std::vector<int> get_hidden(const json& j, const std::string& key) {
  if (j.is_string()) {
    try {
      return parse_hidden(j.get<std::string>());
    } catch (const ConfigError& e) {
      throw ConfigError(key, e.what());
    }
  }
  if (!j.is_array()) throw ConfigError(key, "expected a list of layer widths");
  std::vector<int> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const auto path = key + "[" + std::to_string(i) + "]";
    const auto v = get_integer(j[i], path);
    if (v < 1) throw ConfigError(path, "layer widths must be >= 1");
    out.push_back(static_cast<int>(v));
  }
  if (out.size() > 2) throw ConfigError(key, "at most two hidden layers");
  return out;
}

template <typename Fn>
auto with_key(const std::string& key, Fn&& fn) {
  try {
    return fn();
  } catch (const ConfigError& e) {
    if (e.key_path().rfind(key, 0) == 0) throw;
    throw ConfigError(key, e.what());
  }
}

}  // namespace

ThresholdSpec ExperimentConfig::threshold_spec(Algo algo) const {
  const auto it = thresholds.find(algo);
  const double t = it != thresholds.end() ? it->second : default_threshold(env, algo);
  return {t, tolerance_fraction, static_cast<int>(seeds.size())};
}

AgentConfig ExperimentConfig::agent_config(Algo algo, const ArchPair& arch) const {
  AgentConfig c = agent;
  c.algo = algo;
  c.arch = arch;
  return c;
}

double default_threshold(const std::string& env, Algo algo) {
  (void)algo;
  return env == "pendulum" ? -160.0 : -10.0;
}

std::vector<int> default_baseline_hidden(Algo algo) {
  return algo == Algo::sac ? std::vector<int>{256, 256} : std::vector<int>{400, 300};
}

std::string default_output_dir() {
  if (const char* env = std::getenv("MINACTOR_OUT"); env && *env) return env;
  return "runs";
}

json agent_config_to_json(const AgentConfig& c) {
  json j;
  j["algo"] = to_string(c.algo);
  j["actor_hidden"] = c.arch.actor_hidden;
  j["critic_hidden"] = c.arch.critic_hidden;
  j["gamma"] = c.gamma;
  j["tau"] = c.tau;
  j["actor_lr"] = c.actor_lr;
  j["critic_lr"] = c.critic_lr;
  j["batch_size"] = c.batch_size;
  j["replay_capacity"] = c.replay_capacity;
  j["start_steps"] = c.start_steps;
  j["update_after"] = c.update_after;
  j["update_every"] = c.update_every;
  j["exploration_sigma"] = c.exploration_sigma;
  j["target_noise_sigma"] = c.target_noise_sigma;
  j["target_noise_clip"] = c.target_noise_clip;
  j["policy_delay"] = c.policy_delay;
  if (c.auto_alpha) {
    j["alpha"] = "auto";
  } else {
    j["alpha"] = c.alpha;
  }
  j["total_steps"] = c.total_steps;
  j["eval_episodes"] = c.eval_episodes;
  j["eval_every"] = c.eval_every;
  j["hidden_activation"] = nn::to_string(c.hidden_activation);
  j["actor_output"] = to_string(c.actor_output);
  return j;
}

AgentConfig agent_config_from_json(const json& j, AgentConfig c) {
  if (!j.is_object()) throw ConfigError("", "agent config must be a JSON object");
  for (const auto& [key, v] : j.items()) {
    if (key == "algo") {
      c.algo = with_key(key, [&] { return algo_from_string(get_string(v, key)); });
    } else if (key == "actor_hidden") {
      c.arch.actor_hidden = get_hidden(v, key);
    } else if (key == "critic_hidden") {
      c.arch.critic_hidden = get_hidden(v, key);
    } else if (key == "gamma") {
      c.gamma = get_number(v, key);
    } else if (key == "tau") {
      c.tau = get_number(v, key);
    } else if (key == "actor_lr") {
      c.actor_lr = get_number(v, key);
    } else if (key == "critic_lr") {
      c.critic_lr = get_number(v, key);
    } else if (key == "batch_size") {
      c.batch_size = static_cast<int>(get_integer(v, key));
    } else if (key == "replay_capacity") {
      c.replay_capacity = get_integer(v, key);
    } else if (key == "start_steps") {
      c.start_steps = get_integer(v, key);
    } else if (key == "update_after") {
      c.update_after = get_integer(v, key);
    } else if (key == "update_every") {
      c.update_every = get_integer(v, key);
    } else if (key == "exploration_sigma") {
      c.exploration_sigma = get_number(v, key);
    } else if (key == "target_noise_sigma") {
      c.target_noise_sigma = get_number(v, key);
    } else if (key == "target_noise_clip") {
      c.target_noise_clip = get_number(v, key);
    } else if (key == "policy_delay") {
      c.policy_delay = static_cast<int>(get_integer(v, key));
    } else if (key == "alpha") {
      if (v.is_string()) {
        if (v.get<std::string>() != "auto") throw ConfigError(key, "expected a number or \"auto\"");
        c.auto_alpha = true;
      } else {
        c.alpha = get_number(v, key);
        c.auto_alpha = false;
      }
    } else if (key == "total_steps") {
      c.total_steps = get_integer(v, key);
    } else if (key == "eval_episodes") {
      c.eval_episodes = static_cast<int>(get_integer(v, key));
    } else if (key == "eval_every") {
      c.eval_every = get_integer(v, key);
    } else if (key == "hidden_activation") {
      c.hidden_activation = with_key(key, [&] {
        try {
          return nn::activation_from_string(get_string(v, key));
        } catch (const SpecError& e) {
          throw ConfigError(key, e.what());
        }
      });
    } else if (key == "actor_output") {
      c.actor_output = with_key(key, [&] { return actor_output_from_string(get_string(v, key)); });
    } else {
      throw ConfigError(key, "unknown key");
    }
  }
  c.validate();
  return c;
}

ExperimentConfig parse_config(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("", std::string("malformed JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ConfigError("", "config must be a JSON object");

  json agent_part = json::object();
  for (const auto& [key, v] : doc.items()) {
    if (agent_keys().contains(key)) {
      agent_part[key] = v;
    } else if (!experiment_keys().contains(key)) {
      throw ConfigError(key, "unknown key");
    }
  }

  ExperimentConfig cfg;
  if (!doc.contains("env")) throw ConfigError("env", "required key missing");
  cfg.env = get_string(doc["env"], "env");
  if (!envs::is_known_env(cfg.env)) {
    throw ConfigError("env", "unknown environment '" + cfg.env + "' (expected toy or pendulum)");
  }
  if (doc.contains("name")) cfg.name = get_string(doc["name"], "name");

  if (!doc.contains("algos")) throw ConfigError("algos", "required key missing");
  const auto& algos = doc["algos"];
  if (!algos.is_array() || algos.empty()) throw ConfigError("algos", "expected a non-empty list");
  for (std::size_t i = 0; i < algos.size(); ++i) {
    const auto path = "algos[" + std::to_string(i) + "]";
    const Algo a = with_key(path, [&] { return algo_from_string(get_string(algos[i], path)); });
    if (std::find(cfg.algos.begin(), cfg.algos.end(), a) != cfg.algos.end()) {
      throw ConfigError(path, "duplicate algorithm");
    }
    cfg.algos.push_back(a);
  }

  if (doc.contains("ladder")) {
    const auto& l = doc["ladder"];
    if (!l.is_array()) throw ConfigError("ladder", "expected a list of hidden-size lists");
    cfg.ladder.rungs.clear();
    for (std::size_t i = 0; i < l.size(); ++i) {
      cfg.ladder.rungs.push_back(get_hidden(l[i], "ladder[" + std::to_string(i) + "]"));
    }
  }
  const int obs_dim = envs::make_env(cfg.env)->obs_dim();
  cfg.ladder.validate(obs_dim, 1);

  if (doc.contains("tolerance_fraction")) {
    cfg.tolerance_fraction = get_number(doc["tolerance_fraction"], "tolerance_fraction");
    if (!(cfg.tolerance_fraction >= 0.0 && cfg.tolerance_fraction < 1.0)) {
      throw ConfigError("tolerance_fraction", "must lie in [0, 1)");
    }
  }

  for (Algo a : cfg.algos) cfg.thresholds[a] = default_threshold(cfg.env, a);
  if (doc.contains("threshold")) {
    const auto& t = doc["threshold"];
    if (t.is_number()) {
      for (Algo a : cfg.algos) cfg.thresholds[a] = t.get<double>();
    } else if (t.is_object()) {
      for (const auto& [name, v] : t.items()) {
        const auto path = "threshold." + name;
        const Algo a = with_key(path, [&] { return algo_from_string(name); });
        if (std::find(cfg.algos.begin(), cfg.algos.end(), a) == cfg.algos.end()) {
          throw ConfigError(path, "algorithm not listed in algos");
        }
        cfg.thresholds[a] = get_number(v, path);
      }
    } else {
      throw ConfigError("threshold", "expected a number or an object keyed by algorithm");
    }
  }

  std::optional<std::int64_t> n_seeds;
  if (doc.contains("n_seeds")) {
    n_seeds = get_integer(doc["n_seeds"], "n_seeds");
    if (*n_seeds < 1) throw ConfigError("n_seeds", "must be >= 1");
  }
  if (doc.contains("seeds")) {
    const auto& s = doc["seeds"];
    if (!s.is_array() || s.empty()) throw ConfigError("seeds", "expected a non-empty list");
    for (std::size_t i = 0; i < s.size(); ++i) {
      const auto path = "seeds[" + std::to_string(i) + "]";
      const auto v = get_integer(s[i], path);
      if (v < 0) throw ConfigError(path, "seeds must be >= 0");
      cfg.seeds.push_back(static_cast<std::uint64_t>(v));
    }
    if (n_seeds && *n_seeds != static_cast<std::int64_t>(cfg.seeds.size())) {
      throw ConfigError("n_seeds", "does not match the length of seeds");
    }
  } else {
    for (std::int64_t i = 0; i < n_seeds.value_or(6); ++i) cfg.seeds.push_back(static_cast<std::uint64_t>(i));
  }

  if (doc.contains("parallelism")) {
    cfg.parallelism = static_cast<int>(get_integer(doc["parallelism"], "parallelism"));
    if (cfg.parallelism < 1) throw ConfigError("parallelism", "must be >= 1");
  } else {
    const int cores = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    cfg.parallelism = std::min(static_cast<int>(cfg.seeds.size()), cores);
  }

  cfg.output_dir = doc.contains("output_dir") ? get_string(doc["output_dir"], "output_dir") : default_output_dir();
  if (doc.contains("run_baseline")) cfg.run_baseline = get_bool(doc["run_baseline"], "run_baseline");
  if (doc.contains("audit")) cfg.audit = get_bool(doc["audit"], "audit");
  if (doc.contains("resume")) cfg.resume = get_bool(doc["resume"], "resume");

  for (Algo a : cfg.algos) cfg.baseline_hidden[a] = default_baseline_hidden(a);
  if (doc.contains("baseline_hidden")) {
    const auto& b = doc["baseline_hidden"];
    if (!b.is_object()) throw ConfigError("baseline_hidden", "expected an object keyed by algorithm");
    for (const auto& [name, v] : b.items()) {
      const auto path = "baseline_hidden." + name;
      const Algo a = with_key(path, [&] { return algo_from_string(name); });
      if (std::find(cfg.algos.begin(), cfg.algos.end(), a) == cfg.algos.end()) {
        throw ConfigError(path, "algorithm not listed in algos");
      }
      cfg.baseline_hidden[a] = get_hidden(v, path);
    }
  }

  AgentConfig base = default_agent_config(cfg.algos.front(), cfg.env);
  base.algo = Algo::ddpg;
  base.arch = {};
  cfg.agent = agent_config_from_json(agent_part, base);
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("", "cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string serialize_config(const ExperimentConfig& cfg) {
  json j = agent_config_to_json(cfg.agent);
  j.erase("algo");
  j.erase("actor_hidden");
  j.erase("critic_hidden");
  j["name"] = cfg.name;
  j["env"] = cfg.env;
  j["algos"] = json::array();
  for (Algo a : cfg.algos) j["algos"].push_back(to_string(a));
  j["ladder"] = cfg.ladder.rungs;
  j["threshold"] = json::object();
  for (const auto& [a, t] : cfg.thresholds) j["threshold"][to_string(a)] = t;
  j["tolerance_fraction"] = cfg.tolerance_fraction;
  j["seeds"] = cfg.seeds;
  j["parallelism"] = cfg.parallelism;
  j["output_dir"] = cfg.output_dir;
  j["run_baseline"] = cfg.run_baseline;
  j["baseline_hidden"] = json::object();
  for (const auto& [a, h] : cfg.baseline_hidden) j["baseline_hidden"][to_string(a)] = h;
  j["audit"] = cfg.audit;
  j["resume"] = cfg.resume;
  return j.dump(2);
}

}  // namespace minactor
