#include "minactor/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "minactor/config.hpp"
#include "minactor/errors.hpp"

namespace minactor {
namespace {

using nlohmann::json;

// JSON has no NaN or infinity; they travel as strings.
json number_to_json(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

double number_from_json(const json& j) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
  }
  throw IoError("expected a number, got " + j.dump());
}

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  return out;
}

void finish(std::ofstream& out, const fs::path& path) {
  out.flush();
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

std::string hidden_token(const std::vector<int>& hidden) {
  if (hidden.empty()) return "none";
  std::string s;
  for (std::size_t i = 0; i < hidden.size(); ++i) {
    if (i) s += '-';
    s += std::to_string(hidden[i]);
  }
  return s;
}

std::string output_kind_name(nn::OutputActivation::Kind k) {
  switch (k) {
    case nn::OutputActivation::Kind::linear:
      return "linear";
    case nn::OutputActivation::Kind::tanh:
      return "tanh";
    case nn::OutputActivation::Kind::tanh_scaled:
      return "tanh_scaled";
  }
  return "linear";
}

nn::OutputActivation::Kind output_kind_from(const std::string& s) {
  if (s == "linear") return nn::OutputActivation::Kind::linear;
  if (s == "tanh") return nn::OutputActivation::Kind::tanh;
  if (s == "tanh_scaled") return nn::OutputActivation::Kind::tanh_scaled;
  throw IoError("unknown output activation '" + s + "'");
}

}  // namespace

std::string format_number(double v) {
  if (std::isnan(v)) return "";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

void write_episodes_csv(const RunRecord& record, const fs::path& path) {
  auto out = open_out(path);
  out << "seed,episode,step,ep_return\n";
  for (const auto& e : record.episodes) {
    out << record.seed << ',' << e.episode << ',' << e.step << ',' << format_number(e.ep_return) << '\n';
  }
  finish(out, path);
}

void write_updates_csv(const RunRecord& record, const fs::path& path) {
  const bool sac = record.config.algo == Algo::sac;
  auto out = open_out(path);
  out << "seed,step,q_loss,pi_loss,alpha\n";
  for (const auto& u : record.updates) {
    out << record.seed << ',' << u.step << ',' << format_number(u.q_loss) << ',' << format_number(u.pi_loss)
        << ',' << (sac ? format_number(u.alpha) : "") << '\n';
  }
  finish(out, path);
}

void write_eval_csv(const RunRecord& record, const fs::path& path) {
  auto out = open_out(path);
  out << "seed,episode,return\n";
  for (std::size_t i = 0; i < record.final_eval.per_episode.size(); ++i) {
    out << record.seed << ',' << i << ',' << format_number(record.final_eval.per_episode[i]) << '\n';
  }
  finish(out, path);
}

std::string arch_dir_name(const ArchPair& arch) {
  return "a" + hidden_token(arch.actor_hidden) + "_c" + hidden_token(arch.critic_hidden);
}

fs::path run_dir(const fs::path& out, const std::string& env, Algo algo, const ArchPair& arch,
                 std::uint64_t seed) {
  return out / env / to_string(algo) / arch_dir_name(arch) / ("seed" + std::to_string(seed));
}

json snapshot_to_json(const RunRecord& r) {
  const auto& spec = r.actor.spec;
  json actor;
  actor["in_dim"] = spec.in_dim;
  actor["hidden"] = spec.hidden;
  actor["out_dim"] = spec.out_dim;
  actor["hidden_activation"] = nn::to_string(spec.hidden_activation);
  actor["output"] = output_kind_name(spec.output.kind);
  actor["output_bound"] = spec.output.bound;
  actor["weights"] = r.actor.flatten();

  json j;
  j["env"] = r.env_name;
  j["seed"] = r.seed;
  j["config"] = agent_config_to_json(r.config);
  j["actor"] = std::move(actor);
  j["final_eval"] = {{"mean", number_to_json(r.final_eval.mean)},
                     {"std", number_to_json(r.final_eval.std)},
                     {"per_episode", r.final_eval.per_episode}};
  j["best_seen"] = number_to_json(r.best_seen);
  j["best_seen_step"] = r.best_seen_step;
  j["gradient_updates"] = r.gradient_updates;
  j["episodes"] = r.episodes.size();
  j["diverged"] = r.diverged;
  j["divergence_reason"] = r.divergence_reason;
  j["wall_clock_seconds"] = r.wall_clock_seconds;
  return j;
}

Snapshot snapshot_from_json(const json& j) {
  try {
    Snapshot s;
    s.env = j.at("env").get<std::string>();
    s.seed = j.at("seed").get<std::uint64_t>();
    s.config = agent_config_from_json(j.at("config"), AgentConfig{});

    const auto& a = j.at("actor");
    nn::MlpSpec spec;
    spec.in_dim = a.at("in_dim").get<int>();
    spec.hidden = a.at("hidden").get<std::vector<int>>();
    spec.out_dim = a.at("out_dim").get<int>();
    spec.hidden_activation = nn::activation_from_string(a.at("hidden_activation").get<std::string>());
    spec.output = {output_kind_from(a.at("output").get<std::string>()), a.at("output_bound").get<double>()};
    spec.validate();
    s.actor = nn::MlpParams::zeros(spec);
    const auto weights = a.at("weights").get<std::vector<double>>();
    if (static_cast<std::int64_t>(weights.size()) != s.actor.size()) {
      throw IoError("snapshot weight count " + std::to_string(weights.size()) + " does not match the actor spec (" +
                    std::to_string(s.actor.size()) + ")");
    }
    s.actor.unflatten(weights);

    const auto& fe = j.at("final_eval");
    s.final_eval.mean = number_from_json(fe.at("mean"));
    s.final_eval.std = number_from_json(fe.at("std"));
    s.final_eval.per_episode = fe.at("per_episode").get<std::vector<double>>();
    s.best_seen = number_from_json(j.at("best_seen"));
    s.diverged = j.at("diverged").get<bool>();
    return s;
  } catch (const json::exception& e) {
    throw IoError(std::string("malformed snapshot: ") + e.what());
  } catch (const ConfigError& e) {
    throw IoError(std::string("malformed snapshot config: ") + e.what());
  }
}

Snapshot load_snapshot(const fs::path& path) {
  const auto text = read_text(path);
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw IoError("'" + path.string() + "' is not valid JSON: " + e.what());
  }
  return snapshot_from_json(j);
}

Policy snapshot_policy(const Snapshot& snap) {
  auto actor = std::make_shared<const nn::MlpParams>(snap.actor);
  if (snap.config.algo == Algo::sac) {
    const int act = actor->spec.out_dim / 2;
    const double bound = envs::make_env(snap.env)->action_bound();
    return [actor, act, bound](const Vec& o) -> Vec {
      const Vec out = nn::forward(*actor, o);
      return (out.head(act).array().tanh() * bound).matrix();
    };
  }
  return [actor](const Vec& o) -> Vec { return nn::forward(*actor, o); };
}

void write_run(const RunRecord& record, const fs::path& dir) {
  write_episodes_csv(record, dir / "episodes.csv");
  write_updates_csv(record, dir / "updates.csv");
  write_eval_csv(record, dir / "eval.csv");
  write_text_atomic(dir / "snapshot.json", snapshot_to_json(record).dump(1));
}

json arch_eval_to_json(const ArchEval& ev) {
  json seeds = json::array();
  for (const auto& s : ev.seeds) {
    seeds.push_back({{"seed", s.seed},
                     {"mean", number_to_json(s.mean)},
                     {"std", number_to_json(s.std)},
                     {"diverged", s.diverged}});
  }
  return {{"actor_hidden", ev.arch.actor_hidden},
          {"critic_hidden", ev.arch.critic_hidden},
          {"phase", ev.phase},
          {"seeds", std::move(seeds)},
          {"mean", number_to_json(ev.mean)},
          {"std", number_to_json(ev.std)},
          {"pass", ev.pass}};
}

ArchEval arch_eval_from_json(const json& j) {
  try {
    ArchEval ev;
    ev.arch.actor_hidden = j.at("actor_hidden").get<std::vector<int>>();
    ev.arch.critic_hidden = j.at("critic_hidden").get<std::vector<int>>();
    ev.phase = j.at("phase").get<std::string>();
    for (const auto& s : j.at("seeds")) {
      ev.seeds.push_back({s.at("seed").get<std::uint64_t>(), number_from_json(s.at("mean")),
                          number_from_json(s.at("std")), s.at("diverged").get<bool>()});
    }
    ev.mean = number_from_json(j.at("mean"));
    ev.std = number_from_json(j.at("std"));
    ev.pass = j.at("pass").get<bool>();
    return ev;
  } catch (const json::exception& e) {
    throw IoError(std::string("malformed ledger entry: ") + e.what());
  }
}

void write_ledger(const LedgerFile& ledger, const fs::path& path) {
  json entries = json::array();
  for (const auto& e : ledger.entries) entries.push_back(arch_eval_to_json(e));
  const json j = {{"fingerprint", ledger.fingerprint}, {"config", ledger.config}, {"entries", std::move(entries)}};
  write_text_atomic(path, j.dump(2) + "\n");
}

LedgerFile read_ledger(const fs::path& path) {
  const auto text = read_text(path);
  try {
    const auto j = json::parse(text);
    LedgerFile l;
    l.fingerprint = j.at("fingerprint").get<std::string>();
    l.config = j.at("config");
    for (const auto& e : j.at("entries")) l.entries.push_back(arch_eval_from_json(e));
    return l;
  } catch (const json::exception& e) {
    throw IoError("malformed ledger '" + path.string() + "': " + e.what());
  }
}

void write_text_atomic(const fs::path& path, const std::string& text) {
  auto tmp = path;
  tmp += ".tmp";
  {
    auto out = open_out(tmp);
    out << text;
    finish(out, tmp);
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw IoError("cannot replace '" + path.string() + "': " + ec.message());
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace minactor
