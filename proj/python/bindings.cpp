#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "minactor/errors.hpp"
#include "minactor/experiment.hpp"
#include "minactor/io.hpp"
#include "minactor/train.hpp"

namespace py = pybind11;
using namespace minactor;

namespace {

AgentConfig agent_config(const std::string& env, const std::string& algo, const std::vector<int>& actor,
                         const std::vector<int>& critic, const std::string& overrides_json) {
  auto base = default_agent_config(algo_from_string(algo), env);
  base.arch = {actor, critic};
  auto j = nlohmann::json::parse(overrides_json.empty() ? "{}" : overrides_json);
  return agent_config_from_json(j, base);
}

py::dict run_to_dict(const RunRecord& rec) {
  py::dict d;
  d["env"] = rec.env_name;
  d["seed"] = rec.seed;
  d["config"] = agent_config_to_json(rec.config).dump();
  d["final_mean"] = rec.final_eval.mean;
  d["final_std"] = rec.final_eval.std;
  d["final_returns"] = rec.final_eval.per_episode;
  d["best_seen"] = rec.best_seen;
  d["diverged"] = rec.diverged;
  d["divergence_reason"] = rec.divergence_reason;
  d["gradient_updates"] = rec.gradient_updates;
  py::list episodes;
  for (const auto& e : rec.episodes) episodes.append(py::make_tuple(e.episode, e.step, e.ep_return));
  d["episodes"] = episodes;
  py::list updates;
  for (const auto& u : rec.updates) updates.append(py::make_tuple(u.step, u.q_loss, u.pi_loss, u.alpha));
  d["updates"] = updates;
  return d;
}

py::dict outcome_to_dict(const AlgoOutcome& o, const Ladder& ladder) {
  py::dict d;
  d["algo"] = to_string(o.algo);
  const auto& r = o.result;
  d["symmetric"] = r.symmetric_index ? py::cast(ladder[*r.symmetric_index]) : py::none();
  d["asymmetric_actor"] = r.asymmetric_index ? py::cast(ladder[*r.asymmetric_index]) : py::none();
  d["reduction_percent"] = r.reduction_percent;
  d["evaluations"] = r.ledger.size();
  d["fresh_evaluations"] = o.fresh_evaluations;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Actor/critic size search for small continuous-control tasks";

  py::register_exception<SpecError>(m, "SpecError", PyExc_ValueError);
  py::register_exception<ContractError>(m, "ContractError", PyExc_ValueError);
  py::register_exception<IoError>(m, "IoError", PyExc_OSError);
  PYBIND11_CONSTINIT static py::gil_safe_call_once_and_store<py::object> config_error;
  config_error.call_once_and_store_result([&] { return py::exception<ConfigError>(m, "ConfigError", PyExc_ValueError); });
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const ConfigError& e) {
      const py::object& type = config_error.get_stored();
      py::object err = type(e.what());
      err.attr("key_path") = e.key_path();
      PyErr_SetObject(type.ptr(), err.ptr());
    } catch (const nlohmann::json::exception& e) {
      PyErr_SetString(PyExc_ValueError, e.what());
    }
  });

  m.def(
      "param_count",
      [](int in_dim, const std::vector<int>& hidden, int out_dim) { return nn::param_count(in_dim, hidden, out_dim); },
      py::arg("in_dim"), py::arg("hidden"), py::arg("out_dim"));
  m.def("standard_ladder", [] { return Ladder::standard().rungs; });
  m.def("reduction_percent", &reduction_percent, py::arg("sym_actor_params"), py::arg("asym_actor_params"));
  m.def(
      "binary_search_min",
      [](std::size_t n, const std::function<bool(std::size_t)>& evaluate) { return binary_search_min(n, evaluate); },
      py::arg("n"), py::arg("evaluate"));

  py::class_<envs::EnvStep>(m, "EnvStep")
      .def_readonly("observation", &envs::EnvStep::observation)
      .def_readonly("reward", &envs::EnvStep::reward)
      .def_readonly("done", &envs::EnvStep::done)
      .def_readonly("t", &envs::EnvStep::t);

  py::class_<envs::Environment>(m, "Environment")
      .def_property_readonly("name", &envs::Environment::name)
      .def_property_readonly("obs_dim", &envs::Environment::obs_dim)
      .def_property_readonly("act_dim", &envs::Environment::act_dim)
      .def_property_readonly("action_bound", &envs::Environment::action_bound)
      .def_property_readonly("episode_length", &envs::Environment::episode_length)
      .def("reset", &envs::Environment::reset, py::arg("episode_seed"))
      .def("step", &envs::Environment::step, py::arg("action"));
  m.def("make_env", &envs::make_env, py::arg("name"));

  m.def(
      "pendulum_step",
      [](double theta, double theta_dot, double torque) {
        const auto [next, step] = envs::pendulum_step({theta, theta_dot, 0}, torque, envs::PendulumConfig{});
        return py::make_tuple(next.theta, next.theta_dot, step.reward);
      },
      py::arg("theta"), py::arg("theta_dot"), py::arg("torque"));

  m.def(
      "train",
      [](const std::string& env, const std::string& algo, const std::vector<int>& actor,
         const std::vector<int>& critic, std::uint64_t seed, const std::string& overrides_json) {
        const auto cfg = agent_config(env, algo, actor, critic, overrides_json);
        RunRecord rec;
        {
          py::gil_scoped_release release;
          rec = train_run(env, cfg, seed);
        }
        return run_to_dict(rec);
      },
      py::arg("env"), py::arg("algo"), py::arg("actor"), py::arg("critic"), py::arg("seed") = 0,
      py::arg("overrides_json") = "");

  m.def(
      "search",
      [](const std::string& config_json) {
        const auto cfg = parse_config(config_json);
        std::ostringstream log;
        ExperimentResult res;
        {
          py::gil_scoped_release release;
          RunOptions opts;
          opts.log = &log;
          res = run_experiment(cfg, opts);
        }
        py::list outcomes;
        for (const auto& o : res.outcomes) outcomes.append(outcome_to_dict(o, cfg.ladder));
        py::dict d;
        d["env"] = res.env;
        d["outcomes"] = outcomes;
        d["report"] = emit_report(res, ReportFormat::markdown);
        d["log"] = log.str();
        return d;
      },
      py::arg("config_json"));

  m.def(
      "report",
      [](const std::string& output_dir, const std::string& env, const std::string& format) {
        const auto fmt = format == "csv" ? ReportFormat::csv : ReportFormat::markdown;
        return emit_report(load_results(output_dir, env), fmt);
      },
      py::arg("output_dir"), py::arg("env"), py::arg("format") = "markdown");
}
