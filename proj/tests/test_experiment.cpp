#include <gtest/gtest.h>

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <sstream>

#include "minactor/errors.hpp"
#include "minactor/experiment.hpp"

using namespace minactor;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("minactor_exp_" + std::to_string(::getpid()) + "_" +
                                        ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::remove_all(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

// Pass iff the actor reaches rung `min_actor` and the critic rung
// `min_critic`; counts calls.
TrainerFactory stub_factory(std::size_t min_critic, std::size_t min_actor, std::atomic<int>& calls) {
  return [=, &calls](Algo) -> Trainer {
    return [=, &calls](const ArchPair& arch, std::uint64_t seed) {
      ++calls;
      const auto ladder = Ladder::standard();
      const auto a = *ladder.index_of(arch.actor_hidden);
      const auto c = *ladder.index_of(arch.critic_hidden);
      const bool ok = c >= min_critic && a >= min_actor;
      return SeedResult{seed, ok ? -140.0 - static_cast<double>(seed) : -900.0, 2.0, false};
    };
  };
}

ExperimentConfig pendulum_config(const fs::path& out) {
  auto c = parse_config(R"({"env": "pendulum", "algos": ["ddpg"]})");
  c.output_dir = out.string();
  return c;
}

}  // namespace

TEST(Experiment, StubbedTrainerGivesCompleteResult) {
  TempDir tmp;
  std::atomic<int> calls{0};
  RunOptions opts;
  opts.trainer_factory = stub_factory(3, 1, calls);
  std::ostringstream log;
  opts.log = &log;
  const auto res = run_experiment(pendulum_config(tmp.path), opts);
  ASSERT_EQ(res.outcomes.size(), 1u);
  const auto& r = res.outcomes[0].result;
  ASSERT_TRUE(r.baseline && r.symmetric && r.asymmetric);
  EXPECT_EQ(r.baseline->arch.actor_hidden, (std::vector<int>{400, 300}));
  EXPECT_EQ(r.symmetric->arch.actor_hidden, (std::vector<int>{16, 16}));
  EXPECT_EQ(r.asymmetric->arch.actor_hidden, (std::vector<int>{4, 4}));
  EXPECT_DOUBLE_EQ(r.reduction_percent, reduction_percent(353, 41));
  EXPECT_EQ(calls.load(), static_cast<int>(r.ledger.size()) * 6);
  EXPECT_TRUE(fs::exists(ledger_path(pendulum_config(tmp.path), Algo::ddpg)));
  EXPECT_NE(log.str().find("[ddpg] baseline"), std::string::npos);
}

TEST(Experiment, ResumeSkipsCompletedRungs) {
  TempDir tmp;
  std::atomic<int> calls{0};
  RunOptions opts;
  opts.trainer_factory = stub_factory(3, 1, calls);
  const auto first = run_experiment(pendulum_config(tmp.path), opts);
  const int first_calls = calls.load();

  auto cfg = pendulum_config(tmp.path);
  cfg.resume = true;
  const auto second = run_experiment(cfg, opts);
  EXPECT_EQ(calls.load(), first_calls);
  EXPECT_EQ(second.outcomes[0].fresh_evaluations, 0);
  EXPECT_EQ(second.outcomes[0].result.ledger, first.outcomes[0].result.ledger);
}

TEST(Experiment, ResumeAfterInterruption) {
  TempDir tmp;
  std::atomic<int> calls{0};
  // Interrupt: the trainer throws on the third evaluation.
  RunOptions crash;
  crash.trainer_factory = [&](Algo a) -> Trainer {
    auto inner = stub_factory(3, 1, calls)(a);
    return [inner, n = std::make_shared<int>(0)](const ArchPair& arch, std::uint64_t seed) {
      if (seed == 0 && ++*n == 3) throw std::runtime_error("power cut");
      return inner(arch, seed);
    };
  };
  EXPECT_THROW(run_experiment(pendulum_config(tmp.path), crash), std::runtime_error);
  const auto partial = read_ledger(ledger_path(pendulum_config(tmp.path), Algo::ddpg));
  EXPECT_EQ(partial.entries.size(), 2u);

  std::atomic<int> resumed_calls{0};
  RunOptions opts;
  opts.trainer_factory = stub_factory(3, 1, resumed_calls);
  auto cfg = pendulum_config(tmp.path);
  cfg.resume = true;
  const auto resumed = run_experiment(cfg, opts);

  std::atomic<int> fresh_calls{0};
  TempDir other;
  RunOptions fresh;
  fresh.trainer_factory = stub_factory(3, 1, fresh_calls);
  const auto uninterrupted = run_experiment(pendulum_config(other.path), fresh);
  EXPECT_EQ(resumed.outcomes[0].result.ledger, uninterrupted.outcomes[0].result.ledger);
  EXPECT_EQ(resumed_calls.load(), fresh_calls.load() - 2 * 6);
}

TEST(Experiment, ResumeRejectsDifferentConfig) {
  TempDir tmp;
  std::atomic<int> calls{0};
  RunOptions opts;
  opts.trainer_factory = stub_factory(3, 1, calls);
  run_experiment(pendulum_config(tmp.path), opts);
  auto cfg = pendulum_config(tmp.path);
  cfg.resume = true;
  cfg.agent.gamma = 0.95;
  try {
    run_experiment(cfg, opts);
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.key_path(), "resume");
  }
}

TEST(Experiment, FingerprintIgnoresPlumbing) {
  auto a = pendulum_config("/tmp/a");
  auto b = pendulum_config("/tmp/b");
  b.parallelism = 7;
  b.resume = true;
  EXPECT_EQ(config_fingerprint(a, Algo::ddpg), config_fingerprint(b, Algo::ddpg));
  b.seeds = {0, 1, 2};
  EXPECT_NE(config_fingerprint(a, Algo::ddpg), config_fingerprint(b, Algo::ddpg));
}

TEST(Experiment, NameTyposFailBeforeTraining) {
  std::atomic<int> calls{0};
  RunOptions opts;
  opts.trainer_factory = stub_factory(0, 0, calls);
  auto cfg = pendulum_config("/tmp/minactor-never-written");
  cfg.env = "pendulm";
  EXPECT_THROW(run_experiment(cfg, opts), ConfigError);
  EXPECT_EQ(calls.load(), 0);
  EXPECT_FALSE(fs::exists("/tmp/minactor-never-written"));
}

TEST(Experiment, LoadResultsReplaysLedger) {
  TempDir tmp;
  std::atomic<int> calls{0};
  RunOptions opts;
  opts.trainer_factory = stub_factory(4, 2, calls);
  auto cfg = parse_config(R"({"env": "pendulum", "algos": ["ddpg", "td3"]})");
  cfg.output_dir = tmp.path.string();
  const auto live = run_experiment(cfg, opts);
  const auto loaded = load_results(tmp.path, "pendulum");
  ASSERT_EQ(loaded.outcomes.size(), 2u);
  for (std::size_t i = 0; i < 2; ++i) {
    EXPECT_EQ(loaded.outcomes[i].result.ledger, live.outcomes[i].result.ledger);
  }
  EXPECT_EQ(emit_report(loaded, ReportFormat::markdown), emit_report(live, ReportFormat::markdown));
  EXPECT_THROW(load_results(tmp.path, "toy"), IoError);
}

TEST(Report, PendulumRowFormat) {
  TempDir tmp;
  std::atomic<int> calls{0};
  RunOptions opts;
  opts.trainer_factory = stub_factory(3, 1, calls);
  const auto res = run_experiment(pendulum_config(tmp.path), opts);
  const auto rows = report_rows(res);
  ASSERT_EQ(rows.size(), 1u);
  const auto& r = rows[0];
  EXPECT_EQ(r.algo, "DDPG");
  EXPECT_EQ(r.threshold, "-160");
  EXPECT_EQ(r.baseline_size, "|400,300|");
  EXPECT_EQ(r.symmetric_size, "|16,16|");
  EXPECT_EQ(r.asymmetric_actor_size + " , " + r.reduction + " , " + r.critic_size, "|4,4| , 88.39% , |16,16|");
  // Seeds give -140 .. -145: mean -142.5, population std sqrt(35/12).
  EXPECT_EQ(r.reward, "-142.50 ± 1.71");

  const auto md = emit_report(res, ReportFormat::markdown);
  const auto csv = emit_report(res, ReportFormat::csv);
  EXPECT_NE(md.find("\\|4,4\\|"), std::string::npos);
  EXPECT_NE(csv.find("\"|4,4|\",88.39%,\"|16,16|\""), std::string::npos);
  for (const auto& value : {r.threshold, r.reduction, r.reward, r.baseline_reward, r.symmetric_reward}) {
    EXPECT_NE(md.find(value), std::string::npos) << value;
    EXPECT_NE(csv.find(value), std::string::npos) << value;
  }
  // Header plus one data row.
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 2);
}

TEST(Report, ReductionMatchesParamCounts) {
  ExperimentResult res;
  res.env = "toy";
  AlgoOutcome o;
  o.algo = Algo::td3;
  o.spec = {-10, 0.1, 6};
  ArchEval sym{ArchPair::symmetric({8, 8}), "symmetric", {}, -5, 1, true};
  ArchEval asym{{{1, 1}, {8, 8}}, "asymmetric", {}, -6, 1, true};
  o.result.symmetric = sym;
  o.result.asymmetric = asym;
  o.result.symmetric_index = 2;
  o.result.asymmetric_index = 0;
  res.outcomes.push_back(o);
  const auto rows = report_rows(res);
  const double expected = reduction_percent(nn::param_count(1, std::vector<int>{8, 8}, 1),
                                            nn::param_count(1, std::vector<int>{1, 1}, 1));
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f%%", expected);
  EXPECT_EQ(rows[0].reduction, buf);
  EXPECT_EQ(rows[0].baseline_size, "n/a");
}

TEST(Report, NoSymmetricPassRow) {
  TempDir tmp;
  std::atomic<int> calls{0};
  RunOptions opts;
  opts.trainer_factory = stub_factory(99, 99, calls);
  auto cfg = pendulum_config(tmp.path);
  cfg.run_baseline = false;
  const auto rows = report_rows(run_experiment(cfg, opts));
  EXPECT_EQ(rows[0].symmetric_size, "none passed");
  EXPECT_EQ(rows[0].reduction, "n/a");
}

TEST(Experiment, DefaultTrainerWritesRunFiles) {
  TempDir tmp;
  auto cfg = parse_config(R"({"env": "toy", "algos": ["ddpg"], "n_seeds": 1, "total_steps": 500,
                              "start_steps": 200, "update_after": 200, "batch_size": 32, "eval_episodes": 2})");
  cfg.output_dir = tmp.path.string();
  const auto trainer = make_default_trainer(cfg, Algo::ddpg);
  const auto r = trainer({{}, {16, 16}}, 0);
  const auto dir = run_dir(cfg.output_dir, "toy", Algo::ddpg, {{}, {16, 16}}, 0);
  for (const char* f : {"episodes.csv", "updates.csv", "eval.csv", "snapshot.json"}) {
    EXPECT_TRUE(fs::exists(dir / f)) << f;
  }
  EXPECT_EQ(r.mean, load_snapshot(dir / "snapshot.json").final_eval.mean);

  // With resume, the snapshot is reused instead of retraining.
  cfg.resume = true;
  const auto before = fs::last_write_time(dir / "episodes.csv");
  const auto again = make_default_trainer(cfg, Algo::ddpg)({{}, {16, 16}}, 0);
  EXPECT_EQ(again, r);
  EXPECT_EQ(fs::last_write_time(dir / "episodes.csv"), before);
}
