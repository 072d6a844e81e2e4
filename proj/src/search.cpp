#include "minactor/search.hpp"

#include <atomic>
#include <cmath>
#include <limits>
#include <mutex>
#include <thread>

#include "minactor/errors.hpp"

namespace minactor {

Ladder Ladder::standard() {
  return {{{1, 1}, {4, 4}, {8, 8}, {16, 16}, {32, 32}, {64, 64}, {128, 128}, {256, 256}, {400, 300}}};
}

std::optional<std::size_t> Ladder::index_of(const std::vector<int>& hidden) const {
  for (std::size_t i = 0; i < rungs.size(); ++i) {
    if (rungs[i] == hidden) return i;
  }
  return std::nullopt;
}

void Ladder::validate(int in_dim, int out_dim) const {
  if (rungs.empty()) throw ConfigError("ladder", "must contain at least one rung");
  std::int64_t prev = -1;
  for (std::size_t i = 0; i < rungs.size(); ++i) {
    if (rungs[i].size() > 2) throw ConfigError("ladder", "rung " + std::to_string(i) + " has more than two layers");
    for (int h : rungs[i]) {
      if (h < 1) throw ConfigError("ladder", "rung " + std::to_string(i) + " has a width < 1");
    }
    const auto n = nn::param_count(in_dim, rungs[i], out_dim);
    if (n <= prev) {
      throw ConfigError("ladder", "rungs must be strictly increasing in parameter count (rung " +
                                      std::to_string(i) + ")");
    }
    prev = n;
  }
}

bool passes_threshold(double mean_reward, const ThresholdSpec& spec) {
  return mean_reward >= spec.threshold - spec.tolerance_fraction * std::abs(spec.threshold);
}

double reduction_percent(std::int64_t sym_actor_params, std::int64_t asym_actor_params) {
  if (sym_actor_params < 1 || asym_actor_params < 1) {
    throw ContractError("reduction_percent: parameter counts must be positive");
  }
  return (1.0 - static_cast<double>(asym_actor_params) / static_cast<double>(sym_actor_params)) * 100.0;
}

ArchEval run_arch_eval(const Trainer& trainer, const ArchPair& arch, const ThresholdSpec& spec,
                       const std::vector<std::uint64_t>& seeds, int parallelism) {
  if (seeds.empty()) throw ContractError("run_arch_eval: no seeds");
  ArchEval ev;
  ev.arch = arch;
  ev.seeds.resize(seeds.size());

  const auto workers = static_cast<std::size_t>(std::max(1, std::min<int>(parallelism, static_cast<int>(seeds.size()))));
  if (workers == 1) {
    for (std::size_t i = 0; i < seeds.size(); ++i) ev.seeds[i] = trainer(arch, seeds[i]);
  } else {
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mu;
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < seeds.size(); i = next++) {
          try {
            ev.seeds[i] = trainer(arch, seeds[i]);
          } catch (...) {
            std::lock_guard lock(failure_mu);
            if (!failure) failure = std::current_exception();
          }
        }
      });
    }
    pool.clear();
    if (failure) std::rethrow_exception(failure);
  }

  double sum = 0.0;
  int completed = 0;
  bool any_diverged = false;
  for (const auto& s : ev.seeds) {
    if (s.diverged || !std::isfinite(s.mean)) {
      any_diverged = true;
      continue;
    }
    sum += s.mean;
    ++completed;
  }
  if (completed == 0) {
    ev.mean = std::numeric_limits<double>::quiet_NaN();
    ev.std = 0.0;
    ev.pass = false;
    return ev;
  }
  ev.mean = sum / completed;
  double sq = 0.0;
  for (const auto& s : ev.seeds) {
    if (!s.diverged && std::isfinite(s.mean)) sq += (s.mean - ev.mean) * (s.mean - ev.mean);
  }
  ev.std = std::sqrt(sq / completed);
  ev.pass = !any_diverged && passes_threshold(ev.mean, spec);
  return ev;
}

std::optional<std::size_t> binary_search_min(std::size_t n, const std::function<bool(std::size_t)>& evaluate) {
  std::size_t first = 0;
  std::size_t count = n;
  while (count > 0) {
    const std::size_t half = count / 2;
    const std::size_t mid = first + half;
    if (evaluate(mid)) {
      count = half;
    } else {
      first = mid + 1;
      count -= half + 1;
    }
  }
  if (first == n) return std::nullopt;
  return first;
}

std::optional<std::size_t> linear_search_min(std::size_t n, const std::function<bool(std::size_t)>& evaluate) {
  for (std::size_t i = 0; i < n; ++i) {
    if (evaluate(i)) return i;
  }
  return std::nullopt;
}

ArchSearch::ArchSearch(Trainer trainer, Options options) : trainer_(std::move(trainer)), opt_(std::move(options)) {
  if (opt_.seeds.empty()) throw ConfigError("seeds", "at least one seed is required");
  opt_.ladder.validate(opt_.obs_dim, opt_.act_dim);
}

void ArchSearch::preload(const std::vector<ArchEval>& ledger) {
  preloaded_.insert(preloaded_.end(), ledger.begin(), ledger.end());
}

const ArchEval* ArchSearch::find(const ArchPair& arch) const {
  for (const auto& e : ledger_) {
    if (e.arch == arch) return &e;
  }
  return nullptr;
}

ArchEval ArchSearch::evaluate(const ArchPair& arch, const std::string& phase) {
  if (const auto* hit = find(arch)) return *hit;
  for (const auto& e : preloaded_) {
    if (e.arch == arch) {
      ledger_.push_back(e);
      if (callback_) callback_(e);
      return e;
    }
  }
  ArchEval ev = run_arch_eval(trainer_, arch, opt_.spec, opt_.seeds, opt_.parallelism);
  ev.phase = phase;
  ++fresh_;
  ledger_.push_back(ev);
  if (callback_) callback_(ev);
  return ev;
}

std::optional<std::size_t> ArchSearch::search_symmetric() {
  return binary_search_min(opt_.ladder, [this](std::size_t i) {
    return evaluate(ArchPair::symmetric(opt_.ladder[i]), "symmetric").pass;
  });
}

std::size_t ArchSearch::search_asymmetric(std::size_t symmetric_index, const std::vector<int>& locked_critic) {
  const auto found = binary_search_min(symmetric_index, [&](std::size_t i) {
    return evaluate(ArchPair{opt_.ladder[i], locked_critic}, "asymmetric").pass;
  });
  return found.value_or(symmetric_index);
}

SearchResult ArchSearch::run(const std::optional<std::vector<int>>& baseline_hidden, bool audit) {
  SearchResult res;
  if (baseline_hidden) res.baseline = evaluate(ArchPair::symmetric(*baseline_hidden), "baseline");

  res.symmetric_index = search_symmetric();
  if (res.symmetric_index) {
    const auto& sym_hidden = opt_.ladder[*res.symmetric_index];
    res.symmetric = evaluate(ArchPair::symmetric(sym_hidden), "symmetric");
    res.asymmetric_index = search_asymmetric(*res.symmetric_index, sym_hidden);
    res.asymmetric = evaluate(ArchPair{opt_.ladder[*res.asymmetric_index], sym_hidden}, "asymmetric");
    res.reduction_percent =
        reduction_percent(nn::param_count(opt_.obs_dim, sym_hidden, opt_.act_dim),
                          nn::param_count(opt_.obs_dim, opt_.ladder[*res.asymmetric_index], opt_.act_dim));
  }

  if (audit) {
    res.audited = true;
    res.audit_symmetric_index = linear_search_min(opt_.ladder.size(), [this](std::size_t i) {
      return evaluate(ArchPair::symmetric(opt_.ladder[i]), "audit").pass;
    });
    if (res.symmetric_index) {
      const auto& critic = opt_.ladder[*res.symmetric_index];
      res.audit_asymmetric_index =
          linear_search_min(*res.symmetric_index, [&](std::size_t i) {
            return evaluate(ArchPair{opt_.ladder[i], critic}, "audit").pass;
          }).value_or(*res.symmetric_index);
    }
  }

  res.ledger = ledger_;
  return res;
}

}  // namespace minactor
