#pragma once

#include <cstdint>
#include <vector>

#include "minactor/nn.hpp"
#include "minactor/rng.hpp"

namespace minactor {

using nn::Mat;
using nn::Vec;

struct Transition {
  Vec s;
  Vec a;
  double r = 0.0;
  Vec s2;
  bool done = false;
};

/// Column-major minibatch: column j of every matrix is transition j.
struct Batch {
  Mat s;
  Mat a;
  Vec r;
  Mat s2;
  Vec done;  // 1.0 for terminal transitions

  Eigen::Index size() const { return r.size(); }
};

/// Fixed-capacity ring of transitions; the oldest entry is overwritten once
/// full. Storage grows lazily, so a large capacity costs nothing up front.
class ReplayBuffer {
 public:
  ReplayBuffer(std::int64_t capacity, int obs_dim, int act_dim);

  void push(const Transition& t);

  std::int64_t count() const { return count_; }
  std::int64_t capacity() const { return capacity_; }

  /// Transition stored in slot i (0 <= i < count()).
  Transition at(std::int64_t i) const;

  /// `batch_size` distinct slots drawn uniformly (Floyd's algorithm).
  /// Throws ContractError when count() < batch_size.
  std::vector<std::int64_t> sample_indices(std::int64_t batch_size, Rng& rng) const;

  Batch sample(std::int64_t batch_size, Rng& rng) const;
  std::vector<Transition> sample_transitions(std::int64_t batch_size, Rng& rng) const;

  Batch gather(const std::vector<std::int64_t>& indices) const;

 private:
  std::int64_t capacity_;
  int obs_dim_;
  int act_dim_;
  std::int64_t count_ = 0;
  std::int64_t next_ = 0;
  std::vector<double> s_, a_, r_, s2_, done_;
};

}  // namespace minactor
