#include "minactor/replay.hpp"

#include <unordered_set>

#include "minactor/errors.hpp"

namespace minactor {

ReplayBuffer::ReplayBuffer(std::int64_t capacity, int obs_dim, int act_dim)
    : capacity_(capacity), obs_dim_(obs_dim), act_dim_(act_dim) {
  if (capacity < 1) throw SpecError("replay capacity must be >= 1");
  if (obs_dim < 1 || act_dim < 1) throw SpecError("replay dims must be >= 1");
}

void ReplayBuffer::push(const Transition& t) {
  if (t.s.size() != obs_dim_ || t.s2.size() != obs_dim_ || t.a.size() != act_dim_) {
    throw ContractError("replay push: transition dims do not match buffer");
  }
  if (!t.s.allFinite() || !t.s2.allFinite() || !t.a.allFinite() || !std::isfinite(t.r)) {
    throw ContractError("replay push: non-finite transition");
  }
  const bool grow = count_ < capacity_ && next_ == count_;
  if (grow) {
    s_.insert(s_.end(), t.s.data(), t.s.data() + obs_dim_);
    a_.insert(a_.end(), t.a.data(), t.a.data() + act_dim_);
    s2_.insert(s2_.end(), t.s2.data(), t.s2.data() + obs_dim_);
    r_.push_back(t.r);
    done_.push_back(t.done ? 1.0 : 0.0);
  } else {
    const auto slot = static_cast<std::size_t>(next_);
    std::copy(t.s.data(), t.s.data() + obs_dim_, s_.begin() + slot * obs_dim_);
    std::copy(t.a.data(), t.a.data() + act_dim_, a_.begin() + slot * act_dim_);
    std::copy(t.s2.data(), t.s2.data() + obs_dim_, s2_.begin() + slot * obs_dim_);
    r_[slot] = t.r;
    done_[slot] = t.done ? 1.0 : 0.0;
  }
  next_ = (next_ + 1) % capacity_;
  if (count_ < capacity_) ++count_;
}

Transition ReplayBuffer::at(std::int64_t i) const {
  if (i < 0 || i >= count_) throw ContractError("replay index out of range");
  const auto k = static_cast<std::size_t>(i);
  Transition t;
  t.s = Eigen::Map<const Vec>(s_.data() + k * obs_dim_, obs_dim_);
  t.a = Eigen::Map<const Vec>(a_.data() + k * act_dim_, act_dim_);
  t.s2 = Eigen::Map<const Vec>(s2_.data() + k * obs_dim_, obs_dim_);
  t.r = r_[k];
  t.done = done_[k] != 0.0;
  return t;
}

std::vector<std::int64_t> ReplayBuffer::sample_indices(std::int64_t batch_size, Rng& rng) const {
  if (batch_size < 1) throw ContractError("batch size must be >= 1");
  if (count_ < batch_size) {
    throw ContractError("cannot sample " + std::to_string(batch_size) + " transitions from a buffer holding " +
                        std::to_string(count_));
  }
  std::vector<std::int64_t> out;
  out.reserve(static_cast<std::size_t>(batch_size));
  std::unordered_set<std::int64_t> chosen;
  chosen.reserve(static_cast<std::size_t>(batch_size) * 2);
  for (std::int64_t j = count_ - batch_size; j < count_; ++j) {
    auto t = static_cast<std::int64_t>(rng.index(static_cast<std::uint64_t>(j + 1)));
    if (chosen.contains(t)) t = j;
    chosen.insert(t);
    out.push_back(t);
  }
  return out;
}

Batch ReplayBuffer::gather(const std::vector<std::int64_t>& indices) const {
  const auto n = static_cast<Eigen::Index>(indices.size());
  Batch b{Mat(obs_dim_, n), Mat(act_dim_, n), Vec(n), Mat(obs_dim_, n), Vec(n)};
  for (Eigen::Index j = 0; j < n; ++j) {
    const auto k = static_cast<std::size_t>(indices[static_cast<std::size_t>(j)]);
    b.s.col(j) = Eigen::Map<const Vec>(s_.data() + k * obs_dim_, obs_dim_);
    b.a.col(j) = Eigen::Map<const Vec>(a_.data() + k * act_dim_, act_dim_);
    b.s2.col(j) = Eigen::Map<const Vec>(s2_.data() + k * obs_dim_, obs_dim_);
    b.r(j) = r_[k];
    b.done(j) = done_[k];
  }
  return b;
}

Batch ReplayBuffer::sample(std::int64_t batch_size, Rng& rng) const {
  return gather(sample_indices(batch_size, rng));
}

std::vector<Transition> ReplayBuffer::sample_transitions(std::int64_t batch_size, Rng& rng) const {
  std::vector<Transition> out;
  for (auto i : sample_indices(batch_size, rng)) out.push_back(at(i));
  return out;
}

}  // namespace minactor
