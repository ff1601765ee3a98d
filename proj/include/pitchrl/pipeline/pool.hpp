#pragma once

#include <vector>

#include "pitchrl/dmpo/policy.hpp"
#include "pitchrl/numcore/rng.hpp"

namespace pitchrl {

struct Snapshot {
  MlpParams params;
  long long learner_step = 0;
  int id = 0;  // 1-based; pool id 0 is the untrained opponent
};

// Self-play opponent pool: the untrained agent plus the first quarter of all
// saved snapshots. Ids are stable (entries are only ever appended) and bounded
// by the critic's one-hot width.
class OpponentPool {
 public:
  explicit OpponentPool(int max_entries = 64) : max_entries_(max_entries) {}

  void add_snapshot(MlpParams params, long long learner_step) {
    Snapshot s;
    s.params = std::move(params);
    s.learner_step = learner_step;
    s.id = static_cast<int>(snapshots_.size()) + 1;
    snapshots_.push_back(std::move(s));
    rebuild();
  }

  // pool = {untrained} + earliest floor(n/4) snapshots, capped by the
  // one-hot width
  void rebuild() {
    const int quarter = static_cast<int>(snapshots_.size()) / 4;
    active_ = std::min(quarter, max_entries_ - 1);
  }

  int size() const { return 1 + active_; }
  int snapshot_count() const { return static_cast<int>(snapshots_.size()); }
  const std::vector<Snapshot>& snapshots() const { return snapshots_; }

  // Uniform over pool entries; id 0 is the untrained opponent.
  int sample(Rng& rng) const { return static_cast<int>(rng.uniform_int(size())); }

  const MlpParams* params_for(int pool_id) const {
    if (pool_id <= 0 || pool_id > active_) return nullptr;  // untrained
    return &snapshots_[pool_id - 1].params;
  }

  // For fixed opponent sets (the no-self-play ablations).
  void set_fixed_active(int n) { active_ = n; }

 private:
  int max_entries_;
  int active_ = 0;
  std::vector<Snapshot> snapshots_;
};

}  // namespace pitchrl
