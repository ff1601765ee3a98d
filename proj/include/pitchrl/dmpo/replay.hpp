#pragma once

#include <deque>
#include <vector>

#include "pitchrl/numcore/matrix.hpp"
#include "pitchrl/numcore/rng.hpp"

namespace pitchrl {

// One contiguous in-episode window of experience. `len` may be shorter than
// the configured segment length for episodes that end early; discount_flag
// is 0 exactly at true terminal transitions (time-limit caps stay 1 and are
// bootstrapped).
struct TrajectorySegment {
  int len = 0;
  int critic_obs_dim = 0;
  int policy_obs_dim = 0;
  int action_dim = 0;
  int opponent_id = 0;
  Vec critic_obs;   // len x critic_obs_dim
  Vec policy_obs;   // len x policy_obs_dim
  Vec action;       // len x action_dim
  Vec reward;       // len
  Vec discount_flag;  // len
  std::vector<unsigned char> upright;  // len; teacher-selection indicator

  const double* critic_obs_at(int t) const { return critic_obs.data() + static_cast<size_t>(t) * critic_obs_dim; }
  const double* policy_obs_at(int t) const { return policy_obs.data() + static_cast<size_t>(t) * policy_obs_dim; }
  const double* action_at(int t) const { return action.data() + static_cast<size_t>(t) * action_dim; }
  bool terminal() const { return len > 0 && discount_flag[len - 1] == 0.0; }
};

// FIFO ring of segments with a transition-count capacity and uniform
// with-replacement sampling over stored segments.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(long long capacity_transitions)
      : capacity_(capacity_transitions) {}

  void append(TrajectorySegment segment) {
    transitions_ += segment.len;
    segments_.push_back(std::move(segment));
    while (transitions_ > capacity_ && segments_.size() > 1) {
      transitions_ -= segments_.front().len;
      segments_.pop_front();
    }
  }

  bool ready(long long min_transitions) const { return transitions_ >= min_transitions; }
  long long transitions() const { return transitions_; }
  size_t size() const { return segments_.size(); }
  long long capacity() const { return capacity_; }

  const TrajectorySegment& sample(Rng& rng) const {
    return segments_[rng.uniform_int(segments_.size())];
  }
  const TrajectorySegment& at(size_t i) const { return segments_[i]; }

  void clear() {
    segments_.clear();
    transitions_ = 0;
  }

 private:
  long long capacity_;
  long long transitions_ = 0;
  std::deque<TrajectorySegment> segments_;
};

}  // namespace pitchrl
