#pragma once

#include <deque>
#include <vector>

#include "pitchrl/domainrand/randomization.hpp"
#include "pitchrl/env/types.hpp"
#include "pitchrl/numcore/rng.hpp"

namespace pitchrl {

// Per-frame feature layout (egocentric where applicable).
namespace obs_layout {
constexpr int kJoints = 0;       // 4
constexpr int kTiltVel = 4;      // 1
constexpr int kGravity = 5;      // 2
constexpr int kLinAcc = 7;       // 2
constexpr int kFilter = 9;       // 4
constexpr int kBallPos = 13;     // 2
constexpr int kOppPos = 15;      // 2
constexpr int kOwnGoal = 17;     // 2
constexpr int kOppGoal = 19;     // 2
constexpr int kAgentVel = 21;    // 2
constexpr int kBallVel = 23;     // 2
constexpr int kOppVel = 25;      // 2
constexpr int kPose = 27;        // 6 (get-up stage only)
constexpr int kBaseFrame = 27;
constexpr int kPoseFrame = 33;
}  // namespace obs_layout

inline int policy_obs_dim(bool with_pose, int stack = 5) {
  // stacked: joints 4, tilt_vel 1, gravity 2, lin_acc 2, filter 4, agent_vel 2
  // (+ pose 6); unstacked: ball/opp/goals/ball_vel/opp_vel = 12
  const int stacked = 15 + (with_pose ? 6 : 0);
  return stacked * stack + 12;
}

inline int critic_obs_dim(bool with_pose, int onehot_slots, int stack = 5) {
  return policy_obs_dim(with_pose, stack) + onehot_slots;
}

// Sensor corruption for one delivered frame: joint offsets + noise, angular
// velocity noise, gravity-vector rotation. Game-state channels (the mocap
// analog) are delayed with the frame but never offset or noised.
inline void corrupt_frame(Vec& frame, const EpisodeRandomization& rand, Rng& rng) {
  namespace L = obs_layout;
  for (int i = 0; i < 4; ++i) {
    frame[L::kJoints + i] += rand.joint_offsets[i];
    if (rand.noise_sigma > 0.0)
      frame[L::kJoints + i] += rng.normal(0.0, rand.noise_sigma);
  }
  if (rand.noise_sigma > 0.0)
    frame[L::kTiltVel] += rng.normal(0.0, rand.noise_sigma);
  if (rand.gravity_rotation != 0.0) {
    const double c = std::cos(rand.gravity_rotation);
    const double s = std::sin(rand.gravity_rotation);
    const double gx = frame[L::kGravity], gy = frame[L::kGravity + 1];
    frame[L::kGravity] = c * gx - s * gy;
    frame[L::kGravity + 1] = s * gx + c * gy;
  }
}

// Maintains the frame history for one player: true frames (for the delay
// line), delivered frames (for the 5-deep stack), and the previous positions
// used for finite-difference velocities. Frames are zero-padded at episode
// start; stack slot k holds the frame delivered k steps earlier.
class ObservationBuilder {
 public:
  void reset(const EnvParams& cfg, bool with_pose) {
    stack_ = cfg.stack_frames;
    with_pose_ = with_pose;
    frame_dim_ = with_pose ? obs_layout::kPoseFrame : obs_layout::kBaseFrame;
    true_frames_.clear();
    delivered_.assign(stack_, Vec(frame_dim_, 0.0));
    first_ = true;
    prev_agent_pos_ = prev_ball_pos_ = prev_opp_pos_ = Vec2{};
    prev_agent_vel_ = Vec2{};
  }

  template <class World>
  void push(const World& w, int player_id, const EpisodeRandomization& rand,
            Rng& noise_rng, const EnvParams& cfg) {
    const PlayerState& me = w.players[player_id];
    const PlayerState& opp = w.players[1 - player_id];
    if (first_) {
      prev_agent_pos_ = me.pos;
      prev_ball_pos_ = w.ball.pos;
      prev_opp_pos_ = opp.pos;
      prev_agent_vel_ = Vec2{};
      first_ = false;
    }
    const double inv_dt = 1.0 / cfg.control_dt;
    const Vec2 agent_vel_w = (me.pos - prev_agent_pos_) * inv_dt;
    const Vec2 ball_vel_w = (w.ball.pos - prev_ball_pos_) * inv_dt;
    const Vec2 opp_vel_w = (opp.pos - prev_opp_pos_) * inv_dt;
    const Vec2 accel_w = (agent_vel_w - prev_agent_vel_) * inv_dt;
    prev_agent_pos_ = me.pos;
    prev_ball_pos_ = w.ball.pos;
    prev_opp_pos_ = opp.pos;
    prev_agent_vel_ = agent_vel_w;

    namespace L = obs_layout;
    Vec f(frame_dim_, 0.0);
    for (int i = 0; i < kActionDim; ++i) f[L::kJoints + i] = me.joints[i];
    f[L::kTiltVel] = me.tilt_vel;
    const Vec2 g = gravity_dir(me.tilt);
    f[L::kGravity] = g.x;
    f[L::kGravity + 1] = g.y;
    const Vec2 acc_e = to_ego(accel_w, me.heading);
    f[L::kLinAcc] = acc_e.x;
    f[L::kLinAcc + 1] = acc_e.y;
    for (int i = 0; i < kActionDim; ++i) f[L::kFilter + i] = me.filter[i];
    auto put2 = [&f](int at, const Vec2& v) {
      f[at] = v.x;
      f[at + 1] = v.y;
    };
    put2(L::kBallPos, to_ego(w.ball.pos - me.pos, me.heading));
    put2(L::kOppPos, to_ego(opp.pos - me.pos, me.heading));
    put2(L::kOwnGoal, to_ego(me.own_goal(cfg.pitch) - me.pos, me.heading));
    put2(L::kOppGoal, to_ego(me.opponent_goal(cfg.pitch) - me.pos, me.heading));
    put2(L::kAgentVel, to_ego(agent_vel_w, me.heading));
    put2(L::kBallVel, to_ego(ball_vel_w, me.heading));
    put2(L::kOppVel, to_ego(opp_vel_w, me.heading));
    if (with_pose_) {
      for (int i = 0; i < kActionDim; ++i)
        f[L::kPose + i] = w.target_pose.q_target[i];
      f[L::kPose + 4] = w.target_pose.g_target.x;
      f[L::kPose + 5] = w.target_pose.g_target.y;
    }

    true_frames_.push_front(std::move(f));
    const size_t keep = static_cast<size_t>(rand.delay_steps) + 1;
    while (true_frames_.size() > keep) true_frames_.pop_back();

    // deliver the frame from delay_steps ago (zero frame before it exists)
    Vec delivered(frame_dim_, 0.0);
    if (static_cast<int>(true_frames_.size()) > rand.delay_steps)
      delivered = true_frames_[rand.delay_steps];
    corrupt_frame(delivered, rand, noise_rng);
    delivered_.push_front(std::move(delivered));
    delivered_.pop_back();
  }

  Vec policy_obs() const {
    namespace L = obs_layout;
    Vec o;
    o.reserve(policy_obs_dim(with_pose_, stack_));
    auto stack_group = [&](int at, int n) {
      for (int k = 0; k < stack_; ++k)
        for (int i = 0; i < n; ++i) o.push_back(delivered_[k][at + i]);
    };
    auto latest = [&](int at, int n) {
      for (int i = 0; i < n; ++i) o.push_back(delivered_[0][at + i]);
    };
    stack_group(L::kJoints, 4);
    stack_group(L::kTiltVel, 1);
    stack_group(L::kGravity, 2);
    stack_group(L::kLinAcc, 2);
    stack_group(L::kFilter, 4);
    latest(L::kBallPos, 2);
    latest(L::kOppPos, 2);
    latest(L::kOwnGoal, 2);
    latest(L::kOppGoal, 2);
    stack_group(L::kAgentVel, 2);
    latest(L::kBallVel, 2);
    latest(L::kOppVel, 2);
    if (with_pose_) stack_group(L::kPose, 6);
    return o;
  }

  Vec critic_obs(int opponent_id, int onehot_slots) const {
    Vec o = policy_obs();
    const size_t base = o.size();
    o.resize(base + onehot_slots, 0.0);
    if (opponent_id >= 0 && opponent_id < onehot_slots) o[base + opponent_id] = 1.0;
    return o;
  }

  const Vec& delivered_frame(int age) const { return delivered_[age]; }
  bool with_pose() const { return with_pose_; }

  // flat state for checkpointing
  Vec state_blob() const {
    Vec b;
    b.push_back(first_ ? 1.0 : 0.0);
    b.push_back(static_cast<double>(true_frames_.size()));
    b.push_back(prev_agent_pos_.x);
    b.push_back(prev_agent_pos_.y);
    b.push_back(prev_ball_pos_.x);
    b.push_back(prev_ball_pos_.y);
    b.push_back(prev_opp_pos_.x);
    b.push_back(prev_opp_pos_.y);
    b.push_back(prev_agent_vel_.x);
    b.push_back(prev_agent_vel_.y);
    for (const Vec& f : true_frames_) b.insert(b.end(), f.begin(), f.end());
    for (const Vec& f : delivered_) b.insert(b.end(), f.begin(), f.end());
    return b;
  }

  void restore_blob(const Vec& b) {
    size_t at = 0;
    first_ = b[at++] != 0.0;
    const int n_true = static_cast<int>(b[at++]);
    prev_agent_pos_ = {b[at], b[at + 1]};
    at += 2;
    prev_ball_pos_ = {b[at], b[at + 1]};
    at += 2;
    prev_opp_pos_ = {b[at], b[at + 1]};
    at += 2;
    prev_agent_vel_ = {b[at], b[at + 1]};
    at += 2;
    true_frames_.clear();
    for (int k = 0; k < n_true; ++k) {
      true_frames_.emplace_back(b.begin() + at, b.begin() + at + frame_dim_);
      at += frame_dim_;
    }
    for (int k = 0; k < stack_; ++k) {
      delivered_[k].assign(b.begin() + at, b.begin() + at + frame_dim_);
      at += frame_dim_;
    }
  }

 private:
  int stack_ = 5;
  int frame_dim_ = obs_layout::kBaseFrame;
  bool with_pose_ = false;
  std::deque<Vec> true_frames_;  // newest first
  std::deque<Vec> delivered_;    // newest first, exactly stack_ entries
  bool first_ = true;
  Vec2 prev_agent_pos_, prev_ball_pos_, prev_opp_pos_, prev_agent_vel_;
};

}  // namespace pitchrl
