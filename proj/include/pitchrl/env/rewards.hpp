#pragma once

#include <cmath>

#include "pitchrl/env/types.hpp"

namespace pitchrl {

struct GoalBoundsRecord {
  int goal_side = 0;  // +1: ball fully past +x mouth, -1: past -x, 0: none
  std::array<bool, 2> fallen{};
  std::array<bool, 2> out{};
  std::array<bool, 2> in_penalty{};
};

// Geometry-only detector: goal iff the ball center is beyond a goal line
// inside the mouth; fallen/out/penalty flags per player.
template <class World>
GoalBoundsRecord detect_goal_and_bounds(const World& w, const EnvParams& cfg) {
  GoalBoundsRecord r;
  const auto& pitch = cfg.pitch;
  if (std::fabs(w.ball.pos.y) <= pitch.goal_half_mouth) {
    if (w.ball.pos.x > pitch.half_length) r.goal_side = +1;
    else if (w.ball.pos.x < -pitch.half_length) r.goal_side = -1;
  }
  for (int i = 0; i < 2; ++i) {
    const PlayerState& p = w.players[i];
    r.fallen[i] = std::fabs(p.tilt) >= cfg.fallen_tilt;
    r.out[i] = !pitch.inside_pitch(p.pos);
    r.in_penalty[i] = pitch.in_penalty_area(p.pos, -p.attack_sign);
  }
  return r;
}

inline double upright_reward(double tilt, double lo = 0.2, double hi = 0.4) {
  const double a = std::fabs(tilt);
  if (a >= hi) return 0.0;
  if (a <= lo) return 1.0;
  return (hi - a) / (hi - lo);
}

inline double target_pose_reward(const std::array<double, kActionDim>& q,
                                 double tilt, const TargetPose& target) {
  double err2 = 0.0;
  for (int i = 0; i < kActionDim; ++i) {
    const double d = target.q_target[i] - q[i];
    err2 += d * d;
  }
  const double pi = 3.14159265358979323846;
  const double p_tilde = (pi - std::min(pi, std::sqrt(err2))) / pi;
  const Vec2 g = gravity_dir(tilt);
  const double cosang = clamp(g.dot(target.g_target), -1.0, 1.0);
  const double g_tilde = (pi - std::acos(cosang)) / pi;
  return p_tilde * g_tilde;
}

struct RewardInputs {
  Vec2 pos_before;                       // player position at step start
  std::array<double, 2> drive_torque_excess{};  // mean substep excess per drive joint
  GoalBoundsRecord record;               // post-step detection
};

// Per-player reward components for one control step. Velocities are finite
// differences of position over the control step. In the 1v1 stage with a
// termination penalty active, positive components are zeroed whenever this
// player is in the termination condition.
template <class World>
RewardComponents compute_reward_components(const World& w_after, int player_id,
                                           Stage stage, const RewardWeights& weights,
                                           const RewardInputs& in,
                                           const EnvParams& cfg) {
  const PlayerState& me = w_after.players[player_id];
  const PlayerState& opp = w_after.players[1 - player_id];
  RewardComponents c;

  if (in.record.goal_side != 0) {
    const bool mine = in.record.goal_side == static_cast<int>(me.attack_sign);
    c.scoring = mine ? 1.0 : 0.0;
    c.conceding = mine ? 0.0 : -1.0;
  }

  const Vec2 v_fd = (me.pos - in.pos_before) * (1.0 / cfg.control_dt);
  c.vel_to_ball = v_fd.dot((w_after.ball.pos - me.pos).unit_or_zero());
  c.velocity = v_fd.dot(heading_vec(me.heading));

  const Vec2 to_opp = opp.pos - me.pos;
  if (to_opp.norm() <= 1.0 && v_fd.norm() > 1e-9) {
    const double cosang = v_fd.unit_or_zero().dot(to_opp.unit_or_zero());
    c.interference = -std::max(0.0, cosang);
  }

  const bool in_term = in.record.fallen[player_id] || in.record.out[player_id] ||
                       in.record.in_penalty[player_id];
  c.termination = in_term ? -1.0 : 0.0;
  c.upright = upright_reward(me.tilt, 0.2, cfg.upright_tilt);
  c.joint_torque = -(in.drive_torque_excess[0] + in.drive_torque_excess[1]);
  if (weights.target_pose != 0.0)
    c.target_pose = target_pose_reward(me.joints, me.tilt, w_after.target_pose);

  // positive components are ignored while the termination condition holds
  if ((stage == Stage::OneVOne || stage == Stage::Eval) &&
      weights.termination > 0.0 && in_term) {
    c.scoring = std::min(c.scoring, 0.0);
    c.vel_to_ball = std::min(c.vel_to_ball, 0.0);
    c.velocity = std::min(c.velocity, 0.0);
    c.upright = std::min(c.upright, 0.0);
    c.target_pose = std::min(c.target_pose, 0.0);
  }

  c.weighted_scaled_sum =
      cfg.reward_scale *
      (weights.scoring * c.scoring + weights.conceding * c.conceding +
       weights.vel_to_ball * c.vel_to_ball + weights.velocity * c.velocity +
       weights.interference * c.interference + weights.termination * c.termination +
       weights.upright * c.upright + weights.joint_torque * c.joint_torque +
       weights.target_pose * c.target_pose);
  return c;
}

}  // namespace pitchrl
