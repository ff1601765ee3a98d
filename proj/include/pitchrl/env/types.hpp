#pragma once

#include <array>
#include <cmath>
#include <string>

#include "pitchrl/numcore/matrix.hpp"

namespace pitchrl {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
  Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
  Vec2 operator*(double k) const { return {x * k, y * k}; }
  Vec2& operator+=(const Vec2& o) {
    x += o.x;
    y += o.y;
    return *this;
  }
  double dot(const Vec2& o) const { return x * o.x + y * o.y; }
  double norm() const { return std::sqrt(x * x + y * y); }
  Vec2 unit_or_zero() const {
    const double n = norm();
    return n > 1e-12 ? Vec2{x / n, y / n} : Vec2{0.0, 0.0};
  }
};

inline Vec2 heading_vec(double heading) { return {std::cos(heading), std::sin(heading)}; }

// World offset -> egocentric frame (x forward along the heading).
inline Vec2 to_ego(const Vec2& offset, double heading) {
  const double c = std::cos(heading), s = std::sin(heading);
  return {c * offset.x + s * offset.y, -s * offset.x + c * offset.y};
}

enum class Stage { GetupTeacher, SoccerTeacher, OneVOne, Eval };

inline std::string stage_name(Stage s) {
  switch (s) {
    case Stage::GetupTeacher: return "getup_teacher";
    case Stage::SoccerTeacher: return "soccer_teacher";
    case Stage::OneVOne: return "one_v_one";
    default: return "eval";
  }
}

inline Stage stage_from_name(const std::string& s) {
  if (s == "getup_teacher") return Stage::GetupTeacher;
  if (s == "soccer_teacher") return Stage::SoccerTeacher;
  if (s == "one_v_one") return Stage::OneVOne;
  if (s == "eval") return Stage::Eval;
  throw ConfigError("unknown stage: " + s);
}

struct PitchGeom {
  double half_length = 2.5;
  double half_width = 2.0;
  double goal_half_mouth = 0.4;
  double penalty_depth = 0.5;      // from the own goal line
  double penalty_half_width = 0.8;
  double apron = 0.5;
  double wall_restitution = 0.7;

  bool in_penalty_area(const Vec2& p, double own_goal_sign) const {
    return std::fabs(p.y) <= penalty_half_width &&
           p.x * own_goal_sign >= half_length - penalty_depth &&
           p.x * own_goal_sign <= half_length + apron;
  }
  bool inside_pitch(const Vec2& p) const {
    return std::fabs(p.x) <= half_length && std::fabs(p.y) <= half_width;
  }
};

struct TiltParams {
  double gravity = 9.0;            // s^-2
  double damping = 0.8;            // s^-1
  double authority = 5.0;          // s^-2, divided by the mass factor
  double stab_gain = 60.0;         // s^-2, inside the stabilization zone
  double stab_zone = 0.3;          // rad
  double ground_restitution = 0.8; // tilt velocity kept on ground contact
};

struct BodyParams {
  double max_speed = 0.8;     // m/s at full drive, upright
  double max_turn = 3.0;      // rad/s scale for differential drive
  double relax_tau = 0.3;     // s, velocity relaxation
  double accel_tilt_gain = 0.2;
  double crawl_effectiveness = 0.15;
  double radius = 0.15;
};

struct BallParams {
  double radius = 0.05;
  double decel = 0.05 * 9.81;  // rolling deceleration at friction 1
};

struct KickParams {
  double range = 0.25;
  double half_angle = 1.0471975511965976;  // 60 degrees
  double rate_threshold = 3.0;             // kick joint speed for the edge
  double speed_gain = 0.25;
};

struct JointParams {
  double rate_gain = 20.0;
  double rate_limit = 10.0;
  double torque_cap = 10.0;
  double torque_threshold = 4.0;  // excess above this is penalized
};

struct EnvParams {
  PitchGeom pitch;
  TiltParams tilt;
  BodyParams body;
  BallParams ball;
  KickParams kick;
  JointParams joints;
  double control_dt = 0.025;
  int substeps = 5;
  double filter_keep = 0.8;
  double filter_mix = 0.2;
  double fallen_tilt = 1.0;
  double upright_tilt = 0.4;
  double reward_scale = 0.1;
  int episode_cap_steps = 2000;   // 50 s
  int getup_episode_steps = 400;  // 10 s
  int stack_frames = 5;
  int onehot_slots = 64;

  double substep_dt() const { return control_dt / substeps; }
};

// Joint order: drive_left, drive_right, kick, torso.
constexpr int kActionDim = 4;
constexpr int kJointDriveLeft = 0;
constexpr int kJointDriveRight = 1;
constexpr int kJointKick = 2;
constexpr int kJointTorso = 3;

struct PlayerState {
  Vec2 pos;
  double heading = 0.0;
  Vec2 lin_vel;
  double tilt = 0.0;      // rad in [-pi/2, pi/2]; 0 upright, +pi/2 front-down
  double tilt_vel = 0.0;
  std::array<double, kActionDim> joints{};
  std::array<double, kActionDim> filter{};
  double attack_sign = 1.0;  // sign of the x goal this player attacks
  double prev_kick_rate = 0.0;
  double prev_speed_cmd = 0.0;

  Vec2 own_goal(const PitchGeom& pitch) const {
    return {-attack_sign * pitch.half_length, 0.0};
  }
  Vec2 opponent_goal(const PitchGeom& pitch) const {
    return {attack_sign * pitch.half_length, 0.0};
  }
};

struct BallState {
  Vec2 pos;
  Vec2 vel;
};

struct TargetPose {
  std::array<double, kActionDim> q_target{};
  Vec2 g_target{0.0, -1.0};  // egocentric gravity direction, unit
};

inline Vec2 gravity_dir(double tilt) { return {std::sin(tilt), -std::cos(tilt)}; }

struct RewardWeights {
  double scoring = 0.0;
  double conceding = 0.0;
  double vel_to_ball = 0.0;
  double velocity = 0.0;
  double interference = 0.0;
  double termination = 0.0;
  double upright = 0.0;
  double joint_torque = 0.0;
  double target_pose = 0.0;

  static RewardWeights for_stage(Stage stage) {
    RewardWeights w;
    switch (stage) {
      case Stage::SoccerTeacher:
        w.scoring = 1000.0;
        w.conceding = 0.0;
        w.vel_to_ball = 0.05;
        w.velocity = 0.1;
        w.interference = 1.0;
        w.upright = 0.015;
        w.joint_torque = 0.01;
        break;
      case Stage::GetupTeacher:
        w.target_pose = 1.0;
        break;
      case Stage::OneVOne:
      case Stage::Eval:
        w.scoring = 1000.0;
        w.conceding = 1000.0;
        w.vel_to_ball = 0.05;
        w.velocity = 0.1;
        w.interference = 1.0;
        w.termination = 0.5;
        w.upright = 0.02;
        w.joint_torque = 0.01;
        break;
    }
    return w;
  }
};

struct RewardComponents {
  double scoring = 0.0;
  double conceding = 0.0;
  double vel_to_ball = 0.0;
  double velocity = 0.0;
  double interference = 0.0;
  double termination = 0.0;
  double upright = 0.0;
  double joint_torque = 0.0;
  double target_pose = 0.0;
  double weighted_scaled_sum = 0.0;
};

}  // namespace pitchrl
