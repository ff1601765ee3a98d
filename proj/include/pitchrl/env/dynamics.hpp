#pragma once

#include <algorithm>
#include <cmath>

#include "pitchrl/env/types.hpp"

namespace pitchrl {

// u = 0.8 u_prev + 0.2 a, with a pre-clipped to the joint range.
inline std::array<double, kActionDim> apply_action_filter(
    const std::array<double, kActionDim>& u_prev,
    const std::array<double, kActionDim>& a, double keep = 0.8, double mix = 0.2) {
  std::array<double, kActionDim> u{};
  for (int i = 0; i < kActionDim; ++i)
    u[i] = keep * u_prev[i] + mix * clamp(a[i], -1.0, 1.0);
  return u;
}

struct JointStepResult {
  std::array<double, kActionDim> q;
  std::array<double, kActionDim> rate;          // applied joint velocity
  std::array<double, kActionDim> torque_proxy;  // |rate demand|, capped
};

inline JointStepResult step_joints(const std::array<double, kActionDim>& q,
                                   const std::array<double, kActionDim>& u,
                                   double dt, const JointParams& p) {
  JointStepResult r;
  for (int i = 0; i < kActionDim; ++i) {
    const double demand = p.rate_gain * (u[i] - q[i]);
    r.rate[i] = clamp(demand, -p.rate_limit, p.rate_limit);
    r.torque_proxy[i] = std::min(std::fabs(demand), p.torque_cap);
    r.q[i] = clamp(q[i] + r.rate[i] * dt, -1.0, 1.0);
  }
  return r;
}

// Underactuated tilt: gravity barrier G sin(2*tilt) peaks above the control
// authority, a stiff stabilization well holds the upright zone, and ground
// contact at |tilt| = pi/2 reflects the tilt rate with restitution so that
// rocking can pump energy (a dead stop would make swing-up infeasible for
// any authority that still loses to the barrier).
inline void step_tilt(double& tilt, double& tilt_vel, double torso_joint, double dt,
                      double mass_factor, double perturbation_accel,
                      const TiltParams& p) {
  const double authority = p.authority / mass_factor;
  double acc = p.gravity * std::sin(2.0 * tilt) - p.damping * tilt_vel +
               authority * torso_joint + perturbation_accel;
  if (std::fabs(tilt) < p.stab_zone) acc -= p.stab_gain * tilt;
  tilt_vel += acc * dt;
  tilt += tilt_vel * dt;
  const double edge = 1.5707963267948966;
  if (tilt > edge) {
    tilt = edge;
    if (tilt_vel > 0.0) tilt_vel = -p.ground_restitution * tilt_vel;
  } else if (tilt < -edge) {
    tilt = -edge;
    if (tilt_vel < 0.0) tilt_vel = -p.ground_restitution * tilt_vel;
  }
}

// Locomotion effectiveness vs tilt: full while upright, fading linearly to a
// crawl factor at the fallen threshold and beyond.
inline double drive_effectiveness(double tilt, const BodyParams& p,
                                  double upright_zone = 0.3, double fallen = 1.0) {
  const double a = std::fabs(tilt);
  if (a < upright_zone) return 1.0;
  if (a >= fallen) return p.crawl_effectiveness;
  const double t = (a - upright_zone) / (fallen - upright_zone);
  return 1.0 + t * (p.crawl_effectiveness - 1.0);
}

struct BodyStepResult {
  double speed_cmd = 0.0;
};

// Differential-drive planar motion: commanded speed from the drive pair,
// velocity relaxing toward heading * speed, heading integrating the turn.
inline BodyStepResult step_body(PlayerState& pl, double dt, double friction_factor,
                                double mass_factor, const BodyParams& p,
                                double upright_zone, double fallen_tilt) {
  const double e = drive_effectiveness(pl.tilt, p, upright_zone, fallen_tilt);
  const double q_dl = pl.joints[kJointDriveLeft];
  const double q_dr = pl.joints[kJointDriveRight];
  const double speed = 0.5 * (q_dl + q_dr) * p.max_speed * e * friction_factor;
  const double turn = 0.5 * (q_dr - q_dl) * p.max_turn * e;

  pl.heading += turn * dt;
  if (pl.heading > 3.14159265358979323846) pl.heading -= 2.0 * 3.14159265358979323846;
  if (pl.heading < -3.14159265358979323846) pl.heading += 2.0 * 3.14159265358979323846;

  const Vec2 v_cmd = heading_vec(pl.heading) * speed;
  const double tau = p.relax_tau * mass_factor;
  const double blend = 1.0 - std::exp(-dt / tau);
  pl.lin_vel += (v_cmd - pl.lin_vel) * blend;
  pl.pos += pl.lin_vel * dt;
  return {speed};
}

// Rolling friction + ramp reflection; the goal mouths are open.
inline void step_ball(BallState& ball, double dt, double friction_factor,
                      const PitchGeom& pitch, const BallParams& p) {
  const double speed = ball.vel.norm();
  if (speed > 0.0) {
    const double drop = p.decel * friction_factor * dt;
    const double k = speed <= drop ? 0.0 : (speed - drop) / speed;
    ball.vel = ball.vel * k;
  }
  ball.pos += ball.vel * dt;

  if (ball.pos.y > pitch.half_width) {
    ball.pos.y = pitch.half_width;
    if (ball.vel.y > 0.0) ball.vel.y = -pitch.wall_restitution * ball.vel.y;
  } else if (ball.pos.y < -pitch.half_width) {
    ball.pos.y = -pitch.half_width;
    if (ball.vel.y < 0.0) ball.vel.y = -pitch.wall_restitution * ball.vel.y;
  }
  const bool in_mouth = std::fabs(ball.pos.y) <= pitch.goal_half_mouth;
  if (!in_mouth) {
    if (ball.pos.x > pitch.half_length) {
      ball.pos.x = pitch.half_length;
      if (ball.vel.x > 0.0) ball.vel.x = -pitch.wall_restitution * ball.vel.x;
    } else if (ball.pos.x < -pitch.half_length) {
      ball.pos.x = -pitch.half_length;
      if (ball.vel.x < 0.0) ball.vel.x = -pitch.wall_restitution * ball.vel.x;
    }
  } else {
    // through the mouth: cap at the apron so the goal step can settle
    ball.pos.x = clamp(ball.pos.x, -pitch.half_length - pitch.apron,
                       pitch.half_length + pitch.apron);
  }
}

struct KickResult {
  bool kicked = false;
  bool contact = false;
};

// Kick on a rising edge of kick-joint speed while the ball sits inside the
// strike cone; any circle overlap pushes the ball out with velocity matching
// (dribbling, crawl-pushing).
inline KickResult resolve_kick(PlayerState& pl, double kick_rate, BallState& ball,
                               const BodyParams& body, const KickParams& kick,
                               double ball_radius, double upright_zone,
                               double fallen_tilt) {
  KickResult res;
  const Vec2 to_ball = ball.pos - pl.pos;
  const double dist = to_ball.norm();
  const Vec2 hv = heading_vec(pl.heading);

  const bool rising = kick_rate > kick.rate_threshold &&
                      pl.prev_kick_rate <= kick.rate_threshold;
  if (rising && dist <= kick.range && dist > 1e-9) {
    const double cosang = to_ball.dot(hv) / dist;
    if (cosang >= std::cos(kick.half_angle)) {
      const double e = drive_effectiveness(pl.tilt, body, upright_zone, fallen_tilt);
      const double run_up = std::max(0.0, pl.lin_vel.dot(hv));
      const double speed = kick.speed_gain * kick_rate * e + run_up;
      ball.vel = hv * speed;
      res.kicked = true;
      res.contact = true;
    }
  }
  pl.prev_kick_rate = kick_rate;

  const double contact_dist = body.radius + ball_radius;
  if (dist < contact_dist) {
    res.contact = true;
    Vec2 n = dist > 1e-9 ? to_ball * (1.0 / dist) : hv;
    ball.pos = pl.pos + n * contact_dist;
    const double vn_p = pl.lin_vel.dot(n);
    const double vn_b = ball.vel.dot(n);
    if (vn_p > vn_b) ball.vel += n * (vn_p - vn_b);
  }
  return res;
}

}  // namespace pitchrl
