#pragma once

#include <cmath>
#include <memory>

#include "pitchrl/dmpo/policy.hpp"
#include "pitchrl/env/observation.hpp"
#include "pitchrl/env/types.hpp"

namespace pitchrl {

// Anything that maps a policy observation to an action.
class ActingPolicy {
 public:
  virtual ~ActingPolicy() = default;
  virtual Vec act(const Vec& policy_obs, Rng& rng) = 0;
  virtual void episode_reset() {}
};

class ZeroPolicy : public ActingPolicy {
 public:
  Vec act(const Vec&, Rng&) override { return Vec(kActionDim, 0.0); }
};

class NetworkPolicy : public ActingPolicy {
 public:
  NetworkPolicy(const GaussianPolicy* net, bool stochastic)
      : net_(net), stochastic_(stochastic) {}

  Vec act(const Vec& obs, Rng& rng) override {
    const DiagGaussian g = net_->eval(obs, ws_);
    if (!stochastic_) return g.mean;
    Vec a(g.mean.size());
    for (size_t i = 0; i < a.size(); ++i)
      a[i] = g.mean[i] + std::sqrt(g.var[i]) * rng.normal();
    return a;
  }

 private:
  const GaussianPolicy* net_;
  bool stochastic_;
  MlpWorkspace ws_;
};

// Energy-regulated bang-bang torso command for the swing-up: pump while the
// rocking energy is below the crossing budget, brake above it, release
// inside the stabilized zone. Feedback is (tilt, tilt rate) only.
inline double pump_torso_command(double tilt, double tilt_vel, const TiltParams& p,
                                 double margin = 0.55) {
  if (std::fabs(tilt) < p.stab_zone) return 0.0;
  const double s = tilt > 0.0 ? 1.0 : -1.0;
  const double e_ref = 0.5 * p.gravity * std::cos(2.0 * p.stab_zone) + margin;
  const double e = 0.5 * tilt_vel * tilt_vel + 0.5 * p.gravity * std::cos(2.0 * tilt);
  if (std::fabs(tilt_vel) < 0.05) return -s;  // kick off the ground / a stall
  const double need = e < e_ref ? 1.0 : -1.0;
  return need * (tilt_vel > 0.0 ? 1.0 : -1.0);
}

// Recovers (tilt, tilt rate) from the newest observation frame: gravity is
// (sin tilt, -cos tilt) and the angular-velocity channel is the tilt rate.
struct TiltEstimate {
  double tilt = 0.0;
  double tilt_vel = 0.0;
};

inline TiltEstimate tilt_from_obs(const Vec& policy_obs, int stack = 5) {
  // layout: joints 4*stack, tilt_vel stack, gravity 2*stack (newest first)
  const int tilt_vel_at = 4 * stack;
  const int gravity_at = 5 * stack;
  TiltEstimate e;
  e.tilt_vel = policy_obs[tilt_vel_at];
  e.tilt = std::atan2(policy_obs[gravity_at], -policy_obs[gravity_at + 1]);
  return e;
}

// Constant equal drive; steady walking speed ~0.28 m/s upright.
class ScriptedWalk : public ActingPolicy {
 public:
  explicit ScriptedWalk(double drive = 0.35) : drive_(drive) {}
  Vec act(const Vec&, Rng&) override {
    Vec a(kActionDim, 0.0);
    a[kJointDriveLeft] = drive_;
    a[kJointDriveRight] = drive_;
    return a;
  }

 private:
  double drive_;
};

// Bang-bang pumping get-up driven by the observed tilt state.
class ScriptedGetup : public ActingPolicy {
 public:
  explicit ScriptedGetup(TiltParams tilt = TiltParams{}) : tilt_(tilt) {}
  Vec act(const Vec& obs, Rng&) override {
    const TiltEstimate e = tilt_from_obs(obs);
    Vec a(kActionDim, 0.0);
    a[kJointTorso] = pump_torso_command(e.tilt, e.tilt_vel, tilt_);
    return a;
  }

 private:
  TiltParams tilt_;
};

// Open-loop kick-joint swing from standstill: wind up, then snap through.
class ScriptedKick : public ActingPolicy {
 public:
  explicit ScriptedKick(double amplitude = 0.85, int windup_steps = 24)
      : amplitude_(amplitude), windup_steps_(windup_steps) {}
  void episode_reset() override { step_ = 0; }
  Vec act(const Vec&, Rng&) override {
    Vec a(kActionDim, 0.0);
    a[kJointKick] = step_ < windup_steps_ ? -amplitude_ : amplitude_;
    step_ += 1;
    return a;
  }

 private:
  double amplitude_;
  int windup_steps_;
  int step_ = 0;
};

}  // namespace pitchrl
