#pragma once

#include <array>
#include <cmath>
#include <optional>

#include "pitchrl/env/types.hpp"
#include "pitchrl/numcore/rng.hpp"

namespace pitchrl {

struct PerturbationConfig {
  double dv_min = 0.3;
  double dv_max = 1.0;
  double dtilt_min = -2.0;
  double dtilt_max = 2.0;
  double duration_min = 0.05;
  double duration_max = 0.15;
  double interval_min = 1.0;
  double interval_max = 3.0;
  bool enabled = true;
};

struct RandomizationConfig {
  bool enabled = true;
  double friction_min = 0.5;
  double friction_max = 1.0;
  double joint_offset_range = 0.05;     // rad, per joint, +-
  double gravity_rotation_range = 0.035;  // rad, +-
  double mass_min = 0.85;
  double mass_max = 1.15;
  double delay_ms_min = 10.0;
  double delay_ms_max = 50.0;
  double obs_noise_sigma = 0.01;
  PerturbationConfig perturbation;

  void validate() const {
    if (friction_max < friction_min || mass_max < mass_min ||
        delay_ms_max < delay_ms_min)
      throw ConfigError("randomization: ranges must be ordered");
  }
};

// One draw per episode; every axis constant until the next reset.
struct EpisodeRandomization {
  double friction = 1.0;
  double mass = 1.0;
  double gravity_rotation = 0.0;
  std::array<double, kActionDim> joint_offsets{};
  int delay_steps = 0;
  double noise_sigma = 0.0;
};

inline EpisodeRandomization sample_episode_randomization(
    const RandomizationConfig& cfg, Rng& rng, double control_dt) {
  EpisodeRandomization e;
  if (!cfg.enabled) return e;
  e.friction = rng.uniform(cfg.friction_min, cfg.friction_max);
  e.mass = rng.uniform(cfg.mass_min, cfg.mass_max);
  e.gravity_rotation =
      rng.uniform(-cfg.gravity_rotation_range, cfg.gravity_rotation_range);
  for (double& o : e.joint_offsets)
    o = rng.uniform(-cfg.joint_offset_range, cfg.joint_offset_range);
  const double delay_s = rng.uniform(cfg.delay_ms_min, cfg.delay_ms_max) / 1000.0;
  e.delay_steps = static_cast<int>(std::floor(delay_s / control_dt + 0.5));
  e.noise_sigma = cfg.obs_noise_sigma;
  return e;
}

// Random impulse events: onset gaps i.i.d. uniform on the interval range,
// each event's impulse spread uniformly over its duration.
struct PerturbationSchedule {
  void reset(const PerturbationConfig& cfg, Rng& rng, bool enabled) {
    cfg_ = cfg;
    enabled_ = enabled && cfg.enabled;
    active_until_ = -1.0;
    dv_rate_ = {0.0, 0.0};
    dtilt_rate_ = 0.0;
    next_onset_ = enabled_ ? rng.uniform(cfg.interval_min, cfg.interval_max) : 1e18;
  }

  struct Impulse {
    Vec2 dv_rate;       // m/s per second while active
    double dtilt_rate;  // rad/s per second while active
  };

  // Called once per control step with the episode clock; returns the rates
  // to integrate during this step's substeps, if an event is active.
  std::optional<Impulse> at(double t, Rng& rng) {
    if (!enabled_) return std::nullopt;
    if (t >= next_onset_ && t >= active_until_) {
      const double duration = rng.uniform(cfg_.duration_min, cfg_.duration_max);
      const double mag = rng.uniform(cfg_.dv_min, cfg_.dv_max);
      const double ang = rng.uniform(0.0, 2.0 * 3.14159265358979323846);
      const double dtilt = rng.uniform(cfg_.dtilt_min, cfg_.dtilt_max);
      dv_rate_ = Vec2{std::cos(ang), std::sin(ang)} * (mag / duration);
      dtilt_rate_ = dtilt / duration;
      active_until_ = t + duration;
      next_onset_ = active_until_ + rng.uniform(cfg_.interval_min, cfg_.interval_max);
    }
    if (t < active_until_) return Impulse{dv_rate_, dtilt_rate_};
    return std::nullopt;
  }

  bool active(double t) const { return enabled_ && t < active_until_; }

  PerturbationConfig cfg_;
  bool enabled_ = false;
  double next_onset_ = 1e18;
  double active_until_ = -1.0;
  Vec2 dv_rate_;
  double dtilt_rate_ = 0.0;
};

}  // namespace pitchrl
