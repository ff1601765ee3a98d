#pragma once

#include <array>
#include <vector>

#include "pitchrl/env/types.hpp"
#include "pitchrl/numcore/rng.hpp"

namespace pitchrl {

inline bool upright_indicator(double tilt) { return std::fabs(tilt) < 0.4; }

// Ordered (torso, tilt) waypoints for getting up from the front and from the
// back; interpolation along the segments defines the target-pose family the
// get-up teacher is trained on. The last pose of both tracks is upright.
struct KeyPoseTrack {
  struct Waypoint {
    double torso;
    double tilt;
  };
  std::vector<Waypoint> front;
  std::vector<Waypoint> back;

  static KeyPoseTrack standard() {
    KeyPoseTrack t;
    const double half_pi = 1.5707963267948966;
    t.front = {{+1.0, half_pi}, {-0.5, half_pi / 2.0}, {0.0, 0.0}};
    t.back = {{-1.0, -half_pi}, {+0.5, -half_pi / 2.0}, {0.0, 0.0}};
    return t;
  }

  static TargetPose to_pose(const Waypoint& w) {
    TargetPose p;
    p.q_target = {0.0, 0.0, 0.0, w.torso};
    p.g_target = gravity_dir(w.tilt);
    return p;
  }

  TargetPose interpolate(bool front_track, int segment, double u) const {
    const auto& track = front_track ? front : back;
    const Waypoint& a = track[segment];
    const Waypoint& b = track[segment + 1];
    return to_pose({a.torso + u * (b.torso - a.torso), a.tilt + u * (b.tilt - a.tilt)});
  }

  int segments_per_track() const { return static_cast<int>(front.size()) - 1; }

  // Conditioning the converged policy on this pose makes it stand up.
  TargetPose final_pose() const { return to_pose(front.back()); }
};

struct SampledTargetPose {
  TargetPose pose;
  double hold_seconds;  // exponential, mean 1.5 s
};

// Uniform over the key-pose path (track, segment, interpolation parameter);
// switch intervals are exponential so the switch probability is
// time-independent.
inline SampledTargetPose sample_target_pose(const KeyPoseTrack& track, Rng& rng,
                                            double mean_hold = 1.5) {
  const bool front = rng.bernoulli(0.5);
  const int seg = static_cast<int>(rng.uniform_int(track.segments_per_track()));
  const double u = rng.uniform();
  return {track.interpolate(front, seg, u), rng.exponential(mean_hold)};
}

}  // namespace pitchrl
