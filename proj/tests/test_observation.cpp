#include <catch2/catch_amalgamated.hpp>

#include "pitchrl/env/observation.hpp"
#include "pitchrl/env/world.hpp"

using namespace pitchrl;

TEST_CASE("egocentric transform") {
  SECTION("heading +x is the identity") {
    const Vec2 e = to_ego({1.0, 0.0}, 0.0);
    REQUIRE_THAT(e.x, Catch::Matchers::WithinAbs(1.0, 1e-12));
    REQUIRE_THAT(e.y, Catch::Matchers::WithinAbs(0.0, 1e-12));
  }
  SECTION("heading +y maps world +y to ego forward") {
    const Vec2 e = to_ego({0.0, 1.0}, 1.5707963267948966);
    REQUIRE_THAT(e.x, Catch::Matchers::WithinAbs(1.0, 1e-12));
    REQUIRE_THAT(e.y, Catch::Matchers::WithinAbs(0.0, 1e-12));
  }
}

namespace {

EnvParams clean_params() { return EnvParams{}; }

RandomizationConfig off() {
  RandomizationConfig r;
  r.enabled = false;
  return r;
}

}  // namespace

TEST_CASE("observation dimensions") {
  REQUIRE(policy_obs_dim(false) == 87);
  REQUIRE(policy_obs_dim(true) == 117);
  REQUIRE(critic_obs_dim(false, 64) == 151);
  REQUIRE(critic_obs_dim(true, 64) == 181);
}

TEST_CASE("observation content and stacking") {
  Env env(clean_params(), off(), Stage::Eval);
  Rng rng(5);
  env.reset(rng);
  Rng rng2(7);

  SECTION("ball ahead appears at ego (d, 0)") {
    env.override_state(
        [](WorldState& w) {
          w.players[0].pos = {0, 0};
          w.players[0].heading = 0.0;
          w.ball.pos = {1.0, 0.0};
        },
        rng2);
    const Vec o = env.policy_obs(0);
    // unstacked ball pos sits right after the stacked groups (65 entries)
    REQUIRE_THAT(o[65], Catch::Matchers::WithinAbs(1.0, 1e-12));
    REQUIRE_THAT(o[66], Catch::Matchers::WithinAbs(0.0, 1e-12));
  }

  SECTION("heading +y ball at world (0,1) appears at ego (1,0)") {
    env.override_state(
        [](WorldState& w) {
          w.players[0].pos = {0, 0};
          w.players[0].heading = 1.5707963267948966;
          w.ball.pos = {0.0, 1.0};
        },
        rng2);
    const Vec o = env.policy_obs(0);
    REQUIRE_THAT(o[65], Catch::Matchers::WithinAbs(1.0, 1e-12));
    REQUIRE_THAT(o[66], Catch::Matchers::WithinAbs(0.0, 1e-12));
  }

  SECTION("goal markers are egocentric") {
    env.override_state(
        [](WorldState& w) {
          w.players[0].pos = {0.5, 0.0};
          w.players[0].heading = 0.0;
        },
        rng2);
    const Vec o = env.policy_obs(0);
    // own goal at (-2.5,0) -> ego (-3,0); opponent goal (2.5,0) -> (2,0)
    REQUIRE_THAT(o[69], Catch::Matchers::WithinAbs(-3.0, 1e-12));
    REQUIRE_THAT(o[71], Catch::Matchers::WithinAbs(2.0, 1e-12));
  }

  SECTION("finite-difference velocity: 0.025 m per step reads 1 m/s") {
    Env e2(clean_params(), off(), Stage::Eval);
    Rng r(11);
    e2.reset(r);
    Rng r2(12);
    e2.override_state(
        [](WorldState& w) {
          w.players[0].pos = {0, 0};
          w.players[0].heading = 0.0;
          w.players[0].tilt = 0.0;
          w.ball.pos = {2.0, 1.0};
          w.players[1].pos = {-2.0, -1.0};
        },
        r2);
    // manual step: directly move the player and push a frame
    // (use the env step with zero actions, then check the ball-vel channel
    // stays 0 while the agent-vel channel reflects the position change)
    // Simpler: drive via override of consecutive frames is not exposed, so
    // exercise the builder directly.
    ObservationBuilder b;
    EnvParams cfg = clean_params();
    b.reset(cfg, false);
    WorldState w;
    w.players[0].pos = {0, 0};
    w.players[1].pos = {-2, -1};
    w.ball.pos = {2, 1};
    EpisodeRandomization none;
    Rng nr(1);
    b.push(w, 0, none, nr, cfg);
    w.players[0].pos = {0.025, 0.0};
    b.push(w, 0, none, nr, cfg);
    const Vec o = b.policy_obs();
    // agent_vel stack sits after the four unstacked position pairs: 73..82
    REQUIRE_THAT(o[73], Catch::Matchers::WithinAbs(1.0, 1e-12));
    REQUIRE_THAT(o[74], Catch::Matchers::WithinAbs(0.0, 1e-12));
    REQUIRE_THAT(o[75], Catch::Matchers::WithinAbs(0.0, 1e-12));  // previous frame
  }

  SECTION("stack frame k equals the frame pushed k steps earlier") {
    ObservationBuilder b;
    EnvParams cfg = clean_params();
    b.reset(cfg, false);
    WorldState w;
    w.players[1].pos = {-2, -1};
    w.ball.pos = {2, 1};
    EpisodeRandomization none;
    Rng nr(1);
    std::vector<Vec> frames;
    for (int t = 0; t < 6; ++t) {
      w.players[0].joints[0] = 0.1 * t;
      b.push(w, 0, none, nr, cfg);
      frames.push_back(b.delivered_frame(0));
    }
    // joints group: frame k drive_left channel at index 4*k
    const Vec o = b.policy_obs();
    for (int k = 0; k < 5; ++k)
      REQUIRE(o[4 * k] == frames[5 - k][0]);
  }

  SECTION("zero padding at episode start") {
    Env e2(clean_params(), off(), Stage::Eval);
    Rng r(13);
    e2.reset(r);
    const Vec o = e2.policy_obs(0);
    // frames 1..4 of the joints stack are all zero right after reset
    for (int k = 1; k < 5; ++k)
      for (int i = 0; i < 4; ++i) REQUIRE(o[4 * k + i] == 0.0);
  }

  SECTION("critic obs appends the opponent one-hot") {
    Env e2(clean_params(), off(), Stage::Eval);
    Rng r(14);
    e2.reset(r, /*opponent_id=*/7);
    const Vec c = e2.critic_obs(0);
    REQUIRE(c.size() == 151);
    REQUIRE(c[87 + 7] == 1.0);
    double sum = 0.0;
    for (int i = 0; i < 64; ++i) sum += c[87 + i];
    REQUIRE(sum == 1.0);
  }
}

TEST_CASE("get-up stage appends the stacked pose block") {
  Env env(clean_params(), off(), Stage::GetupTeacher);
  Rng rng(9);
  env.reset(rng);
  TargetPose pose;
  pose.q_target = {0.1, 0.2, 0.3, 0.4};
  pose.g_target = gravity_dir(0.5);
  env.set_target_pose(pose);
  Rng r2(10);
  env.override_state([](WorldState&) {}, r2);  // rebuild stacks with the pose
  const Vec o = env.policy_obs(0);
  REQUIRE(o.size() == 117);
  // pose block is the last stacked group: 6 entries x 5 frames
  REQUIRE_THAT(o[87], Catch::Matchers::WithinAbs(0.1, 1e-12));
  REQUIRE_THAT(o[90], Catch::Matchers::WithinAbs(0.4, 1e-12));
  REQUIRE_THAT(o[91], Catch::Matchers::WithinAbs(std::sin(0.5), 1e-12));
}
