#include <catch2/catch_amalgamated.hpp>

#include "pitchrl/env/rewards.hpp"
#include "pitchrl/env/world.hpp"

using namespace pitchrl;

TEST_CASE("goal and bounds detection") {
  EnvParams cfg;
  WorldState w;
  w.players[0].attack_sign = 1.0;
  w.players[1].attack_sign = -1.0;
  SECTION("ball inside the mouth past the line is a goal") {
    w.ball.pos = {2.51, 0.30};
    REQUIRE(detect_goal_and_bounds(w, cfg).goal_side == 1);
  }
  SECTION("past the line outside the mouth is not") {
    w.ball.pos = {2.51, 0.45};
    REQUIRE(detect_goal_and_bounds(w, cfg).goal_side == 0);
  }
  SECTION("center is nothing") {
    w.ball.pos = {0.0, 0.0};
    REQUIRE(detect_goal_and_bounds(w, cfg).goal_side == 0);
  }
  SECTION("fallen, out, penalty flags") {
    w.players[0].tilt = 1.2;
    w.players[0].pos = {2.2, 0.3};             // inside +x penalty box
    w.players[1].pos = {-2.6, 0.0};            // out of bounds
    const auto r = detect_goal_and_bounds(w, cfg);
    REQUIRE(r.fallen[0]);
    REQUIRE_FALSE(r.fallen[1]);
    REQUIRE(r.out[1]);
    REQUIRE_FALSE(r.out[0]);
    // player 0 attacks +x, so its own penalty area is at -x; the +x box
    // belongs to player 1
    REQUIRE_FALSE(r.in_penalty[0]);
    w.players[0].pos = {-2.2, 0.3};
    REQUIRE(detect_goal_and_bounds(w, cfg).in_penalty[0]);
  }
}

TEST_CASE("upright reward shape") {
  REQUIRE(upright_reward(0.1) == 1.0);
  REQUIRE_THAT(upright_reward(0.3), Catch::Matchers::WithinAbs(0.5, 1e-12));
  REQUIRE(upright_reward(0.45) == 0.0);
  REQUIRE(upright_reward(-0.3) == upright_reward(0.3));
}

TEST_CASE("target pose reward") {
  TargetPose target;
  target.q_target = {0.2, -0.1, 0.0, 0.5};
  target.g_target = gravity_dir(0.3);
  SECTION("perfect match gives 1") {
    REQUIRE_THAT(target_pose_reward(target.q_target, 0.3, target),
                 Catch::Matchers::WithinAbs(1.0, 1e-12));
  }
  SECTION("worst joint error floors the joint factor at 0") {
    std::array<double, 4> far{-1, 1, -1, -1};
    TargetPose t2;
    t2.q_target = {1, -1, 1, 1};
    const double r = target_pose_reward(far, 0.0, t2);
    REQUIRE(r < 0.01);
    REQUIRE(r >= 0.0);
  }
  SECTION("value stays in [0,1]") {
    Rng rng(3);
    for (int i = 0; i < 200; ++i) {
      std::array<double, 4> q;
      for (double& x : q) x = rng.uniform(-1.0, 1.0);
      TargetPose t;
      for (double& x : t.q_target) x = rng.uniform(-1.0, 1.0);
      t.g_target = gravity_dir(rng.uniform(-1.5707, 1.5707));
      const double r = target_pose_reward(q, rng.uniform(-1.5707, 1.5707), t);
      REQUIRE(r >= 0.0);
      REQUIRE(r <= 1.0);
    }
  }
}

namespace {

WorldState basic_world() {
  WorldState w;
  w.players[0].attack_sign = 1.0;
  w.players[1].attack_sign = -1.0;
  w.players[1].pos = {2.0, 1.5};
  w.ball.pos = {1.0, 0.0};
  return w;
}

}  // namespace

TEST_CASE("reward components") {
  EnvParams cfg;
  const RewardWeights w1v1 = RewardWeights::for_stage(Stage::OneVOne);

  SECTION("velocity projections are signed") {
    WorldState w = basic_world();
    w.players[0].pos = {0.025, 0.0};  // moved +x over one step
    RewardInputs in;
    in.pos_before = {0.0, 0.0};
    in.record = detect_goal_and_bounds(w, cfg);
    auto c = compute_reward_components(w, 0, Stage::OneVOne, w1v1, in, cfg);
    REQUIRE_THAT(c.velocity, Catch::Matchers::WithinAbs(1.0, 1e-9));
    REQUIRE_THAT(c.vel_to_ball, Catch::Matchers::WithinAbs(1.0, 1e-9));
    // retreating is negative
    in.pos_before = {0.05, 0.0};
    c = compute_reward_components(w, 0, Stage::OneVOne, w1v1, in, cfg);
    REQUIRE(c.velocity < 0.0);
  }

  SECTION("goal scored while fallen contributes zero scoring in 1v1") {
    WorldState w = basic_world();
    w.ball.pos = {2.51, 0.1};
    w.players[0].tilt = 1.4;  // fallen
    RewardInputs in;
    in.pos_before = w.players[0].pos;
    in.record = detect_goal_and_bounds(w, cfg);
    REQUIRE(in.record.goal_side == 1);
    const auto c = compute_reward_components(w, 0, Stage::OneVOne, w1v1, in, cfg);
    REQUIRE(c.scoring == 0.0);
    REQUIRE(c.termination == -1.0);
    // but the same goal in the soccer-teacher stage (no gating) counts
    const auto cs = compute_reward_components(
        w, 0, Stage::SoccerTeacher, RewardWeights::for_stage(Stage::SoccerTeacher),
        in, cfg);
    REQUIRE(cs.scoring == 1.0);
  }

  SECTION("gating zeroes every positive component") {
    WorldState w = basic_world();
    w.players[0].tilt = 1.2;
    w.players[0].pos = {0.025, 0.0};
    RewardInputs in;
    in.pos_before = {0.0, 0.0};
    in.record = detect_goal_and_bounds(w, cfg);
    const auto c = compute_reward_components(w, 0, Stage::OneVOne, w1v1, in, cfg);
    REQUIRE(c.velocity <= 0.0);
    REQUIRE(c.vel_to_ball <= 0.0);
    REQUIRE(c.upright <= 0.0);
    REQUIRE(c.termination == -1.0);
  }

  SECTION("no gating when the termination weight is zero (sparse ablation)") {
    WorldState w = basic_world();
    w.ball.pos = {2.51, 0.1};
    w.players[0].tilt = 1.4;
    RewardWeights sparse;
    sparse.scoring = 1000.0;
    sparse.conceding = 1000.0;
    RewardInputs in;
    in.pos_before = w.players[0].pos;
    in.record = detect_goal_and_bounds(w, cfg);
    const auto c = compute_reward_components(w, 0, Stage::OneVOne, sparse, in, cfg);
    REQUIRE(c.scoring == 1.0);
    REQUIRE_THAT(c.weighted_scaled_sum, Catch::Matchers::WithinAbs(100.0, 1e-9));
  }

  SECTION("interference fires only within a meter while approaching") {
    WorldState w = basic_world();
    w.players[1].pos = {0.5, 0.0};
    w.players[0].pos = {0.025, 0.0};
    RewardInputs in;
    in.pos_before = {0.0, 0.0};
    in.record = detect_goal_and_bounds(w, cfg);
    auto c = compute_reward_components(w, 0, Stage::OneVOne, w1v1, in, cfg);
    REQUIRE_THAT(c.interference, Catch::Matchers::WithinAbs(-1.0, 1e-9));
    // far opponent: no penalty
    w.players[1].pos = {2.0, 1.5};
    c = compute_reward_components(w, 0, Stage::OneVOne, w1v1, in, cfg);
    REQUIRE(c.interference == 0.0);
  }

  SECTION("torque excess enters negatively") {
    WorldState w = basic_world();
    RewardInputs in;
    in.pos_before = w.players[0].pos;
    in.drive_torque_excess = {2.0, 1.0};
    in.record = detect_goal_and_bounds(w, cfg);
    const auto c = compute_reward_components(w, 0, Stage::OneVOne, w1v1, in, cfg);
    REQUIRE_THAT(c.joint_torque, Catch::Matchers::WithinAbs(-3.0, 1e-12));
  }

  SECTION("reward scale 0.1 applies to the weighted sum") {
    WorldState w = basic_world();
    w.ball.pos = {2.51, 0.0};
    RewardInputs in;
    in.pos_before = w.players[0].pos;
    in.record = detect_goal_and_bounds(w, cfg);
    const auto c = compute_reward_components(w, 0, Stage::OneVOne, w1v1, in, cfg);
    // scoring 1*1000 + upright 1*0.02, times 0.1
    REQUIRE_THAT(c.weighted_scaled_sum,
                 Catch::Matchers::WithinAbs(0.1 * (1000.0 + 0.02), 1e-9));
  }
}

TEST_CASE("stage reward weights match the per-stage table") {
  const auto st = RewardWeights::for_stage(Stage::SoccerTeacher);
  REQUIRE(st.scoring == 1000.0);
  REQUIRE(st.conceding == 0.0);
  REQUIRE(st.vel_to_ball == 0.05);
  REQUIRE(st.velocity == 0.1);
  REQUIRE(st.interference == 1.0);
  REQUIRE(st.termination == 0.0);
  REQUIRE(st.upright == 0.015);
  REQUIRE(st.joint_torque == 0.01);

  const auto v = RewardWeights::for_stage(Stage::OneVOne);
  REQUIRE(v.conceding == 1000.0);
  REQUIRE(v.termination == 0.5);
  REQUIRE(v.upright == 0.02);

  const auto g = RewardWeights::for_stage(Stage::GetupTeacher);
  REQUIRE(g.target_pose == 1.0);
  REQUIRE(g.scoring == 0.0);
}
