#include <catch2/catch_amalgamated.hpp>

#include "pitchrl/env/world.hpp"

using namespace pitchrl;

namespace {

RandomizationConfig off() {
  RandomizationConfig r;
  r.enabled = false;
  return r;
}

}  // namespace

TEST_CASE("reset placements") {
  EnvParams cfg;
  SECTION("1v1 initial tilt is one third each") {
    Env env(cfg, off(), Stage::OneVOne);
    Rng rng(21);
    int front = 0, back = 0, standing = 0;
    const int n = 10000;
    for (int i = 0; i < n; ++i) {
      env.reset(rng);
      const double t = env.world().players[0].tilt;
      if (t > 1.0) ++front;
      else if (t < -1.0) ++back;
      else ++standing;
    }
    const double sigma = std::sqrt(n * (1.0 / 3.0) * (2.0 / 3.0));
    for (int c : {front, back, standing})
      REQUIRE(std::fabs(c - n / 3.0) < 3.0 * sigma);
  }
  SECTION("positions always inside the pitch") {
    Env env(cfg, off(), Stage::OneVOne);
    Rng rng(22);
    for (int i = 0; i < 2000; ++i) {
      env.reset(rng);
      for (const auto& p : env.world().players) {
        REQUIRE(std::fabs(p.pos.x) <= cfg.pitch.half_length);
        REQUIRE(std::fabs(p.pos.y) <= cfg.pitch.half_width);
      }
      REQUIRE(cfg.pitch.inside_pitch(env.world().ball.pos));
    }
  }
  SECTION("get-up stage starts exactly on the ground") {
    Env env(cfg, off(), Stage::GetupTeacher);
    Rng rng(23);
    for (int i = 0; i < 100; ++i) {
      env.reset(rng);
      REQUIRE(std::fabs(std::fabs(env.world().players[0].tilt) -
                        1.5707963267948966) < 1e-12);
    }
  }
  SECTION("untrained opponent starts fallen when flagged") {
    Env env(cfg, off(), Stage::SoccerTeacher);
    Rng rng(24);
    env.reset(rng, 0, /*opponent_init_fallen=*/true);
    REQUIRE(std::fabs(env.world().players[1].tilt) > 1.5);
  }
}

TEST_CASE("episode flow") {
  EnvParams cfg;
  SECTION("1v1 with zero actions runs the full cap and ends as a tie") {
    Env env(cfg, off(), Stage::OneVOne);
    Rng rng(31);
    env.reset(rng);
    // force standing start so nothing happens
    Rng r2(32);
    env.override_state(
        [](WorldState& w) {
          w.players[0].tilt = 0.0;
          w.players[0].pos = {-1.0, 0.5};
          w.players[1].pos = {1.0, -0.5};
          w.ball.pos = {0.0, 0.0};
          w.ball.vel = {0.0, 0.0};
        },
        r2);
    Vec zero(kActionDim, 0.0);
    int steps = 0;
    EnvStepResult res;
    while (!env.done()) {
      res = env.step(zero, zero, rng);
      ++steps;
      REQUIRE(steps <= cfg.episode_cap_steps);
    }
    REQUIRE(steps == cfg.episode_cap_steps);
    REQUIRE(res.term.reason == "cap");
    REQUIRE_FALSE(res.term.terminal);
    REQUIRE(res.term.goal_for == -1);
  }

  SECTION("soccer teacher terminates on a forced fall") {
    Env env(cfg, off(), Stage::SoccerTeacher);
    Rng rng(33);
    env.reset(rng);
    Rng r2(34);
    env.override_state(
        [](WorldState& w) {
          w.players[0].tilt = 1.3;  // past the fallen threshold
          w.players[0].pos = {0.0, 0.0};
        },
        r2);
    Vec zero(kActionDim, 0.0);
    const auto res = env.step(zero, zero, rng);
    REQUIRE(res.term.done);
    REQUIRE(res.term.terminal);
    REQUIRE(res.term.reason == "fallen");
  }

  SECTION("a goal ends a 1v1 episode immediately") {
    Env env(cfg, off(), Stage::OneVOne);
    Rng rng(35);
    env.reset(rng);
    Rng r2(36);
    env.override_state(
        [](WorldState& w) {
          w.players[0].tilt = 0.0;
          w.players[0].pos = {-2.0, 1.5};
          w.players[1].pos = {-2.0, -1.5};
          w.ball.pos = {2.4, 0.0};
          w.ball.vel = {1.5, 0.0};
        },
        r2);
    Vec zero(kActionDim, 0.0);
    EnvStepResult res;
    int steps = 0;
    while (!env.done() && steps < 10) {
      res = env.step(zero, zero, rng);
      ++steps;
    }
    REQUIRE(res.term.done);
    REQUIRE(res.term.reason == "goal");
    REQUIRE(res.term.goal_for == 0);
    REQUIRE(res.components[0].scoring == 1.0);
    REQUIRE(res.components[1].conceding == -1.0);
    REQUIRE_THROWS(env.step(zero, zero, rng));
  }

  SECTION("ball containment: exits happen only through the mouths") {
    Env env(cfg, off(), Stage::OneVOne);
    Rng rng(37);
    for (int ep = 0; ep < 5; ++ep) {
      env.reset(rng);
      while (!env.done()) {
        Vec a0 = {rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1),
                  rng.uniform(-1, 1)};
        Vec a1 = {rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1),
                  rng.uniform(-1, 1)};
        const auto res = env.step(a0, a1, rng);
        const Vec2 bp = env.world().ball.pos;
        REQUIRE(std::fabs(bp.y) <= cfg.pitch.half_width + 1e-9);
        if (std::fabs(bp.x) > cfg.pitch.half_length + 1e-9) {
          REQUIRE(std::fabs(bp.y) <= cfg.pitch.goal_half_mouth);
          REQUIRE(res.term.reason == "goal");
        }
        if (env.world().time_step > 600) break;
      }
    }
  }

  SECTION("state blob round-trips bit-exactly") {
    Env env(cfg, RandomizationConfig{}, Stage::OneVOne);
    Rng rng(38);
    env.reset(rng);
    Vec a = {0.5, -0.5, 0.3, 0.9};
    for (int i = 0; i < 37; ++i) env.step(a, a, rng);
    const Vec blob = env.state_blob();

    Env env2(cfg, RandomizationConfig{}, Stage::OneVOne);
    Rng dummy(1);
    env2.reset(dummy);
    env2.restore_blob(blob);
    REQUIRE(env2.state_blob() == blob);
    // continued stepping matches
    Rng ra(39), rb(39);
    const auto s1 = env.step(a, a, ra);
    const auto s2 = env2.step(a, a, rb);
    REQUIRE(env.policy_obs(0) == env2.policy_obs(0));
    REQUIRE(s1.reward[0] == s2.reward[0]);
  }
}

TEST_CASE("trajectory csv") {
  EnvParams cfg;
  Env env(cfg, off(), Stage::Eval);
  Rng rng(41);
  env.reset(rng);
  const std::string header = Env::trajectory_csv_header();
  Vec a(kActionDim, 0.1);
  const auto res = env.step(a, a, rng);
  const std::string row = env.trajectory_csv_row(a, a, res.components[0]);
  const auto count_commas = [](const std::string& s) {
    return std::count(s.begin(), s.end(), ',');
  };
  REQUIRE(count_commas(header) == count_commas(row));
  REQUIRE(header.substr(0, 4) == "time");
}
