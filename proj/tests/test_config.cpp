#include <catch2/catch_amalgamated.hpp>

#include "pitchrl/pipeline/config.hpp"

using namespace pitchrl;

TEST_CASE("empty config yields the full defaults") {
  const ExperimentConfig c = parse_config_text("{}");
  REQUIRE(c.dmpo.core.gamma == 0.99);
  REQUIRE(c.dmpo.core.atom_count == 51);
  REQUIRE(c.dmpo.core.support_min == -150.0);
  REQUIRE(c.dmpo.core.support_max == 150.0);
  REQUIRE(c.dmpo.core.n_step == 5);
  REQUIRE(c.dmpo.core.batch_segments == 256);
  REQUIRE(c.dmpo.segment_length == 48);
  REQUIRE(c.dmpo.replay_capacity == 1000000);
  REQUIRE(c.dmpo.core.actions_per_state == 20);
  REQUIRE(c.dmpo.epsilon == 0.1);
  REQUIRE(c.dmpo.beta_mean == 0.0025);
  REQUIRE(c.dmpo.beta_cov == 1e-6);
  REQUIRE(c.dmpo.core.lr_policy == 1e-4);
  REQUIRE(c.dmpo.core.lr_critic == 1e-4);
  REQUIRE(c.dmpo.lr_dual == 1e-2);
  REQUIRE(c.dmpo.core.target_period_actor == 25);
  REQUIRE(c.dmpo.core.target_period_critic == 100);
  REQUIRE(c.dmpo.policy_layers == std::vector<int>{256, 256, 128});
  REQUIRE(c.dmpo.critic_layers == std::vector<int>{400, 400, 400, 300});
  REQUIRE(c.dmpo.min_variance == 0.001);
  // environment anchors
  REQUIRE(c.env.pitch.half_length == 2.5);
  REQUIRE(c.env.pitch.half_width == 2.0);
  REQUIRE(c.env.pitch.goal_half_mouth == 0.4);
  REQUIRE(c.env.control_dt == 0.025);
  REQUIRE(c.env.reward_scale == 0.1);
  REQUIRE(c.randomization.friction_min == 0.5);
  REQUIRE(c.randomization.friction_max == 1.0);
  REQUIRE(c.distill.q_f == 40.0);
  REQUIRE(c.distill.q_g == 20.0);
  REQUIRE(c.selfplay.snapshot_interval == 2000);
}

TEST_CASE("schema violations are rejected with field paths") {
  SECTION("unknown top-level key") {
    try {
      parse_config_text(R"({"nonsense": 1})");
      FAIL("expected rejection");
    } catch (const ConfigError& e) {
      REQUIRE(std::string(e.what()).find("nonsense") != std::string::npos);
    }
  }
  SECTION("unknown nested key") {
    try {
      parse_config_text(R"({"dmpo": {"gama": 0.98}})");
      FAIL("expected rejection");
    } catch (const ConfigError& e) {
      REQUIRE(std::string(e.what()).find("config.dmpo.gama") != std::string::npos);
    }
  }
  SECTION("inverted support") {
    try {
      parse_config_text(R"({"dmpo": {"support_min": 10.0, "support_max": -10.0}})");
      FAIL("expected rejection");
    } catch (const ConfigError& e) {
      REQUIRE(std::string(e.what()).find("support_max") != std::string::npos);
    }
  }
  SECTION("wrong type") {
    REQUIRE_THROWS_AS(parse_config_text(R"({"dmpo": {"gamma": "fast"}})"),
                      ConfigError);
  }
  SECTION("negative values on positive fields") {
    REQUIRE_THROWS_AS(parse_config_text(R"({"dmpo": {"gamma": -0.5}})"), ConfigError);
    REQUIRE_THROWS_AS(parse_config_text(R"({"training": {"budget_env_steps": 0}})"),
                      ConfigError);
  }
  SECTION("bad randomization ranges") {
    REQUIRE_THROWS_AS(
        parse_config_text(R"({"randomization": {"friction_min": 1.5}})"),
        ConfigError);
  }
  SECTION("invalid stage name") {
    REQUIRE_THROWS_AS(parse_config_text(R"({"stage": "warmup"})"), ConfigError);
  }
  SECTION("segment length must exceed n-step") {
    REQUIRE_THROWS_AS(parse_config_text(R"({"dmpo": {"segment_length": 3}})"),
                      ConfigError);
  }
}

TEST_CASE("overrides apply and the effective config round-trips") {
  const std::string text = R"({
    "seed": 99,
    "stage": "soccer_teacher",
    "dmpo": {"batch_segments": 32, "policy_layers": [64, 64]},
    "env": {"reward_scale": 0.2, "tilt": {"gravity": 8.5}},
    "randomization": {"enabled": false},
    "training": {"budget_env_steps": 12345}
  })";
  const ExperimentConfig c = parse_config_text(text);
  REQUIRE(c.seed == 99);
  REQUIRE(c.stage == Stage::SoccerTeacher);
  REQUIRE(c.dmpo.core.batch_segments == 32);
  REQUIRE(c.dmpo.policy_layers == std::vector<int>{64, 64});
  REQUIRE(c.env.reward_scale == 0.2);
  REQUIRE(c.env.tilt.gravity == 8.5);
  REQUIRE_FALSE(c.randomization.enabled);
  REQUIRE(c.training.budget_env_steps == 12345);
  // defaults survive alongside overrides
  REQUIRE(c.dmpo.core.gamma == 0.99);

  // echo and re-parse
  const ExperimentConfig c2 = parse_config_text(effective_config_text(c));
  REQUIRE(c2.seed == c.seed);
  REQUIRE(c2.dmpo.core.batch_segments == 32);
  REQUIRE(c2.env.tilt.gravity == 8.5);
  REQUIRE(c2.stage == Stage::SoccerTeacher);
}
