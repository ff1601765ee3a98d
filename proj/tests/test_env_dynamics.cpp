#include <catch2/catch_amalgamated.hpp>

#include "pitchrl/env/dynamics.hpp"
#include "pitchrl/eval/policies.hpp"

using namespace pitchrl;

TEST_CASE("action filter") {
  SECTION("mixes 0.8/0.2") {
    const auto u = apply_action_filter({0, 0, 0, 0}, {1, 1, 1, 1});
    for (double x : u) REQUIRE_THAT(x, Catch::Matchers::WithinAbs(0.2, 1e-15));
  }
  SECTION("fixed point") {
    const auto u = apply_action_filter({0.3, -0.4, 0.7, 0.1}, {0.3, -0.4, 0.7, 0.1});
    REQUIRE_THAT(u[0], Catch::Matchers::WithinAbs(0.3, 1e-15));
    REQUIRE_THAT(u[3], Catch::Matchers::WithinAbs(0.1, 1e-15));
  }
  SECTION("geometric approach: 1 - 0.8^k") {
    std::array<double, kActionDim> u{};
    for (int k = 0; k < 2; ++k) u = apply_action_filter(u, {1, 1, 1, 1});
    REQUIRE_THAT(u[0], Catch::Matchers::WithinAbs(1.0 - 0.64, 1e-12));
  }
  SECTION("input clipped to joint range") {
    const auto u = apply_action_filter({0, 0, 0, 0}, {5.0, -5.0, 0, 0});
    REQUIRE_THAT(u[0], Catch::Matchers::WithinAbs(0.2, 1e-15));
    REQUIRE_THAT(u[1], Catch::Matchers::WithinAbs(-0.2, 1e-15));
  }
}

TEST_CASE("joint step") {
  JointParams jp;
  SECTION("holds at the setpoint") {
    const auto r = step_joints({0.5, 0, 0, 0}, {0.5, 0, 0, 0}, 0.005, jp);
    REQUIRE(r.q[0] == 0.5);
    REQUIRE(r.torque_proxy[0] == 0.0);
  }
  SECTION("rate clamps at the limit") {
    const auto r = step_joints({0, 0, 0, 0}, {1, 0, 0, 0}, 0.005, jp);
    REQUIRE(r.rate[0] == 10.0);
    REQUIRE(r.torque_proxy[0] == 10.0);
  }
  SECTION("small error integrates linearly") {
    const auto r = step_joints({0, 0, 0, 0}, {0.1, 0, 0, 0}, 0.005, jp);
    REQUIRE_THAT(r.rate[0], Catch::Matchers::WithinAbs(2.0, 1e-12));
    REQUIRE_THAT(r.q[0], Catch::Matchers::WithinAbs(0.01, 1e-12));
  }
}

namespace {

struct TiltSim {
  TiltParams p;
  double tilt, vel = 0.0;
  double mass = 1.0;

  explicit TiltSim(double tilt0, double mass_factor = 1.0, TiltParams params = {})
      : p(params), tilt(tilt0), mass(mass_factor) {}

  void run(double seconds, const std::function<double(double, double)>& ctrl) {
    const int n = static_cast<int>(seconds / 0.005);
    for (int i = 0; i < n; ++i)
      step_tilt(tilt, vel, clamp(ctrl(tilt, vel), -1.0, 1.0), 0.005, mass, 0.0, p);
  }

  // first time |tilt| <= thresh held for 1 s, or -1
  double getup_time(double seconds, const std::function<double(double, double)>& ctrl,
                    double thresh = 0.25) {
    const int n = static_cast<int>(seconds / 0.005);
    double reach = -1.0, hold = 0.0;
    for (int i = 0; i < n; ++i) {
      step_tilt(tilt, vel, clamp(ctrl(tilt, vel), -1.0, 1.0), 0.005, mass, 0.0, p);
      if (std::fabs(tilt) <= thresh) {
        if (reach < 0.0) reach = i * 0.005;
        hold += 0.005;
        if (hold >= 1.0) return reach;
      } else {
        reach = -1.0;
        hold = 0.0;
      }
    }
    return -1.0;
  }
};

double constant_up(double tilt, double) { return tilt >= 0.0 ? -1.0 : 1.0; }

}  // namespace

TEST_CASE("tilt equilibria") {
  TiltParams p;
  SECTION("upright stays upright") {
    TiltSim s(0.0);
    s.run(5.0, [](double, double) { return 0.0; });
    REQUIRE(std::fabs(s.tilt) < 1e-9);
  }
  SECTION("ground stays on the ground with zero control") {
    TiltSim s(1.5707963267948966);
    s.run(5.0, [](double, double) { return 0.0; });
    REQUIRE_THAT(s.tilt, Catch::Matchers::WithinAbs(1.5707963267948966, 1e-9));
  }
  SECTION("no divergence over a long horizon") {
    TiltSim s(0.7);
    s.run(500.0, [](double, double) { return 0.0; });
    // converged to one of the equilibria
    const bool upright = std::fabs(s.tilt) < 0.05;
    const bool ground = std::fabs(std::fabs(s.tilt) - 1.5707963267948966) < 0.05;
    REQUIRE((upright || ground));
    REQUIRE(std::fabs(s.vel) < 0.1);
  }
}

TEST_CASE("swing-up separation") {
  TiltParams p;
  SECTION("constant torque stalls below the barrier, both sides") {
    for (double side : {1.0, -1.0}) {
      TiltSim s(side * 1.5707963267948966);
      REQUIRE(s.getup_time(20.0, constant_up) < 0.0);
      REQUIRE(std::fabs(s.tilt) > 1.0);  // parked in the fallen band
    }
  }
  SECTION("bang-bang pumping gets up from front and back") {
    for (double side : {1.0, -1.0}) {
      TiltSim s(side * 1.5707963267948966);
      const double t = s.getup_time(20.0, [&p](double tilt, double vel) {
        return pump_torso_command(tilt, vel, p);
      });
      REQUIRE(t >= 0.0);
      REQUIRE(t < 5.0);
    }
  }
  SECTION("separation holds across the mass randomization range") {
    for (double mf : {0.85, 1.0, 1.15}) {
      TiltSim c(1.5707963267948966, mf);
      REQUIRE(c.getup_time(20.0, constant_up) < 0.0);
      TiltSim s(1.5707963267948966, mf);
      TiltParams p2;
      REQUIRE(s.getup_time(20.0, [&p2](double tilt, double vel) {
        return pump_torso_command(tilt, vel, p2);
      }) >= 0.0);
    }
  }
}

TEST_CASE("body step") {
  BodyParams bp;
  SECTION("full drive reaches 0.8 m/s upright") {
    PlayerState pl;
    pl.joints = {1.0, 1.0, 0.0, 0.0};
    for (int i = 0; i < 2000; ++i)
      step_body(pl, 0.005, 1.0, 1.0, bp, 0.3, 1.0);
    REQUIRE_THAT(pl.lin_vel.norm(), Catch::Matchers::WithinAbs(0.8, 1e-3));
    REQUIRE_THAT(pl.heading, Catch::Matchers::WithinAbs(0.0, 1e-12));
  }
  SECTION("opposed drives turn at 1.5 rad/s") {
    PlayerState pl;
    pl.joints = {-0.5, 0.5, 0.0, 0.0};
    const double h0 = pl.heading;
    step_body(pl, 0.005, 1.0, 1.0, bp, 0.3, 1.0);
    REQUIRE_THAT((pl.heading - h0) / 0.005, Catch::Matchers::WithinAbs(1.5, 1e-9));
  }
  SECTION("fallen drive crawls at the crawl factor") {
    PlayerState up, down;
    up.joints = down.joints = {1.0, 1.0, 0.0, 0.0};
    down.tilt = 1.5707963267948966;
    for (int i = 0; i < 4000; ++i) {
      step_body(up, 0.005, 1.0, 1.0, bp, 0.3, 1.0);
      step_body(down, 0.005, 1.0, 1.0, bp, 0.3, 1.0);
    }
    REQUIRE_THAT(down.lin_vel.norm() / up.lin_vel.norm(),
                 Catch::Matchers::WithinAbs(0.15, 1e-3));
  }
}

TEST_CASE("ball step") {
  PitchGeom pitch;
  BallParams bp;
  SECTION("at rest stays at rest") {
    BallState b;
    b.pos = {1.0, 0.5};
    step_ball(b, 0.005, 1.0, pitch, bp);
    REQUIRE(b.pos.x == 1.0);
    REQUIRE(b.vel.norm() == 0.0);
  }
  SECTION("1 m/s stops after about 2.04 s and 1.02 m") {
    BallState b;
    b.vel = {1.0, 0.0};
    double t = 0.0;
    while (b.vel.norm() > 0.0 && t < 5.0) {
      step_ball(b, 0.005, 1.0, pitch, bp);
      t += 0.005;
    }
    REQUIRE_THAT(t, Catch::Matchers::WithinAbs(1.0 / (0.05 * 9.81), 0.02));
    REQUIRE_THAT(b.pos.x, Catch::Matchers::WithinAbs(1.0 / (2.0 * 0.05 * 9.81), 0.01));
  }
  SECTION("wall reflection with restitution 0.7") {
    BallState b;
    b.pos = {2.499, 1.0};
    b.vel = {1.0, 0.0};
    step_ball(b, 0.005, 1.0, pitch, bp);
    REQUIRE_THAT(b.vel.x, Catch::Matchers::WithinAbs(-0.7 * (1.0 - 0.05 * 9.81 * 0.005),
                                                     1e-9));
    REQUIRE(b.pos.x <= 2.5);
  }
  SECTION("passes through the goal mouth") {
    BallState b;
    b.pos = {2.499, 0.2};
    b.vel = {1.0, 0.0};
    step_ball(b, 0.005, 1.0, pitch, bp);
    REQUIRE(b.pos.x > 2.5);
    REQUIRE(b.vel.x > 0.0);
  }
}

TEST_CASE("kick resolution") {
  BodyParams body;
  KickParams kick;
  SECTION("ball out of range is untouched") {
    PlayerState pl;
    pl.prev_kick_rate = 0.0;
    BallState b;
    b.pos = {0.5, 0.0};
    resolve_kick(pl, 10.0, b, body, kick, 0.05, 0.3, 1.0);
    REQUIRE(b.vel.norm() == 0.0);
  }
  SECTION("standing kick at full rate gives 2.5 m/s") {
    PlayerState pl;
    BallState b;
    b.pos = {0.22, 0.0};
    resolve_kick(pl, 10.0, b, body, kick, 0.05, 0.3, 1.0);
    REQUIRE_THAT(b.vel.x, Catch::Matchers::WithinAbs(2.5, 1e-12));
    REQUIRE(b.vel.y == 0.0);
  }
  SECTION("run-up adds the forward speed") {
    PlayerState pl;
    pl.lin_vel = {0.8, 0.0};
    BallState b;
    b.pos = {0.22, 0.0};
    resolve_kick(pl, 10.0, b, body, kick, 0.05, 0.3, 1.0);
    REQUIRE_THAT(b.vel.x, Catch::Matchers::WithinAbs(3.3, 1e-12));
  }
  SECTION("kick only fires on the rising edge") {
    PlayerState pl;
    BallState b;
    b.pos = {0.22, 0.0};
    resolve_kick(pl, 10.0, b, body, kick, 0.05, 0.3, 1.0);
    b.vel = {0.0, 0.0};
    // still above threshold: no new kick
    resolve_kick(pl, 9.0, b, body, kick, 0.05, 0.3, 1.0);
    REQUIRE(b.vel.norm() == 0.0);
  }
  SECTION("overlap pushes the ball out with velocity matching") {
    PlayerState pl;
    pl.lin_vel = {0.5, 0.0};
    BallState b;
    b.pos = {0.1, 0.0};
    const auto r = resolve_kick(pl, 0.0, b, body, kick, 0.05, 0.3, 1.0);
    REQUIRE(r.contact);
    REQUIRE_THAT((b.pos - pl.pos).norm(), Catch::Matchers::WithinAbs(0.2, 1e-12));
    REQUIRE_THAT(b.vel.x, Catch::Matchers::WithinAbs(0.5, 1e-12));
  }
}

TEST_CASE("drive effectiveness profile") {
  BodyParams bp;
  REQUIRE(drive_effectiveness(0.0, bp, 0.3, 1.0) == 1.0);
  REQUIRE(drive_effectiveness(0.29, bp, 0.3, 1.0) == 1.0);
  REQUIRE_THAT(drive_effectiveness(0.65, bp, 0.3, 1.0),
               Catch::Matchers::WithinAbs(0.575, 1e-12));
  REQUIRE_THAT(drive_effectiveness(1.0, bp, 0.3, 1.0),
               Catch::Matchers::WithinAbs(0.15, 1e-12));
  REQUIRE_THAT(drive_effectiveness(1.5, bp, 0.3, 1.0),
               Catch::Matchers::WithinAbs(0.15, 1e-12));
}
