#pragma once

#include <functional>
#include <sstream>
#include <string>

#include "pitchrl/domainrand/randomization.hpp"
#include "pitchrl/env/dynamics.hpp"
#include "pitchrl/env/observation.hpp"
#include "pitchrl/env/rewards.hpp"
#include "pitchrl/env/types.hpp"

namespace pitchrl {

struct WorldState {
  std::array<PlayerState, 2> players;
  BallState ball;
  long time_step = 0;
  Stage stage = Stage::Eval;
  TargetPose target_pose;
  int opponent_id = 0;
};

struct TerminationRecord {
  bool done = false;
  bool terminal = false;  // false for time-limit caps (bootstrapped)
  int goal_for = -1;      // scoring player index, -1 if none
  std::string reason;
};

struct EnvStepResult {
  std::array<RewardComponents, 2> components;
  std::array<double, 2> reward{};
  std::array<bool, 2> ball_contact{};
  std::array<bool, 2> kicked{};
  GoalBoundsRecord record;
  TerminationRecord term;
};

// One deterministic planar soccer world: two differential-drive players with
// a tilt pendulum each, a ball, per-episode domain randomization, and the
// stage-dependent reward and termination rules.
class Env {
 public:
  Env(EnvParams cfg, RandomizationConfig rcfg, Stage stage)
      : cfg_(cfg), rcfg_(rcfg), stage_(stage), weights_(RewardWeights::for_stage(stage)) {}

  void set_weights(const RewardWeights& w) { weights_ = w; }
  const RewardWeights& weights() const { return weights_; }
  const EnvParams& params() const { return cfg_; }
  Stage stage() const { return stage_; }
  const WorldState& world() const { return world_; }
  const EpisodeRandomization& randomization() const { return rand_; }

  void reset(Rng& rng, int opponent_id = 0, bool opponent_init_fallen = false) {
    done_ = false;
    rand_ = sample_episode_randomization(rcfg_, rng, cfg_.control_dt);
    perturb_.reset(rcfg_.perturbation, rng, rcfg_.enabled);
    world_ = WorldState{};
    world_.stage = stage_;
    world_.opponent_id = opponent_id;
    world_.players[0].attack_sign = 1.0;
    world_.players[1].attack_sign = -1.0;

    if (stage_ == Stage::GetupTeacher) {
      PlayerState& me = world_.players[0];
      me.pos = {0.0, 0.0};
      me.heading = rng.uniform(-3.141592653589793, 3.141592653589793);
      me.tilt = rng.bernoulli(0.5) ? 1.5707963267948966 : -1.5707963267948966;
      for (double& q : me.joints) q = rng.uniform(-0.5, 0.5);
      me.filter = me.joints;
      PlayerState& opp = world_.players[1];
      opp.pos = {-2.2, -1.6};
      opp.tilt = 1.5707963267948966;
      world_.ball.pos = {2.0, 1.5};
      world_.target_pose = TargetPose{};  // upright default until the trainer sets one
    } else {
      auto sample_pos = [&](double margin) {
        return Vec2{rng.uniform(-cfg_.pitch.half_length + margin,
                                cfg_.pitch.half_length - margin),
                    rng.uniform(-cfg_.pitch.half_width + margin,
                                cfg_.pitch.half_width - margin)};
      };
      for (int i = 0; i < 2; ++i) {
        PlayerState& p = world_.players[i];
        for (int tries = 0; tries < 100; ++tries) {
          p.pos = sample_pos(0.2);
          const bool in_pen = cfg_.pitch.in_penalty_area(p.pos, -p.attack_sign) ||
                              cfg_.pitch.in_penalty_area(p.pos, p.attack_sign);
          const bool clash =
              i == 1 && (p.pos - world_.players[0].pos).norm() < 0.5;
          if (!in_pen && !clash) break;
        }
        p.heading = rng.uniform(-3.141592653589793, 3.141592653589793);
      }
      for (int tries = 0; tries < 100; ++tries) {
        world_.ball.pos = sample_pos(0.1);
        if ((world_.ball.pos - world_.players[0].pos).norm() > 0.3 &&
            (world_.ball.pos - world_.players[1].pos).norm() > 0.3)
          break;
      }
      if (stage_ == Stage::OneVOne) {
        const double u = rng.uniform();
        world_.players[0].tilt =
            u < 1.0 / 3.0 ? 1.5707963267948966
                          : (u < 2.0 / 3.0 ? -1.5707963267948966 : 0.0);
      }
      if (opponent_init_fallen)
        world_.players[1].tilt =
            rng.bernoulli(0.5) ? 1.5707963267948966 : -1.5707963267948966;
    }

    builders_[0].reset(cfg_, stage_ == Stage::GetupTeacher);
    builders_[1].reset(cfg_, stage_ == Stage::GetupTeacher);
    builders_[0].push(world_, 0, rand_, rng, cfg_);
    builders_[1].push(world_, 1, rand_, rng, cfg_);
  }

  // Applies a placement override (set pieces, measurements) and rebuilds the
  // observation stacks from the new state.
  void override_state(const std::function<void(WorldState&)>& fn, Rng& rng) {
    fn(world_);
    builders_[0].reset(cfg_, stage_ == Stage::GetupTeacher);
    builders_[1].reset(cfg_, stage_ == Stage::GetupTeacher);
    builders_[0].push(world_, 0, rand_, rng, cfg_);
    builders_[1].push(world_, 1, rand_, rng, cfg_);
  }

  void set_target_pose(const TargetPose& pose) { world_.target_pose = pose; }

  EnvStepResult step(const Vec& action_p0, const Vec& action_p1, Rng& rng) {
    if (done_) throw NumericError("Env::step called on a terminated episode");
    EnvStepResult res;
    const double dt = cfg_.substep_dt();
    const double t_episode = static_cast<double>(world_.time_step) * cfg_.control_dt;

    const std::array<const Vec*, 2> actions{&action_p0, &action_p1};
    std::array<Vec2, 2> pos_before{world_.players[0].pos, world_.players[1].pos};
    std::array<std::array<double, 2>, 2> torque_excess{};

    for (int i = 0; i < 2; ++i) {
      std::array<double, kActionDim> a{};
      for (int k = 0; k < kActionDim; ++k)
        a[k] = k < static_cast<int>(actions[i]->size()) ? (*actions[i])[k] : 0.0;
      world_.players[i].filter = apply_action_filter(world_.players[i].filter, a,
                                                     cfg_.filter_keep, cfg_.filter_mix);
    }

    const auto impulse = perturb_.at(t_episode, rng);
    std::array<double, 2> speed_cmd{};

    for (int sub = 0; sub < cfg_.substeps; ++sub) {
      for (int i = 0; i < 2; ++i) {
        PlayerState& pl = world_.players[i];
        const JointStepResult js =
            step_joints(pl.joints, pl.filter, dt, cfg_.joints);
        pl.joints = js.q;
        torque_excess[i][0] += std::max(
            0.0, js.torque_proxy[kJointDriveLeft] - cfg_.joints.torque_threshold);
        torque_excess[i][1] += std::max(
            0.0, js.torque_proxy[kJointDriveRight] - cfg_.joints.torque_threshold);

        double tilt_perturb = 0.0;
        if (i == 0 && impulse) {
          tilt_perturb = impulse->dtilt_rate;
          pl.lin_vel += impulse->dv_rate * dt;
        }
        step_tilt(pl.tilt, pl.tilt_vel, pl.joints[kJointTorso], dt, rand_.mass,
                  tilt_perturb, cfg_.tilt);

        const BodyStepResult bs = step_body(pl, dt, rand_.friction, rand_.mass,
                                            cfg_.body, cfg_.tilt.stab_zone,
                                            cfg_.fallen_tilt);
        speed_cmd[i] = bs.speed_cmd;
        // apron clamp: nothing blocks players, but state stays bounded
        const double ax = cfg_.pitch.half_length + cfg_.pitch.apron;
        const double ay = cfg_.pitch.half_width + cfg_.pitch.apron;
        if (std::fabs(pl.pos.x) > ax) {
          pl.pos.x = clamp(pl.pos.x, -ax, ax);
          pl.lin_vel.x = 0.0;
        }
        if (std::fabs(pl.pos.y) > ay) {
          pl.pos.y = clamp(pl.pos.y, -ay, ay);
          pl.lin_vel.y = 0.0;
        }

        const KickResult kr = resolve_kick(
            pl, std::fabs(js.rate[kJointKick]), world_.ball, cfg_.body, cfg_.kick,
            cfg_.ball.radius, cfg_.tilt.stab_zone, cfg_.fallen_tilt);
        res.ball_contact[i] = res.ball_contact[i] || kr.contact;
        res.kicked[i] = res.kicked[i] || kr.kicked;
      }
      step_ball(world_.ball, dt, rand_.friction, cfg_.pitch, cfg_.ball);
    }

    // commanded-acceleration tilt disturbance, once per control step
    for (int i = 0; i < 2; ++i) {
      PlayerState& pl = world_.players[i];
      pl.tilt_vel += cfg_.body.accel_tilt_gain * (speed_cmd[i] - pl.prev_speed_cmd);
      pl.prev_speed_cmd = speed_cmd[i];
    }

    world_.time_step += 1;
    res.record = detect_goal_and_bounds(world_, cfg_);

    for (int i = 0; i < 2; ++i) {
      RewardInputs in;
      in.pos_before = pos_before[i];
      in.drive_torque_excess = {torque_excess[i][0] / cfg_.substeps,
                                torque_excess[i][1] / cfg_.substeps};
      in.record = res.record;
      res.components[i] =
          compute_reward_components(world_, i, stage_, weights_, in, cfg_);
      res.reward[i] = res.components[i].weighted_scaled_sum;
    }

    res.term = termination(res.record);
    done_ = res.term.done;

    builders_[0].push(world_, 0, rand_, rng, cfg_);
    builders_[1].push(world_, 1, rand_, rng, cfg_);
    return res;
  }

  Vec policy_obs(int player) const { return builders_[player].policy_obs(); }
  Vec critic_obs(int player) const {
    return builders_[player].critic_obs(world_.opponent_id, cfg_.onehot_slots);
  }
  const ObservationBuilder& builder(int player) const { return builders_[player]; }

  bool done() const { return done_; }

  static std::string trajectory_csv_header() {
    std::ostringstream os;
    os << "time";
    for (int i = 0; i < 2; ++i) {
      const std::string p = "p" + std::to_string(i) + "_";
      os << "," << p << "x," << p << "y," << p << "heading," << p << "vx," << p
         << "vy," << p << "tilt," << p << "tilt_vel," << p << "q_drive_left," << p
         << "q_drive_right," << p << "q_kick," << p << "q_torso," << p << "u0," << p
         << "u1," << p << "u2," << p << "u3";
    }
    os << ",ball_x,ball_y,ball_vx,ball_vy";
    for (int i = 0; i < 2; ++i)
      for (int k = 0; k < kActionDim; ++k)
        os << ",a" << i << "_" << k;
    os << ",r_scoring,r_conceding,r_vel_to_ball,r_velocity,r_interference,"
          "r_termination,r_upright,r_joint_torque,r_target_pose,reward";
    return os.str();
  }

  std::string trajectory_csv_row(const Vec& a0, const Vec& a1,
                                 const RewardComponents& c) const {
    std::ostringstream os;
    os.precision(10);
    os << static_cast<double>(world_.time_step) * cfg_.control_dt;
    for (int i = 0; i < 2; ++i) {
      const PlayerState& p = world_.players[i];
      os << "," << p.pos.x << "," << p.pos.y << "," << p.heading << ","
         << p.lin_vel.x << "," << p.lin_vel.y << "," << p.tilt << "," << p.tilt_vel;
      for (double q : p.joints) os << "," << q;
      for (double u : p.filter) os << "," << u;
    }
    os << "," << world_.ball.pos.x << "," << world_.ball.pos.y << ","
       << world_.ball.vel.x << "," << world_.ball.vel.y;
    auto put_action = [&os](const Vec& a) {
      for (int k = 0; k < kActionDim; ++k)
        os << "," << (k < static_cast<int>(a.size()) ? a[k] : 0.0);
    };
    put_action(a0);
    put_action(a1);
    os << "," << c.scoring << "," << c.conceding << "," << c.vel_to_ball << ","
       << c.velocity << "," << c.interference << "," << c.termination << ","
       << c.upright << "," << c.joint_torque << "," << c.target_pose << ","
       << c.weighted_scaled_sum;
    return os.str();
  }

  // --- checkpoint support -------------------------------------------------
  Vec state_blob() const {
    Vec b;
    auto put_player = [&b](const PlayerState& p) {
      b.insert(b.end(), {p.pos.x, p.pos.y, p.heading, p.lin_vel.x, p.lin_vel.y,
                         p.tilt, p.tilt_vel, p.attack_sign, p.prev_kick_rate,
                         p.prev_speed_cmd});
      b.insert(b.end(), p.joints.begin(), p.joints.end());
      b.insert(b.end(), p.filter.begin(), p.filter.end());
    };
    put_player(world_.players[0]);
    put_player(world_.players[1]);
    b.insert(b.end(), {world_.ball.pos.x, world_.ball.pos.y, world_.ball.vel.x,
                       world_.ball.vel.y, static_cast<double>(world_.time_step),
                       static_cast<double>(world_.opponent_id),
                       done_ ? 1.0 : 0.0});
    b.insert(b.end(), world_.target_pose.q_target.begin(),
             world_.target_pose.q_target.end());
    b.insert(b.end(), {world_.target_pose.g_target.x, world_.target_pose.g_target.y});
    b.insert(b.end(), {rand_.friction, rand_.mass, rand_.gravity_rotation,
                       static_cast<double>(rand_.delay_steps), rand_.noise_sigma});
    b.insert(b.end(), rand_.joint_offsets.begin(), rand_.joint_offsets.end());
    b.insert(b.end(), {perturb_.enabled_ ? 1.0 : 0.0, perturb_.next_onset_,
                       perturb_.active_until_, perturb_.dv_rate_.x,
                       perturb_.dv_rate_.y, perturb_.dtilt_rate_});
    for (int i = 0; i < 2; ++i) {
      const Vec bb = builders_[i].state_blob();
      b.push_back(static_cast<double>(bb.size()));
      b.insert(b.end(), bb.begin(), bb.end());
    }
    return b;
  }

  void restore_blob(const Vec& b) {
    size_t at = 0;
    auto get_player = [&](PlayerState& p) {
      p.pos = {b[at], b[at + 1]};
      p.heading = b[at + 2];
      p.lin_vel = {b[at + 3], b[at + 4]};
      p.tilt = b[at + 5];
      p.tilt_vel = b[at + 6];
      p.attack_sign = b[at + 7];
      p.prev_kick_rate = b[at + 8];
      p.prev_speed_cmd = b[at + 9];
      at += 10;
      for (double& q : p.joints) q = b[at++];
      for (double& u : p.filter) u = b[at++];
    };
    get_player(world_.players[0]);
    get_player(world_.players[1]);
    world_.ball.pos = {b[at], b[at + 1]};
    world_.ball.vel = {b[at + 2], b[at + 3]};
    world_.time_step = static_cast<long>(b[at + 4]);
    world_.opponent_id = static_cast<int>(b[at + 5]);
    done_ = b[at + 6] != 0.0;
    at += 7;
    for (double& q : world_.target_pose.q_target) q = b[at++];
    world_.target_pose.g_target = {b[at], b[at + 1]};
    at += 2;
    rand_.friction = b[at];
    rand_.mass = b[at + 1];
    rand_.gravity_rotation = b[at + 2];
    rand_.delay_steps = static_cast<int>(b[at + 3]);
    rand_.noise_sigma = b[at + 4];
    at += 5;
    for (double& o : rand_.joint_offsets) o = b[at++];
    perturb_.cfg_ = rcfg_.perturbation;
    perturb_.enabled_ = b[at] != 0.0;
    perturb_.next_onset_ = b[at + 1];
    perturb_.active_until_ = b[at + 2];
    perturb_.dv_rate_ = {b[at + 3], b[at + 4]};
    perturb_.dtilt_rate_ = b[at + 5];
    at += 6;
    for (int i = 0; i < 2; ++i) {
      builders_[i].reset(cfg_, stage_ == Stage::GetupTeacher);
      const size_t n = static_cast<size_t>(b[at++]);
      Vec bb(b.begin() + at, b.begin() + at + n);
      builders_[i].restore_blob(bb);
      at += n;
    }
  }

 private:
  TerminationRecord termination(const GoalBoundsRecord& rec) const {
    TerminationRecord t;
    if (rec.goal_side != 0) {
      t.done = true;
      t.terminal = true;
      t.reason = "goal";
      t.goal_for = rec.goal_side == static_cast<int>(world_.players[0].attack_sign)
                       ? 0
                       : 1;
      return t;
    }
    if (stage_ == Stage::SoccerTeacher) {
      if (rec.fallen[0]) {
        t.done = t.terminal = true;
        t.reason = "fallen";
        return t;
      }
      if (rec.out[0]) {
        t.done = t.terminal = true;
        t.reason = "out";
        return t;
      }
      if (rec.in_penalty[0]) {
        t.done = t.terminal = true;
        t.reason = "penalty_area";
        return t;
      }
    }
    const long cap = stage_ == Stage::GetupTeacher
                         ? cfg_.getup_episode_steps
                         : cfg_.episode_cap_steps;
    if (world_.time_step >= cap) {
      t.done = true;
      t.terminal = false;
      t.reason = "cap";
    }
    return t;
  }

  EnvParams cfg_;
  RandomizationConfig rcfg_;
  Stage stage_;
  RewardWeights weights_;
  WorldState world_;
  EpisodeRandomization rand_;
  PerturbationSchedule perturb_;
  std::array<ObservationBuilder, 2> builders_;
  bool done_ = true;
};

}  // namespace pitchrl
