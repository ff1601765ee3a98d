#pragma once

#include <cmath>
#include <fstream>
#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

#include "pitchrl/eval/rollout.hpp"

namespace pitchrl {

// Scripted initial configuration with a success predicate (a goal within the
// time limit). The agent is player 0 and attacks the +x goal.
struct SetPieceSpec {
  std::string name;
  double time_limit_s = 6.0;
  std::function<void(WorldState&, int episode_idx)> place;

  static SetPieceSpec penalty_kick() {
    SetPieceSpec s;
    s.name = "penalty_kick";
    s.time_limit_s = 6.0;
    s.place = [](WorldState& w, int) {
      w.players[0].pos = {-1.5, 0.0};
      w.players[0].heading = 0.0;
      w.players[0].tilt = 0.0;
      w.players[1].pos = {1.5, 1.0};  // 1 m off its goal line and the sideline
      w.players[1].heading = 3.14159265358979323846;
      w.players[1].tilt = 0.0;
      w.ball.pos = {0.0, 0.0};
      w.ball.vel = {0.0, 0.0};
    };
    return s;
  }

  // Face-down starts cycling over a grid in the center of the agent's half.
  static SetPieceSpec getup_and_shoot() {
    SetPieceSpec s;
    s.name = "getup_and_shoot";
    s.time_limit_s = 10.0;
    s.place = [](WorldState& w, int episode) {
      static const double xs[2] = {-1.75, -1.25};
      static const double ys[5] = {-0.8, -0.4, 0.0, 0.4, 0.8};
      const int i = episode % 10;
      w.players[0].pos = {xs[i / 5], ys[i % 5]};
      w.players[0].heading = 0.0;
      w.players[0].tilt = 1.5707963267948966;  // face down
      w.players[1].pos = {1.5, 1.0};
      w.players[1].heading = 3.14159265358979323846;
      w.players[1].tilt = 0.0;
      w.ball.pos = {0.0, 0.0};
      w.ball.vel = {0.0, 0.0};
    };
    return s;
  }

  // Near the sideline, heading parallel to it, ball in the center: scoring
  // needs a turn, an approach, and a turn-and-kick.
  static SetPieceSpec turn_and_kick() {
    SetPieceSpec s;
    s.name = "turn_and_kick";
    s.time_limit_s = 10.0;
    s.place = [](WorldState& w, int) {
      w.players[0].pos = {0.0, -1.7};
      w.players[0].heading = 0.0;  // parallel with the sideline
      w.players[0].tilt = 0.0;
      w.players[1].pos = {1.5, 1.0};
      w.players[1].heading = 3.14159265358979323846;
      w.players[1].tilt = 0.0;
      w.ball.pos = {0.0, 0.0};
      w.ball.vel = {0.0, 0.0};
    };
    return s;
  }

  static SetPieceSpec by_name(const std::string& name) {
    if (name == "penalty_kick") return penalty_kick();
    if (name == "getup_and_shoot") return getup_and_shoot();
    if (name == "turn_and_kick") return turn_and_kick();
    throw ConfigError("unknown set piece: " + name);
  }
};

struct SetPieceEpisodeRecord {
  bool scored = false;
  double first_touch_time = -1.0;
  double end_time = 0.0;
  std::string end_reason;
};

struct SetPieceReport {
  std::string name;
  int episodes = 0;
  int goals = 0;
  double success_rate = 0.0;
  double touch_mean = -1.0;
  double touch_std = 0.0;  // unbiased
  std::vector<SetPieceEpisodeRecord> records;

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["set_piece"] = name;
    j["episodes"] = episodes;
    j["goals"] = goals;
    j["success_rate"] = success_rate;
    j["first_touch_mean"] = touch_mean;
    j["first_touch_std"] = touch_std;
    j["per_episode"] = nlohmann::json::array();
    for (const auto& r : records)
      j["per_episode"].push_back({{"scored", r.scored},
                                  {"first_touch_time", r.first_touch_time},
                                  {"end_time", r.end_time},
                                  {"end_reason", r.end_reason}});
    return j;
  }
};

// Runs a set piece n times with the policy mean; the opponent holds still.
// A trajectory CSV is appended per step when `traj_out` is given.
inline SetPieceReport run_set_piece(const SetPieceSpec& spec,
                                    const GaussianPolicy& policy,
                                    const EnvParams& env_params, int n,
                                    std::uint64_t seed,
                                    std::ostream* traj_out = nullptr) {
  SetPieceReport rep;
  rep.name = spec.name;
  rep.episodes = n;
  NetworkPolicy actor(&policy, /*stochastic=*/false);
  ZeroPolicy opponent;
  const int limit = static_cast<int>(spec.time_limit_s / env_params.control_dt);
  if (traj_out) *traj_out << "episode," << Env::trajectory_csv_header() << "\n";

  for (int ep = 0; ep < n; ++ep) {
    Env env(env_params, disabled_randomization(), Stage::Eval);
    Rng rng = Rng::derive(seed, 300, static_cast<std::uint64_t>(ep));
    env.reset(rng);
    Rng r2 = Rng::derive(seed, 301, static_cast<std::uint64_t>(ep));
    env.override_state([&spec, ep](WorldState& w) { spec.place(w, ep); }, r2);
    // placements must be legal
    if (!env_params.pitch.inside_pitch(env.world().players[0].pos) ||
        !env_params.pitch.inside_pitch(env.world().players[1].pos))
      throw ConfigError("set piece placement out of bounds: " + spec.name);

    const EpisodeSummary s = run_episode(
        env, actor, opponent, rng, limit,
        traj_out ? std::function<void(const Env&, const Vec&, const Vec&,
                                      const EnvStepResult&)>(
                       [&](const Env& e, const Vec& a0, const Vec& a1,
                           const EnvStepResult& res) {
                         *traj_out << ep << ","
                                   << e.trajectory_csv_row(a0, a1, res.components[0])
                                   << "\n";
                       })
                 : nullptr);
    SetPieceEpisodeRecord rec;
    rec.scored = s.goal_for == 0;
    rec.first_touch_time = s.first_touch_time;
    rec.end_time = static_cast<double>(s.steps) * env_params.control_dt;
    rec.end_reason = s.end_reason;
    if (rec.scored) rep.goals += 1;
    rep.records.push_back(rec);
  }
  rep.success_rate = static_cast<double>(rep.goals) / n;

  // first-touch statistics over episodes that touched the ball
  std::vector<double> touches;
  for (const auto& r : rep.records)
    if (r.first_touch_time >= 0.0) touches.push_back(r.first_touch_time);
  if (!touches.empty()) {
    double mean = 0.0;
    for (double t : touches) mean += t;
    mean /= static_cast<double>(touches.size());
    rep.touch_mean = mean;
    if (touches.size() > 1) {
      double ss = 0.0;
      for (double t : touches) ss += (t - mean) * (t - mean);
      rep.touch_std = std::sqrt(ss / static_cast<double>(touches.size() - 1));
    }
  }
  return rep;
}

}  // namespace pitchrl
