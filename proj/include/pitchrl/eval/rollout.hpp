#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "pitchrl/env/world.hpp"
#include "pitchrl/eval/policies.hpp"
#include "pitchrl/pipeline/config.hpp"
#include "pitchrl/pipeline/keyposes.hpp"

namespace pitchrl {

struct EpisodeSummary {
  int steps = 0;
  int goal_for = -1;             // scoring player index, -1 for none
  std::string end_reason;
  bool scorer_fallen = false;    // scorer's fallen flag at the goal step
  double first_touch_time = -1;  // agent's first ball contact, seconds
  double reward_sum = 0.0;       // player-0 scaled reward
};

// Runs one episode on an already-reset env. `on_step` (optional) sees the
// env after every step together with the actions and step result.
inline EpisodeSummary run_episode(
    Env& env, ActingPolicy& p0, ActingPolicy& p1, Rng& rng, int max_steps,
    const std::function<void(const Env&, const Vec&, const Vec&,
                             const EnvStepResult&)>& on_step = nullptr) {
  EpisodeSummary s;
  p0.episode_reset();
  p1.episode_reset();
  while (!env.done() && s.steps < max_steps) {
    const Vec o0 = env.policy_obs(0);
    const Vec o1 = env.policy_obs(1);
    const Vec a0 = p0.act(o0, rng);
    const Vec a1 = p1.act(o1, rng);
    const EnvStepResult res = env.step(a0, a1, rng);
    s.steps += 1;
    s.reward_sum += res.reward[0];
    if (res.ball_contact[0] && s.first_touch_time < 0.0)
      s.first_touch_time =
          static_cast<double>(s.steps) * env.params().control_dt;
    if (on_step) on_step(env, a0, a1, res);
    if (res.term.done) {
      s.end_reason = res.term.reason;
      s.goal_for = res.term.goal_for;
      if (s.goal_for >= 0) s.scorer_fallen = res.record.fallen[s.goal_for];
      break;
    }
  }
  if (s.end_reason.empty()) s.end_reason = "limit";
  return s;
}

inline RandomizationConfig disabled_randomization() {
  RandomizationConfig r;
  r.enabled = false;
  r.perturbation.enabled = false;
  return r;
}

// Get-up success: |tilt| <= hold_tilt held for hold_seconds, reached within
// reach_seconds, policy conditioned on the final (upright) key pose.
struct GetupEvalResult {
  double success_rate = 0.0;
  double mean_time = 0.0;  // over successes
  int successes = 0;
  int episodes = 0;
};

inline GetupEvalResult eval_getup_success(const GaussianPolicy& policy,
                                          const EnvParams& env_params, int episodes,
                                          std::uint64_t seed,
                                          double reach_seconds = 5.0,
                                          double hold_seconds = 1.0,
                                          double hold_tilt = 0.25) {
  GetupEvalResult out;
  out.episodes = episodes;
  const KeyPoseTrack track = KeyPoseTrack::standard();
  NetworkPolicy actor(&policy, /*stochastic=*/false);
  for (int ep = 0; ep < episodes; ++ep) {
    Env env(env_params, disabled_randomization(), Stage::GetupTeacher);
    Rng rng = Rng::derive(seed, 100, static_cast<std::uint64_t>(ep));
    env.reset(rng);
    env.set_target_pose(track.final_pose());
    Rng r2 = Rng::derive(seed, 101, static_cast<std::uint64_t>(ep));
    env.override_state([](WorldState&) {}, r2);  // restack with the pose set

    const int total_steps =
        static_cast<int>((reach_seconds + hold_seconds) / env_params.control_dt) + 2;
    const int hold_steps = static_cast<int>(hold_seconds / env_params.control_dt);
    double reach_time = -1.0;
    int held = 0;
    Vec zero(kActionDim, 0.0);
    ZeroPolicy opp;
    Rng act_rng = Rng::derive(seed, 102, static_cast<std::uint64_t>(ep));
    for (int t = 0; t < total_steps && !env.done(); ++t) {
      const Vec a0 = actor.act(env.policy_obs(0), act_rng);
      env.step(a0, zero, act_rng);
      const double tilt = env.world().players[0].tilt;
      if (std::fabs(tilt) <= hold_tilt) {
        if (held == 0)
          reach_time = static_cast<double>(t) * env_params.control_dt;
        held += 1;
        if (held >= hold_steps) break;
      } else {
        held = 0;
        reach_time = -1.0;
      }
    }
    const bool ok = held >= hold_steps && reach_time >= 0.0 &&
                    reach_time <= reach_seconds;
    if (ok) {
      out.successes += 1;
      out.mean_time += reach_time;
    }
  }
  if (out.successes > 0) out.mean_time /= out.successes;
  out.success_rate = static_cast<double>(out.successes) / episodes;
  return out;
}

// Scoring rate against the untrained (fallen, zero-action) opponent in the
// stage-1 soccer setting: fraction of episodes ending in an agent goal.
struct ScoringEvalResult {
  double scoring_rate = 0.0;
  int goals = 0;
  int episodes = 0;
  double mean_goal_time = 0.0;
};

inline ScoringEvalResult eval_scoring_rate(const GaussianPolicy& policy,
                                           const EnvParams& env_params, int episodes,
                                           std::uint64_t seed) {
  ScoringEvalResult out;
  out.episodes = episodes;
  NetworkPolicy actor(&policy, /*stochastic=*/false);
  ZeroPolicy opponent;
  for (int ep = 0; ep < episodes; ++ep) {
    Env env(env_params, disabled_randomization(), Stage::SoccerTeacher);
    Rng rng = Rng::derive(seed, 200, static_cast<std::uint64_t>(ep));
    env.reset(rng, 0, /*opponent_init_fallen=*/true);
    const EpisodeSummary s =
        run_episode(env, actor, opponent, rng, env_params.episode_cap_steps);
    if (s.goal_for == 0) {
      out.goals += 1;
      out.mean_goal_time += static_cast<double>(s.steps) * env_params.control_dt;
    }
  }
  if (out.goals > 0) out.mean_goal_time /= out.goals;
  out.scoring_rate = static_cast<double>(out.goals) / episodes;
  return out;
}

}  // namespace pitchrl
