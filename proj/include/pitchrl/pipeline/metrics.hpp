#pragma once

#include <fstream>
#include <string>

#include <json.hpp>

#include "pitchrl/env/types.hpp"

namespace pitchrl {

// Sliding accumulators for one logging interval.
struct MetricsWindow {
  long long updates = 0;
  double critic_loss = 0.0;
  double policy_nll = 0.0;
  double kl_mean = 0.0;
  double kl_cov = 0.0;
  double kl_teacher_f = 0.0;
  double kl_teacher_g = 0.0;
  double eq_mean = 0.0;
  long long skipped = 0;

  long long episodes = 0;
  double episode_len = 0.0;
  long long goals_for = 0;
  long long goals_against = 0;
  RewardComponents comp_sums;
  long long comp_steps = 0;

  void add_components(const RewardComponents& c) {
    comp_sums.scoring += c.scoring;
    comp_sums.conceding += c.conceding;
    comp_sums.vel_to_ball += c.vel_to_ball;
    comp_sums.velocity += c.velocity;
    comp_sums.interference += c.interference;
    comp_sums.termination += c.termination;
    comp_sums.upright += c.upright;
    comp_sums.joint_torque += c.joint_torque;
    comp_sums.target_pose += c.target_pose;
    comp_sums.weighted_scaled_sum += c.weighted_scaled_sum;
    comp_steps += 1;
  }

  void clear() { *this = MetricsWindow{}; }
};

// JSONL metrics stream: one object per logging interval.
class MetricsWriter {
 public:
  MetricsWriter() = default;
  explicit MetricsWriter(const std::string& path) { open(path); }

  void open(const std::string& path) {
    out_.open(path, std::ios::app);
    if (!out_) throw ConfigError("metrics: cannot open " + path);
  }

  bool is_open() const { return out_.is_open(); }

  void write(long long learner_step, long long env_steps, const MetricsWindow& w,
             double eta, double alpha_mean, double alpha_cov, double lambda_f,
             double lambda_g, double wall_seconds) {
    if (!out_.is_open()) return;
    nlohmann::json j;
    j["learner_step"] = learner_step;
    j["env_steps"] = env_steps;
    const double inv_u = w.updates > 0 ? 1.0 / static_cast<double>(w.updates) : 0.0;
    j["critic_loss"] = w.critic_loss * inv_u;
    j["policy_nll"] = w.policy_nll * inv_u;
    j["kl_mean"] = w.kl_mean * inv_u;
    j["kl_cov"] = w.kl_cov * inv_u;
    j["kl_teacher_f"] = w.kl_teacher_f * inv_u;
    j["kl_teacher_g"] = w.kl_teacher_g * inv_u;
    j["expected_q"] = w.eq_mean * inv_u;
    j["eta"] = eta;
    j["alpha_mean"] = alpha_mean;
    j["alpha_cov"] = alpha_cov;
    j["lambda_f"] = lambda_f;
    j["lambda_g"] = lambda_g;
    j["skipped_updates"] = w.skipped;
    j["episodes"] = w.episodes;
    j["episode_len_mean"] =
        w.episodes > 0 ? w.episode_len / static_cast<double>(w.episodes) : 0.0;
    j["goals_for"] = w.goals_for;
    j["goals_against"] = w.goals_against;
    const double inv_s = w.comp_steps > 0 ? 1.0 / static_cast<double>(w.comp_steps) : 0.0;
    j["reward_components"] = {
        {"scoring", w.comp_sums.scoring * inv_s},
        {"conceding", w.comp_sums.conceding * inv_s},
        {"vel_to_ball", w.comp_sums.vel_to_ball * inv_s},
        {"velocity", w.comp_sums.velocity * inv_s},
        {"interference", w.comp_sums.interference * inv_s},
        {"termination", w.comp_sums.termination * inv_s},
        {"upright", w.comp_sums.upright * inv_s},
        {"joint_torque", w.comp_sums.joint_torque * inv_s},
        {"target_pose", w.comp_sums.target_pose * inv_s},
        {"reward", w.comp_sums.weighted_scaled_sum * inv_s}};
    j["wall_seconds"] = wall_seconds;
    out_ << j.dump() << "\n";
    out_.flush();
  }

 private:
  std::ofstream out_;
};

}  // namespace pitchrl
