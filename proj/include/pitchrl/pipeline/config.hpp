#pragma once

#include <fstream>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "pitchrl/dmpo/learner.hpp"
#include "pitchrl/domainrand/randomization.hpp"
#include "pitchrl/env/types.hpp"
#include "pitchrl/pipeline/distill.hpp"

namespace pitchrl {

struct SelfplayConfig {
  long long snapshot_interval = 2000;  // learner steps between pool snapshots
  int pool_max = 64;                   // one-hot width bound
};

struct TrainingConfig {
  long long budget_env_steps = 1000000;
  int env_steps_per_update = 8;
  long long min_replay = 5000;
  long long log_interval = 100;          // learner steps per metrics row
  long long checkpoint_interval = 5000;  // learner steps per checkpoint
  long long eval_interval = 0;           // 0: only at the end
  int eval_episodes = 50;
  double eval_success_target = -1.0;     // early stop when reached (if >= 0)
  bool include_replay_in_checkpoint = false;
};

struct DmpoHyper {
  DmpoConfig core;
  int segment_length = 48;
  long long replay_capacity = 1000000;
  std::vector<int> policy_layers = {256, 256, 128};
  std::vector<int> critic_layers = {400, 400, 400, 300};
  double min_variance = 0.001;
  double init_variance = 0.25;
  double epsilon = 0.1;
  double beta_mean = 0.0025;
  double beta_cov = 1e-6;
  double lr_dual = 1e-2;
};

struct ExperimentConfig {
  std::uint64_t seed = 1;
  bool deterministic = true;
  int workers = 1;
  int threads = 2;
  Stage stage = Stage::OneVOne;
  EnvParams env;
  RandomizationConfig randomization;
  DmpoHyper dmpo;
  DistillConfig distill;
  SelfplayConfig selfplay;
  TrainingConfig training;

  DualState make_dual() const {
    DualState d;
    d.epsilon = dmpo.epsilon;
    d.beta_mean = dmpo.beta_mean;
    d.beta_cov = dmpo.beta_cov;
    d.lr = dmpo.lr_dual;
    return d;
  }
};

namespace config_detail {

using nlohmann::json;

// Strict reader: every key must be consumed; leftovers are schema errors
// reported with their full field path.
class Reader {
 public:
  Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(path_ + ": expected an object");
  }

  ~Reader() noexcept(false) {
    if (std::uncaught_exceptions() > 0) return;
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!seen_.count(it.key()))
        throw ConfigError(path_ + "." + it.key() + ": unknown key");
  }

  bool has(const std::string& key) {
    if (j_.contains(key)) {
      seen_.insert(key);
      return true;
    }
    return false;
  }

  template <class T>
  void get(const std::string& key, T& out) {
    if (!has(key)) return;
    try {
      out = j_.at(key).get<T>();
    } catch (const json::exception&) {
      throw ConfigError(path_ + "." + key + ": wrong type");
    }
  }

  void get_positive(const std::string& key, double& out) {
    get(key, out);
    if (out <= 0.0) throw ConfigError(path_ + "." + key + ": must be positive");
  }
  void get_positive(const std::string& key, int& out) {
    get(key, out);
    if (out <= 0) throw ConfigError(path_ + "." + key + ": must be positive");
  }
  void get_positive(const std::string& key, long long& out) {
    get(key, out);
    if (out <= 0) throw ConfigError(path_ + "." + key + ": must be positive");
  }

  const json* object(const std::string& key) {
    if (!has(key)) return nullptr;
    return &j_.at(key);
  }

  std::string path() const { return path_; }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

inline void parse_env(const json& j, const std::string& path, EnvParams& e) {
  Reader r(j, path);
  if (const json* p = r.object("pitch")) {
    Reader rp(*p, path + ".pitch");
    rp.get_positive("half_length", e.pitch.half_length);
    rp.get_positive("half_width", e.pitch.half_width);
    rp.get_positive("goal_half_mouth", e.pitch.goal_half_mouth);
    rp.get_positive("penalty_depth", e.pitch.penalty_depth);
    rp.get_positive("penalty_half_width", e.pitch.penalty_half_width);
    rp.get_positive("wall_restitution", e.pitch.wall_restitution);
    if (e.pitch.goal_half_mouth > e.pitch.half_width)
      throw ConfigError(path + ".pitch.goal_half_mouth: exceeds the pitch width");
    if (e.pitch.penalty_half_width > e.pitch.half_width ||
        e.pitch.penalty_depth > e.pitch.half_length)
      throw ConfigError(path + ".pitch: penalty area exceeds the pitch");
  }
  if (const json* p = r.object("tilt")) {
    Reader rt(*p, path + ".tilt");
    rt.get_positive("gravity", e.tilt.gravity);
    rt.get_positive("damping", e.tilt.damping);
    rt.get_positive("authority", e.tilt.authority);
    rt.get_positive("stab_gain", e.tilt.stab_gain);
    rt.get_positive("stab_zone", e.tilt.stab_zone);
    rt.get("ground_restitution", e.tilt.ground_restitution);
  }
  if (const json* p = r.object("body")) {
    Reader rb(*p, path + ".body");
    rb.get_positive("max_speed", e.body.max_speed);
    rb.get_positive("max_turn", e.body.max_turn);
    rb.get_positive("relax_tau", e.body.relax_tau);
    rb.get("accel_tilt_gain", e.body.accel_tilt_gain);
    rb.get_positive("crawl_effectiveness", e.body.crawl_effectiveness);
    rb.get_positive("radius", e.body.radius);
  }
  if (const json* p = r.object("ball")) {
    Reader rb(*p, path + ".ball");
    rb.get_positive("radius", e.ball.radius);
    rb.get_positive("decel", e.ball.decel);
  }
  if (const json* p = r.object("kick")) {
    Reader rk(*p, path + ".kick");
    rk.get_positive("range", e.kick.range);
    rk.get_positive("rate_threshold", e.kick.rate_threshold);
    rk.get_positive("speed_gain", e.kick.speed_gain);
  }
  if (const json* p = r.object("joints")) {
    Reader rj(*p, path + ".joints");
    rj.get_positive("rate_gain", e.joints.rate_gain);
    rj.get_positive("rate_limit", e.joints.rate_limit);
    rj.get_positive("torque_threshold", e.joints.torque_threshold);
  }
  r.get_positive("control_dt", e.control_dt);
  r.get_positive("substeps", e.substeps);
  r.get_positive("reward_scale", e.reward_scale);
  r.get_positive("episode_cap_steps", e.episode_cap_steps);
  r.get_positive("getup_episode_steps", e.getup_episode_steps);
  r.get_positive("fallen_tilt", e.fallen_tilt);
  r.get_positive("upright_tilt", e.upright_tilt);
}

inline void parse_randomization(const json& j, const std::string& path,
                                RandomizationConfig& c) {
  Reader r(j, path);
  r.get("enabled", c.enabled);
  r.get("friction_min", c.friction_min);
  r.get("friction_max", c.friction_max);
  r.get("joint_offset_range", c.joint_offset_range);
  r.get("gravity_rotation_range", c.gravity_rotation_range);
  r.get("mass_min", c.mass_min);
  r.get("mass_max", c.mass_max);
  r.get("delay_ms_min", c.delay_ms_min);
  r.get("delay_ms_max", c.delay_ms_max);
  r.get("obs_noise_sigma", c.obs_noise_sigma);
  if (const json* p = r.object("perturbation")) {
    Reader rp(*p, path + ".perturbation");
    rp.get("enabled", c.perturbation.enabled);
    rp.get("dv_min", c.perturbation.dv_min);
    rp.get("dv_max", c.perturbation.dv_max);
    rp.get("dtilt_min", c.perturbation.dtilt_min);
    rp.get("dtilt_max", c.perturbation.dtilt_max);
    rp.get("duration_min", c.perturbation.duration_min);
    rp.get("duration_max", c.perturbation.duration_max);
    rp.get("interval_min", c.perturbation.interval_min);
    rp.get("interval_max", c.perturbation.interval_max);
  }
  c.validate();
}

inline void parse_dmpo(const json& j, const std::string& path, DmpoHyper& d) {
  Reader r(j, path);
  r.get_positive("gamma", d.core.gamma);
  r.get_positive("atom_count", d.core.atom_count);
  r.get("support_min", d.core.support_min);
  r.get("support_max", d.core.support_max);
  if (d.core.support_max <= d.core.support_min)
    throw ConfigError(path + ".support_max: must exceed support_min");
  r.get_positive("n_step", d.core.n_step);
  r.get_positive("batch_segments", d.core.batch_segments);
  r.get_positive("offsets_per_segment", d.core.offsets_per_segment);
  r.get_positive("actions_per_state", d.core.actions_per_state);
  r.get_positive("lr_policy", d.core.lr_policy);
  r.get_positive("lr_critic", d.core.lr_critic);
  r.get_positive("target_period_actor", d.core.target_period_actor);
  r.get_positive("target_period_critic", d.core.target_period_critic);
  r.get_positive("segment_length", d.segment_length);
  r.get_positive("replay_capacity", d.replay_capacity);
  r.get("policy_layers", d.policy_layers);
  r.get("critic_layers", d.critic_layers);
  for (int w : d.policy_layers)
    if (w < 2) throw ConfigError(path + ".policy_layers: widths must be >= 2");
  for (int w : d.critic_layers)
    if (w < 2) throw ConfigError(path + ".critic_layers: widths must be >= 2");
  r.get_positive("min_variance", d.min_variance);
  r.get_positive("init_variance", d.init_variance);
  r.get_positive("epsilon", d.epsilon);
  r.get_positive("beta_mean", d.beta_mean);
  r.get_positive("beta_cov", d.beta_cov);
  r.get_positive("lr_dual", d.lr_dual);
  if (d.segment_length <= d.core.n_step)
    throw ConfigError(path + ".segment_length: must exceed n_step");
}

inline ExperimentConfig parse_config_json(const json& j) {
  ExperimentConfig c;
  Reader r(j, "config");
  if (r.has("seed")) {
    const auto& v = j.at("seed");
    if (!v.is_number_unsigned() && !v.is_number_integer())
      throw ConfigError("config.seed: wrong type");
    c.seed = v.get<std::uint64_t>();
  }
  r.get("deterministic", c.deterministic);
  r.get_positive("workers", c.workers);
  r.get_positive("threads", c.threads);
  if (r.has("stage")) c.stage = stage_from_name(j.at("stage").get<std::string>());
  if (const json* p = r.object("env")) parse_env(*p, "config.env", c.env);
  if (const json* p = r.object("randomization"))
    parse_randomization(*p, "config.randomization", c.randomization);
  if (const json* p = r.object("dmpo")) parse_dmpo(*p, "config.dmpo", c.dmpo);
  if (const json* p = r.object("distill")) {
    Reader rd(*p, "config.distill");
    rd.get("q_f", c.distill.q_f);
    rd.get("q_g", c.distill.q_g);
    rd.get_positive("lr", c.distill.lr);
    rd.get("lambda_init", c.distill.lambda_init);
    if (c.distill.lambda_init < 0.0 || c.distill.lambda_init > 1.0)
      throw ConfigError("config.distill.lambda_init: must lie in [0,1]");
  }
  if (const json* p = r.object("selfplay")) {
    Reader rs(*p, "config.selfplay");
    rs.get_positive("snapshot_interval", c.selfplay.snapshot_interval);
    rs.get_positive("pool_max", c.selfplay.pool_max);
    if (c.selfplay.pool_max > c.env.onehot_slots)
      throw ConfigError("config.selfplay.pool_max: exceeds the one-hot width");
  }
  if (const json* p = r.object("training")) {
    Reader rt(*p, "config.training");
    rt.get_positive("budget_env_steps", c.training.budget_env_steps);
    rt.get_positive("env_steps_per_update", c.training.env_steps_per_update);
    rt.get_positive("min_replay", c.training.min_replay);
    rt.get_positive("log_interval", c.training.log_interval);
    rt.get_positive("checkpoint_interval", c.training.checkpoint_interval);
    rt.get("eval_interval", c.training.eval_interval);
    rt.get_positive("eval_episodes", c.training.eval_episodes);
    rt.get("eval_success_target", c.training.eval_success_target);
    rt.get("include_replay_in_checkpoint", c.training.include_replay_in_checkpoint);
  }
  return c;
}

inline json config_to_json(const ExperimentConfig& c) {
  json j;
  j["seed"] = c.seed;
  j["deterministic"] = c.deterministic;
  j["workers"] = c.workers;
  j["threads"] = c.threads;
  j["stage"] = stage_name(c.stage);
  j["env"] = {
      {"pitch",
       {{"half_length", c.env.pitch.half_length},
        {"half_width", c.env.pitch.half_width},
        {"goal_half_mouth", c.env.pitch.goal_half_mouth},
        {"penalty_depth", c.env.pitch.penalty_depth},
        {"penalty_half_width", c.env.pitch.penalty_half_width},
        {"wall_restitution", c.env.pitch.wall_restitution}}},
      {"tilt",
       {{"gravity", c.env.tilt.gravity},
        {"damping", c.env.tilt.damping},
        {"authority", c.env.tilt.authority},
        {"stab_gain", c.env.tilt.stab_gain},
        {"stab_zone", c.env.tilt.stab_zone},
        {"ground_restitution", c.env.tilt.ground_restitution}}},
      {"body",
       {{"max_speed", c.env.body.max_speed},
        {"max_turn", c.env.body.max_turn},
        {"relax_tau", c.env.body.relax_tau},
        {"accel_tilt_gain", c.env.body.accel_tilt_gain},
        {"crawl_effectiveness", c.env.body.crawl_effectiveness},
        {"radius", c.env.body.radius}}},
      {"ball", {{"radius", c.env.ball.radius}, {"decel", c.env.ball.decel}}},
      {"kick",
       {{"range", c.env.kick.range},
        {"rate_threshold", c.env.kick.rate_threshold},
        {"speed_gain", c.env.kick.speed_gain}}},
      {"joints",
       {{"rate_gain", c.env.joints.rate_gain},
        {"rate_limit", c.env.joints.rate_limit},
        {"torque_threshold", c.env.joints.torque_threshold}}},
      {"control_dt", c.env.control_dt},
      {"substeps", c.env.substeps},
      {"reward_scale", c.env.reward_scale},
      {"episode_cap_steps", c.env.episode_cap_steps},
      {"getup_episode_steps", c.env.getup_episode_steps},
      {"fallen_tilt", c.env.fallen_tilt},
      {"upright_tilt", c.env.upright_tilt}};
  j["randomization"] = {
      {"enabled", c.randomization.enabled},
      {"friction_min", c.randomization.friction_min},
      {"friction_max", c.randomization.friction_max},
      {"joint_offset_range", c.randomization.joint_offset_range},
      {"gravity_rotation_range", c.randomization.gravity_rotation_range},
      {"mass_min", c.randomization.mass_min},
      {"mass_max", c.randomization.mass_max},
      {"delay_ms_min", c.randomization.delay_ms_min},
      {"delay_ms_max", c.randomization.delay_ms_max},
      {"obs_noise_sigma", c.randomization.obs_noise_sigma},
      {"perturbation",
       {{"enabled", c.randomization.perturbation.enabled},
        {"dv_min", c.randomization.perturbation.dv_min},
        {"dv_max", c.randomization.perturbation.dv_max},
        {"dtilt_min", c.randomization.perturbation.dtilt_min},
        {"dtilt_max", c.randomization.perturbation.dtilt_max},
        {"duration_min", c.randomization.perturbation.duration_min},
        {"duration_max", c.randomization.perturbation.duration_max},
        {"interval_min", c.randomization.perturbation.interval_min},
        {"interval_max", c.randomization.perturbation.interval_max}}}};
  j["dmpo"] = {{"gamma", c.dmpo.core.gamma},
               {"atom_count", c.dmpo.core.atom_count},
               {"support_min", c.dmpo.core.support_min},
               {"support_max", c.dmpo.core.support_max},
               {"n_step", c.dmpo.core.n_step},
               {"batch_segments", c.dmpo.core.batch_segments},
               {"offsets_per_segment", c.dmpo.core.offsets_per_segment},
               {"actions_per_state", c.dmpo.core.actions_per_state},
               {"lr_policy", c.dmpo.core.lr_policy},
               {"lr_critic", c.dmpo.core.lr_critic},
               {"target_period_actor", c.dmpo.core.target_period_actor},
               {"target_period_critic", c.dmpo.core.target_period_critic},
               {"segment_length", c.dmpo.segment_length},
               {"replay_capacity", c.dmpo.replay_capacity},
               {"policy_layers", c.dmpo.policy_layers},
               {"critic_layers", c.dmpo.critic_layers},
               {"min_variance", c.dmpo.min_variance},
               {"init_variance", c.dmpo.init_variance},
               {"epsilon", c.dmpo.epsilon},
               {"beta_mean", c.dmpo.beta_mean},
               {"beta_cov", c.dmpo.beta_cov},
               {"lr_dual", c.dmpo.lr_dual}};
  j["distill"] = {{"q_f", c.distill.q_f},
                  {"q_g", c.distill.q_g},
                  {"lr", c.distill.lr},
                  {"lambda_init", c.distill.lambda_init}};
  j["selfplay"] = {{"snapshot_interval", c.selfplay.snapshot_interval},
                   {"pool_max", c.selfplay.pool_max}};
  j["training"] = {
      {"budget_env_steps", c.training.budget_env_steps},
      {"env_steps_per_update", c.training.env_steps_per_update},
      {"min_replay", c.training.min_replay},
      {"log_interval", c.training.log_interval},
      {"checkpoint_interval", c.training.checkpoint_interval},
      {"eval_interval", c.training.eval_interval},
      {"eval_episodes", c.training.eval_episodes},
      {"eval_success_target", c.training.eval_success_target},
      {"include_replay_in_checkpoint", c.training.include_replay_in_checkpoint}};
  return j;
}

}  // namespace config_detail

inline ExperimentConfig parse_config_text(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config: invalid JSON: ") + e.what());
  }
  return config_detail::parse_config_json(j);
}

inline ExperimentConfig parse_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path);
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  return parse_config_text(text);
}

inline std::string effective_config_text(const ExperimentConfig& c) {
  return config_detail::config_to_json(c).dump(2);
}

}  // namespace pitchrl
