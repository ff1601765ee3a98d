#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <filesystem>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "pitchrl/dmpo/learner.hpp"
#include "pitchrl/env/world.hpp"
#include "pitchrl/eval/rollout.hpp"
#include "pitchrl/pipeline/checkpoint.hpp"
#include "pitchrl/pipeline/config.hpp"
#include "pitchrl/pipeline/distill.hpp"
#include "pitchrl/pipeline/keyposes.hpp"
#include "pitchrl/pipeline/metrics.hpp"
#include "pitchrl/pipeline/pool.hpp"

namespace pitchrl {

struct TrainerOptions {
  std::string out_dir;
  bool distillation = true;   // false: the no-teacher ablations
  bool selfplay = true;       // false: fixed opponent set
  int fixed_pool_entries = 0; // active entries besides the untrained one
  bool use_weight_override = false;
  RewardWeights weight_override;
  std::atomic<bool>* stop_flag = nullptr;
  bool quiet = false;
};

struct TrainOutcome {
  bool completed = false;
  bool criterion_met = false;
  double final_eval = 0.0;
  long long learner_steps = 0;
  long long env_steps = 0;
  std::string message;
};

// Collects one in-flight trajectory segment for the replay buffer.
struct SegmentBuilder {
  TrajectorySegment seg;
  int cap = 48;

  void start(int cdim, int pdim, int adim, int opponent_id, int cap_steps) {
    seg = TrajectorySegment{};
    seg.critic_obs_dim = cdim;
    seg.policy_obs_dim = pdim;
    seg.action_dim = adim;
    seg.opponent_id = opponent_id;
    cap = cap_steps;
  }

  void append(const Vec& cobs, const Vec& pobs, const Vec& action, double reward,
              double flag, bool upright) {
    seg.critic_obs.insert(seg.critic_obs.end(), cobs.begin(), cobs.end());
    seg.policy_obs.insert(seg.policy_obs.end(), pobs.begin(), pobs.end());
    seg.action.insert(seg.action.end(), action.begin(), action.end());
    seg.reward.push_back(reward);
    seg.discount_flag.push_back(flag);
    seg.upright.push_back(upright ? 1 : 0);
    seg.len += 1;
  }

  bool full() const { return seg.len >= cap; }
  bool empty() const { return seg.len == 0; }

  Vec blob() const {
    Vec b{static_cast<double>(seg.len), static_cast<double>(seg.critic_obs_dim),
          static_cast<double>(seg.policy_obs_dim), static_cast<double>(seg.action_dim),
          static_cast<double>(seg.opponent_id), static_cast<double>(cap)};
    b.insert(b.end(), seg.critic_obs.begin(), seg.critic_obs.end());
    b.insert(b.end(), seg.policy_obs.begin(), seg.policy_obs.end());
    b.insert(b.end(), seg.action.begin(), seg.action.end());
    b.insert(b.end(), seg.reward.begin(), seg.reward.end());
    b.insert(b.end(), seg.discount_flag.begin(), seg.discount_flag.end());
    for (unsigned char u : seg.upright) b.push_back(u);
    return b;
  }

  void restore(const Vec& b) {
    size_t at = 0;
    const int len = static_cast<int>(b[at++]);
    const int cdim = static_cast<int>(b[at++]);
    const int pdim = static_cast<int>(b[at++]);
    const int adim = static_cast<int>(b[at++]);
    const int oid = static_cast<int>(b[at++]);
    const int cp = static_cast<int>(b[at++]);
    start(cdim, pdim, adim, oid, cp);
    seg.len = len;
    auto take = [&](Vec& dst, size_t n) {
      dst.assign(b.begin() + at, b.begin() + at + n);
      at += n;
    };
    take(seg.critic_obs, static_cast<size_t>(len) * cdim);
    take(seg.policy_obs, static_cast<size_t>(len) * pdim);
    take(seg.action, static_cast<size_t>(len) * adim);
    take(seg.reward, len);
    take(seg.discount_flag, len);
    seg.upright.resize(len);
    for (int i = 0; i < len; ++i) seg.upright[i] = static_cast<unsigned char>(b[at++]);
  }
};

// Two-stage training orchestration: owns the environment(s), the learner,
// the replay buffer, the opponent pool, the distillation weights, metrics,
// and checkpoints. Deterministic mode runs one actor and the learner in a
// fixed interleave; otherwise N actor workers feed a bounded queue.
class Trainer {
 public:
  Trainer(ExperimentConfig cfg, TrainerOptions opt)
      : cfg_(std::move(cfg)),
        opt_(std::move(opt)),
        replay_(cfg_.dmpo.replay_capacity),
        pool_(cfg_.selfplay.pool_max),
        distill_state_(DistillState::init(cfg_.distill)) {
    const bool pose = cfg_.stage == Stage::GetupTeacher;
    policy_obs_dim_ = policy_obs_dim(pose, cfg_.env.stack_frames);
    critic_obs_dim_ = critic_obs_dim(pose, cfg_.env.onehot_slots, cfg_.env.stack_frames);

    Rng init_rng = Rng::derive(cfg_.seed, 5);
    GaussianPolicy policy = GaussianPolicy::make(
        policy_obs_dim_, kActionDim, cfg_.dmpo.policy_layers, true,
        cfg_.dmpo.min_variance, cfg_.dmpo.init_variance, init_rng);
    CriticNet critic =
        CriticNet::make(critic_obs_dim_, kActionDim, cfg_.dmpo.critic_layers, true,
                        cfg_.dmpo.core.atom_count, init_rng);
    DmpoConfig core = cfg_.dmpo.core;
    core.threads = cfg_.threads;
    learner_ = std::make_unique<DmpoLearner>(core, std::move(policy),
                                             std::move(critic), cfg_.make_dual());

    env_rng_ = Rng::derive(cfg_.seed, 0);
    action_rng_ = Rng::derive(cfg_.seed, 1);
    learner_rng_ = Rng::derive(cfg_.seed, 2);
    pose_rng_ = Rng::derive(cfg_.seed, 3);
    opponent_rng_ = Rng::derive(cfg_.seed, 4);
    opp_action_rng_ = Rng::derive(cfg_.seed, 6);

    env_ = std::make_unique<Env>(cfg_.env, cfg_.randomization, cfg_.stage);
    if (opt_.use_weight_override) env_->set_weights(opt_.weight_override);
    track_ = KeyPoseTrack::standard();
  }

  void set_teachers(GaussianPolicy soccer, GaussianPolicy getup) {
    if (soccer.spec.input_dim != policy_obs_dim_)
      throw ConfigError("soccer teacher observation layout does not match");
    const int pose_dim = policy_obs_dim(true, cfg_.env.stack_frames);
    if (getup.spec.input_dim != pose_dim)
      throw ConfigError("get-up teacher observation layout does not match");
    soccer_teacher_ = std::move(soccer);
    getup_teacher_ = std::move(getup);
    has_teachers_ = true;
    getup_suffix_ = make_getup_suffix();
  }

  void add_fixed_opponent(MlpParams params) {
    pool_.add_snapshot(std::move(params), 0);
  }
  OpponentPool& pool() { return pool_; }
  DmpoLearner& learner() { return *learner_; }
  DistillState& distill_state() { return distill_state_; }
  long long env_steps() const { return env_steps_; }

  TrainOutcome run() {
    namespace fs = std::filesystem;
    if (!opt_.out_dir.empty()) {
      fs::create_directories(opt_.out_dir);
      std::ofstream ec(opt_.out_dir + "/effective_config.json");
      ec << effective_config_text(cfg_) << "\n";
      metrics_.open(opt_.out_dir + "/metrics.jsonl");
    }
    if (cfg_.stage == Stage::OneVOne && opt_.distillation && !has_teachers_)
      throw ConfigError("distillation stage requires both teacher policies");
    if (!opt_.selfplay) pool_.set_fixed_active(opt_.fixed_pool_entries);

    start_time_ = std::chrono::steady_clock::now();
    const bool sequential = cfg_.deterministic || cfg_.workers <= 1;
    TrainOutcome out;
    if (sequential) run_sequential();
    else run_workers();

    out.learner_steps = learner_->step_count_;
    out.env_steps = env_steps_;
    out.completed = true;
    const auto eval = final_eval();
    out.final_eval = eval.first;
    out.criterion_met = eval.second;
    out.message = eval_message_;
    if (!opt_.out_dir.empty()) {
      save(opt_.out_dir + "/checkpoint_final");
      nlohmann::json done;
      done["completed"] = out.completed;
      done["criterion_met"] = out.criterion_met;
      done["final_eval"] = out.final_eval;
      done["learner_steps"] = out.learner_steps;
      done["env_steps"] = out.env_steps;
      done["message"] = out.message;
      done["early_stopped"] = early_stopped_;
      std::ofstream df(opt_.out_dir + "/completion.json");
      df << done.dump(2) << "\n";
    }
    return out;
  }

  void save(const std::string& dir) const {
    CheckpointState st;
    st.stage = cfg_.stage;
    st.policy_obs_dim = policy_obs_dim_;
    st.critic_obs_dim = critic_obs_dim_;
    st.learner_step = learner_->step_count_;
    st.env_steps = env_steps_;
    st.episodes = episodes_;
    st.policy = learner_->policy_;
    st.critic = learner_->critic_;
    st.target_policy = learner_->target_policy_.params;
    st.target_critic = learner_->target_critic_.params;
    st.policy_adam = learner_->policy_adam_;
    st.critic_adam = learner_->critic_adam_;
    st.dual = learner_->dual_;
    st.distill = distill_state_;
    st.has_teachers = has_teachers_;
    if (has_teachers_) {
      st.soccer_teacher = soccer_teacher_;
      st.getup_teacher = getup_teacher_;
    }
    st.pool_snapshots = pool_.snapshots();
    st.rng_states = {env_rng_.state(),      action_rng_.state(),
                     learner_rng_.state(),  pose_rng_.state(),
                     opponent_rng_.state(), opp_action_rng_.state()};
    const bool full_state = cfg_.deterministic || cfg_.training.include_replay_in_checkpoint;
    if (full_state) {
      st.env_state = env_->state_blob();
      Vec actor{static_cast<double>(pose_timer_),
                static_cast<double>(episode_steps_),
                static_cast<double>(episode_reward_),
                env_->done() ? 1.0 : 0.0};
      const Vec sb = segment_.blob();
      actor.insert(actor.end(), sb.begin(), sb.end());
      st.actor_state = std::move(actor);
      st.has_replay = true;
      st.replay_segments.reserve(replay_.size());
      for (size_t i = 0; i < replay_.size(); ++i)
        st.replay_segments.push_back(replay_.at(i));
    }
    save_checkpoint(dir, st);
  }

  void restore(const CheckpointState& st) {
    if (st.stage != cfg_.stage) throw ConfigError("checkpoint stage mismatch");
    if (st.policy_obs_dim != policy_obs_dim_ || st.critic_obs_dim != critic_obs_dim_)
      throw ConfigError("checkpoint observation layout does not match the config");
    if (!(st.policy.spec == learner_->policy_.spec) ||
        !(st.critic.spec == learner_->critic_.spec))
      throw ConfigError("checkpoint network shapes do not match the config");
    learner_->policy_.params = st.policy.params;
    learner_->critic_.params = st.critic.params;
    learner_->target_policy_.params = st.target_policy;
    learner_->target_critic_.params = st.target_critic;
    learner_->policy_adam_ = st.policy_adam;
    learner_->critic_adam_ = st.critic_adam;
    learner_->dual_ = st.dual;
    learner_->step_count_ = st.learner_step;
    distill_state_ = st.distill;
    env_steps_ = st.env_steps;
    episodes_ = st.episodes;
    if (st.has_teachers) {
      soccer_teacher_ = st.soccer_teacher;
      getup_teacher_ = st.getup_teacher;
      has_teachers_ = true;
      getup_suffix_ = make_getup_suffix();
    }
    for (const Snapshot& s : st.pool_snapshots)
      pool_.add_snapshot(s.params, s.learner_step);
    if (!opt_.selfplay) pool_.set_fixed_active(opt_.fixed_pool_entries);
    if (st.rng_states.size() == 6) {
      env_rng_.set_state(st.rng_states[0]);
      action_rng_.set_state(st.rng_states[1]);
      learner_rng_.set_state(st.rng_states[2]);
      pose_rng_.set_state(st.rng_states[3]);
      opponent_rng_.set_state(st.rng_states[4]);
      opp_action_rng_.set_state(st.rng_states[5]);
    }
    if (!st.env_state.empty()) {
      env_->restore_blob(st.env_state);
      pose_timer_ = st.actor_state[0];
      episode_steps_ = static_cast<long long>(st.actor_state[1]);
      episode_reward_ = st.actor_state[2];
      env_restored_done_ = st.actor_state[3] != 0.0;
      Vec sb(st.actor_state.begin() + 4, st.actor_state.end());
      segment_.restore(sb);
      episode_live_ = !env_restored_done_;
    }
    if (st.has_replay) {
      replay_.clear();
      for (const TrajectorySegment& s : st.replay_segments) replay_.append(s);
    }
  }

  // Runs learner updates paced by env stepping until `extra_updates` more
  // learner steps have happened (used by the determinism regression).
  void run_updates(long long extra_updates) {
    const long long target = learner_->step_count_ + extra_updates;
    while (learner_->step_count_ < target) {
      if (opt_.stop_flag && opt_.stop_flag->load()) break;
      actor_step_sequential();
    }
  }

  std::pair<double, bool> final_eval() {
    if (cfg_.stage == Stage::GetupTeacher) {
      const auto r = eval_getup_success(learner_->policy_, cfg_.env,
                                        cfg_.training.eval_episodes, cfg_.seed);
      eval_message_ = "getup success " + std::to_string(r.success_rate);
      return {r.success_rate, r.success_rate >= 0.9};
    }
    if (cfg_.stage == Stage::SoccerTeacher) {
      const auto r = eval_scoring_rate(learner_->policy_, cfg_.env,
                                       cfg_.training.eval_episodes, cfg_.seed);
      eval_message_ = "scoring rate " + std::to_string(r.scoring_rate);
      return {r.scoring_rate, r.scoring_rate >= 0.6};
    }
    eval_message_ = "training completed";
    return {0.0, true};
  }

  const GaussianPolicy& policy() const { return learner_->policy_; }

 private:
  Vec make_getup_suffix() const {
    // the stacked target-pose block for the final (upright) key pose
    const TargetPose pose = track_.final_pose();
    Vec block{pose.q_target[0], pose.q_target[1], pose.q_target[2],
              pose.q_target[3], pose.g_target.x, pose.g_target.y};
    Vec suffix;
    for (int k = 0; k < cfg_.env.stack_frames; ++k)
      suffix.insert(suffix.end(), block.begin(), block.end());
    return suffix;
  }

  void begin_episode() {
    int opponent_id = 0;
    if (cfg_.stage == Stage::OneVOne) opponent_id = pool_.sample(opponent_rng_);
    const bool opp_fallen = opponent_id == 0 && cfg_.stage != Stage::GetupTeacher;
    env_->reset(env_rng_, opponent_id, opp_fallen);
    opponent_params_ = pool_.params_for(opponent_id);
    if (cfg_.stage == Stage::GetupTeacher) {
      const SampledTargetPose s = sample_target_pose(track_, pose_rng_);
      env_->set_target_pose(s.pose);
      pose_timer_ = s.hold_seconds;
    }
    segment_.start(critic_obs_dim_, policy_obs_dim_, kActionDim,
                   env_->world().opponent_id, cfg_.dmpo.segment_length);
    episode_steps_ = 0;
    episode_reward_ = 0.0;
    episode_live_ = true;
  }

  void emit_segment(bool terminal_flagged) {
    (void)terminal_flagged;
    if (segment_.empty()) return;
    const bool keep = segment_.seg.terminal() ||
                      segment_.seg.len > cfg_.dmpo.core.n_step;
    if (keep) replay_.append(std::move(segment_.seg));
    segment_.start(critic_obs_dim_, policy_obs_dim_, kActionDim,
                   env_->world().opponent_id, cfg_.dmpo.segment_length);
  }

  Vec opponent_action(const Vec& obs) {
    if (!opponent_params_) return Vec(kActionDim, 0.0);
    // frozen snapshots share the online policy architecture
    GaussianPolicy snap;
    snap.spec = learner_->policy_.spec;
    snap.action_dim = kActionDim;
    snap.min_variance = cfg_.dmpo.min_variance;
    // evaluate without copying the params: temporary shallow wrapper
    MlpWorkspace ws;
    const MlpParams& params = *opponent_params_;
    const Vec& outv = mlp_forward(snap.spec, params, obs, ws);
    Vec a(kActionDim);
    for (int i = 0; i < kActionDim; ++i) {
      const double var = softplus(outv[kActionDim + i]) + snap.min_variance;
      a[i] = outv[i] + std::sqrt(var) * opp_action_rng_.normal();
    }
    return a;
  }

  // One agent control step plus any learner updates it paces.
  void actor_step_sequential() {
    if (!episode_live_ || env_->done()) {
      if (episode_live_ && env_->done()) finish_episode();
      begin_episode();
    }
    const Vec pobs = env_->policy_obs(0);
    const Vec cobs = env_->critic_obs(0);
    const bool upright = upright_indicator(env_->world().players[0].tilt);

    MlpWorkspace ws;
    const DiagGaussian g = learner_->policy_.eval(pobs, ws);
    Vec a0(kActionDim);
    for (int i = 0; i < kActionDim; ++i)
      a0[i] = g.mean[i] + std::sqrt(g.var[i]) * action_rng_.normal();
    const Vec a1 = opponent_action(env_->policy_obs(1));

    const EnvStepResult res = env_->step(a0, a1, env_rng_);
    env_steps_ += 1;
    episode_steps_ += 1;
    episode_reward_ += res.reward[0];
    window_.add_components(res.components[0]);
    if (res.term.goal_for == 0) window_.goals_for += 1;
    if (res.term.goal_for == 1) window_.goals_against += 1;

    segment_.append(cobs, pobs, a0, res.reward[0], res.term.terminal ? 0.0 : 1.0,
                    upright);
    if (segment_.full() || env_->done()) emit_segment(res.term.terminal);
    if (env_->done()) {
      finish_episode();
      episode_live_ = false;
    }

    if (cfg_.stage == Stage::GetupTeacher) {
      pose_timer_ -= cfg_.env.control_dt;
      if (pose_timer_ <= 0.0 && !env_->done()) {
        const SampledTargetPose s = sample_target_pose(track_, pose_rng_);
        env_->set_target_pose(s.pose);
        pose_timer_ = s.hold_seconds;
      }
    }

    if (replay_.ready(cfg_.training.min_replay) &&
        env_steps_ % cfg_.training.env_steps_per_update == 0)
      learner_update();
  }

  void finish_episode() {
    window_.episodes += 1;
    window_.episode_len += static_cast<double>(episode_steps_);
    episodes_ += 1;
  }

  void learner_update() {
    Distillation distill;
    const Distillation* hook = nullptr;
    if (cfg_.stage == Stage::OneVOne && opt_.distillation && has_teachers_) {
      distill.soccer = &soccer_teacher_;
      distill.getup = &getup_teacher_;
      distill.getup_obs_suffix = getup_suffix_;
      distill.lambda_f = distill_state_.lambda_f();
      distill.lambda_g = distill_state_.lambda_g();
      hook = &distill;
    }
    const UpdateStats st = learner_->update(replay_, learner_rng_, hook);
    if (hook) {
      if (st.n_upright > 0) distill_state_.update_f(st.eq_upright, cfg_.distill);
      if (st.n_ground > 0) distill_state_.update_g(st.eq_ground, cfg_.distill);
    }

    window_.updates += 1;
    window_.critic_loss += st.critic_loss;
    window_.policy_nll += st.policy_nll;
    window_.kl_mean += st.kl_mean;
    window_.kl_cov += st.kl_cov;
    window_.kl_teacher_f += st.kl_teacher_f;
    window_.kl_teacher_g += st.kl_teacher_g;
    window_.eq_mean += st.eq_mean;
    window_.skipped += (st.critic_skipped ? 1 : 0) + (st.policy_skipped ? 1 : 0);

    const long long step = learner_->step_count_;
    if (cfg_.stage == Stage::OneVOne && opt_.selfplay &&
        step % cfg_.selfplay.snapshot_interval == 0) {
      std::lock_guard<std::mutex> lk(pool_mu_);
      pool_.add_snapshot(learner_->policy_.params, step);
    }

    if (step % cfg_.training.log_interval == 0) {
      const double wall =
          std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                        start_time_)
              .count();
      metrics_.write(step, env_steps_, window_, st.eta, st.alpha_mean, st.alpha_cov,
                     distill_state_.lambda_f(), distill_state_.lambda_g(), wall);
      window_.clear();
    }
    if (!opt_.out_dir.empty() && step % cfg_.training.checkpoint_interval == 0)
      save(opt_.out_dir + "/checkpoint_latest");

    if (cfg_.training.eval_interval > 0 && step % cfg_.training.eval_interval == 0 &&
        cfg_.training.eval_success_target >= 0.0) {
      const auto ev = final_eval();
      if (!opt_.quiet)
        std::fprintf(stderr, "[eval] step=%lld env=%lld %s\n",
                     static_cast<long long>(step),
                     static_cast<long long>(env_steps_), eval_message_.c_str());
      if (ev.first >= cfg_.training.eval_success_target) early_stopped_ = true;
    }
  }

  void run_sequential() {
    while (env_steps_ < cfg_.training.budget_env_steps && !early_stopped_) {
      if (opt_.stop_flag && opt_.stop_flag->load()) break;
      actor_step_sequential();
    }
  }

  // --- worker-pool mode ----------------------------------------------------
  void run_workers();

  ExperimentConfig cfg_;
  TrainerOptions opt_;
  std::unique_ptr<DmpoLearner> learner_;
  std::unique_ptr<Env> env_;
  ReplayBuffer replay_;
  OpponentPool pool_;
  DistillState distill_state_;
  KeyPoseTrack track_;
  GaussianPolicy soccer_teacher_, getup_teacher_;
  Vec getup_suffix_;
  bool has_teachers_ = false;

  int policy_obs_dim_ = 0;
  int critic_obs_dim_ = 0;
  long long env_steps_ = 0;
  long long episodes_ = 0;
  long long episode_steps_ = 0;
  double episode_reward_ = 0.0;
  double pose_timer_ = 0.0;
  bool episode_live_ = false;
  bool env_restored_done_ = false;
  bool early_stopped_ = false;
  const MlpParams* opponent_params_ = nullptr;
  SegmentBuilder segment_;
  std::mutex pool_mu_;
  MetricsWindow window_;
  MetricsWriter metrics_;
  std::string eval_message_;
  std::chrono::steady_clock::time_point start_time_;

  Rng env_rng_, action_rng_, learner_rng_, pose_rng_, opponent_rng_, opp_action_rng_;
};

// Actor workers feed segments through a bounded queue; the learner drains it
// and paces updates by the configured env-steps-per-update ratio. Episode
// opponents and parameters are taken under a short lock; published policy
// parameters refresh at episode boundaries.
inline void Trainer::run_workers() {
  struct Shared {
    std::mutex mu;
    std::condition_variable cv_space, cv_data;
    std::vector<TrajectorySegment> queue;
    std::shared_ptr<const MlpParams> policy_params;
    std::atomic<long long> env_steps{0};
    std::atomic<long long> updates{0};
    std::atomic<bool> stop{false};
    MetricsWindow window;
  } sh;
  constexpr size_t kQueueCap = 128;
  sh.policy_params = std::make_shared<const MlpParams>(learner_->policy_.params);

  const int n_workers = cfg_.workers;
  const long long budget = cfg_.training.budget_env_steps;
  const int ratio = cfg_.training.env_steps_per_update;

  auto actor_fn = [&](int worker_id) {
    Env env(cfg_.env, cfg_.randomization, cfg_.stage);
    if (opt_.use_weight_override) env.set_weights(opt_.weight_override);
    Rng env_rng = Rng::derive(cfg_.seed, 10, worker_id);
    Rng act_rng = Rng::derive(cfg_.seed, 11, worker_id);
    Rng pose_rng = Rng::derive(cfg_.seed, 12, worker_id);
    Rng opp_rng = Rng::derive(cfg_.seed, 13, worker_id);
    SegmentBuilder seg;
    MlpWorkspace ws, ws_opp;
    GaussianPolicy local;
    local.spec = learner_->policy_.spec;
    local.action_dim = kActionDim;
    local.min_variance = cfg_.dmpo.min_variance;

    while (!sh.stop.load()) {
      std::shared_ptr<const MlpParams> params;
      MlpParams opp_params;
      bool has_opp = false;
      int opponent_id = 0;
      {
        std::lock_guard<std::mutex> lk(sh.mu);
        params = sh.policy_params;
      }
      if (cfg_.stage == Stage::OneVOne) {
        std::lock_guard<std::mutex> lk(pool_mu_);
        opponent_id = pool_.sample(opp_rng);
        if (const MlpParams* p = pool_.params_for(opponent_id)) {
          opp_params = *p;
          has_opp = true;
        }
      }
      const bool opp_fallen = opponent_id == 0 && cfg_.stage != Stage::GetupTeacher;
      env.reset(env_rng, opponent_id, opp_fallen);
      double pose_timer = 0.0;
      if (cfg_.stage == Stage::GetupTeacher) {
        const SampledTargetPose s = sample_target_pose(track_, pose_rng);
        env.set_target_pose(s.pose);
        pose_timer = s.hold_seconds;
      }
      seg.start(critic_obs_dim_, policy_obs_dim_, kActionDim, opponent_id,
                cfg_.dmpo.segment_length);
      long long ep_steps = 0;

      while (!env.done() && !sh.stop.load()) {
        // throttle: do not run ahead of the learner by more than one buffer
        while (!sh.stop.load() &&
               sh.env_steps.load() >
                   (sh.updates.load() + 64) * static_cast<long long>(ratio) +
                       static_cast<long long>(cfg_.training.min_replay)) {
          std::this_thread::sleep_for(std::chrono::milliseconds(2));
        }
        const Vec pobs = env.policy_obs(0);
        const Vec cobs = env.critic_obs(0);
        const bool upright = upright_indicator(env.world().players[0].tilt);
        const DiagGaussian g = [&] {
          GaussianPolicy tmp;
          tmp.spec = local.spec;
          tmp.action_dim = kActionDim;
          tmp.min_variance = local.min_variance;
          const Vec& outv = mlp_forward(local.spec, *params, pobs, ws);
          DiagGaussian d;
          d.mean.assign(outv.begin(), outv.begin() + kActionDim);
          d.var.resize(kActionDim);
          for (int i = 0; i < kActionDim; ++i)
            d.var[i] = softplus(outv[kActionDim + i]) + tmp.min_variance;
          return d;
        }();
        Vec a0(kActionDim);
        for (int i = 0; i < kActionDim; ++i)
          a0[i] = g.mean[i] + std::sqrt(g.var[i]) * act_rng.normal();
        Vec a1(kActionDim, 0.0);
        if (has_opp) {
          const Vec o1 = env.policy_obs(1);
          const Vec& outv = mlp_forward(local.spec, opp_params, o1, ws_opp);
          for (int i = 0; i < kActionDim; ++i) {
            const double var = softplus(outv[kActionDim + i]) + local.min_variance;
            a1[i] = outv[i] + std::sqrt(var) * act_rng.normal();
          }
        }
        const EnvStepResult res = env.step(a0, a1, env_rng);
        sh.env_steps.fetch_add(1);
        ep_steps += 1;
        seg.append(cobs, pobs, a0, res.reward[0], res.term.terminal ? 0.0 : 1.0,
                   upright);
        {
          std::lock_guard<std::mutex> lk(sh.mu);
          sh.window.add_components(res.components[0]);
          if (res.term.goal_for == 0) sh.window.goals_for += 1;
          if (res.term.goal_for == 1) sh.window.goals_against += 1;
        }
        if (cfg_.stage == Stage::GetupTeacher) {
          pose_timer -= cfg_.env.control_dt;
          if (pose_timer <= 0.0 && !env.done()) {
            const SampledTargetPose s = sample_target_pose(track_, pose_rng);
            env.set_target_pose(s.pose);
            pose_timer = s.hold_seconds;
          }
        }
        if (seg.full() || env.done()) {
          const bool keep =
              seg.seg.terminal() || seg.seg.len > cfg_.dmpo.core.n_step;
          if (keep) {
            std::unique_lock<std::mutex> lk(sh.mu);
            sh.cv_space.wait(lk, [&] {
              return sh.queue.size() < kQueueCap || sh.stop.load();
            });
            if (sh.stop.load()) return;
            sh.queue.push_back(std::move(seg.seg));
            sh.cv_data.notify_one();
          }
          seg.start(critic_obs_dim_, policy_obs_dim_, kActionDim, opponent_id,
                    cfg_.dmpo.segment_length);
        }
        if (sh.env_steps.load() >= budget) {
          sh.stop.store(true);
          sh.cv_data.notify_all();
          break;
        }
      }
      {
        std::lock_guard<std::mutex> lk(sh.mu);
        sh.window.episodes += 1;
        sh.window.episode_len += static_cast<double>(ep_steps);
      }
    }
  };

  std::vector<std::thread> workers;
  workers.reserve(n_workers);
  for (int k = 0; k < n_workers; ++k) workers.emplace_back(actor_fn, k);

  while (!sh.stop.load() && !early_stopped_) {
    if (opt_.stop_flag && opt_.stop_flag->load()) {
      sh.stop.store(true);
      break;
    }
    {
      std::unique_lock<std::mutex> lk(sh.mu);
      sh.cv_data.wait_for(lk, std::chrono::milliseconds(20), [&] {
        return !sh.queue.empty() || sh.stop.load();
      });
      for (TrajectorySegment& s : sh.queue) replay_.append(std::move(s));
      sh.queue.clear();
      sh.cv_space.notify_all();
      window_.episodes += sh.window.episodes;
      episodes_ += sh.window.episodes;
      window_.episode_len += sh.window.episode_len;
      window_.goals_for += sh.window.goals_for;
      window_.goals_against += sh.window.goals_against;
      if (sh.window.comp_steps > 0) {
        window_.comp_sums.scoring += sh.window.comp_sums.scoring;
        window_.comp_sums.conceding += sh.window.comp_sums.conceding;
        window_.comp_sums.vel_to_ball += sh.window.comp_sums.vel_to_ball;
        window_.comp_sums.velocity += sh.window.comp_sums.velocity;
        window_.comp_sums.interference += sh.window.comp_sums.interference;
        window_.comp_sums.termination += sh.window.comp_sums.termination;
        window_.comp_sums.upright += sh.window.comp_sums.upright;
        window_.comp_sums.joint_torque += sh.window.comp_sums.joint_torque;
        window_.comp_sums.target_pose += sh.window.comp_sums.target_pose;
        window_.comp_sums.weighted_scaled_sum +=
            sh.window.comp_sums.weighted_scaled_sum;
        window_.comp_steps += sh.window.comp_steps;
      }
      sh.window = MetricsWindow{};
    }
    env_steps_ = sh.env_steps.load();
    const bool ready = replay_.ready(cfg_.training.min_replay);
    if (ready && learner_->step_count_ * ratio < env_steps_) {
      learner_update();
      sh.updates.store(learner_->step_count_);
      std::lock_guard<std::mutex> lk(sh.mu);
      sh.policy_params =
          std::make_shared<const MlpParams>(learner_->policy_.params);
    }
    if (env_steps_ >= budget) sh.stop.store(true);
  }
  sh.stop.store(true);
  sh.cv_space.notify_all();
  sh.cv_data.notify_all();
  for (auto& t : workers) t.join();
  env_steps_ = sh.env_steps.load();
}

}  // namespace pitchrl
