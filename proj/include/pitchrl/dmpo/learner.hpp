#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "pitchrl/dmpo/critic.hpp"
#include "pitchrl/dmpo/dual.hpp"
#include "pitchrl/dmpo/gaussian.hpp"
#include "pitchrl/dmpo/policy.hpp"
#include "pitchrl/dmpo/replay.hpp"
#include "pitchrl/numcore/adam.hpp"
#include "pitchrl/numcore/parallel.hpp"

namespace pitchrl {

struct DmpoConfig {
  double gamma = 0.99;
  int atom_count = 51;
  double support_min = -150.0;
  double support_max = 150.0;
  int n_step = 5;
  int batch_segments = 256;
  int offsets_per_segment = 1;
  int actions_per_state = 20;
  double lr_policy = 1e-4;
  double lr_critic = 1e-4;
  int target_period_actor = 25;
  int target_period_critic = 100;
  int threads = 1;
};

// Teacher hookup for the distillation stage. The get-up teacher was trained
// with a target-pose block appended to the observation; conditioning it on
// the final (upright) key pose is done by appending `getup_obs_suffix`.
struct Distillation {
  const GaussianPolicy* soccer = nullptr;
  const GaussianPolicy* getup = nullptr;
  Vec getup_obs_suffix;
  double lambda_f = 0.0;
  double lambda_g = 0.0;
};

struct UpdateStats {
  int transitions = 0;
  double critic_loss = 0.0;
  double policy_nll = 0.0;
  double kl_mean = 0.0;
  double kl_cov = 0.0;
  double kl_teacher_f = 0.0;
  double kl_teacher_g = 0.0;
  double eq_mean = 0.0;
  double eq_upright = 0.0;
  long n_upright = 0;
  double eq_ground = 0.0;
  long n_ground = 0;
  double eta = 0.0;
  double alpha_mean = 0.0;
  double alpha_cov = 0.0;
  bool critic_skipped = false;
  bool policy_skipped = false;
};

// Per-state policy-improvement gradient. Accumulates d(mean)/d(var) of
//   (1-lambda) * [-sum_j w_j log pi(a_j|s)] + lambda * KL(pi || teacher)
//   + alpha_mu * kl_mean(target || pi) + alpha_cov * kl_cov(target || pi)
// into `d_mean`/`d_var` and returns the per-state loss pieces via the refs.
inline void m_step_state_grads(const DiagGaussian& online, const DiagGaussian& target,
                               const double* actions, const double* weights,
                               int n_actions, int adim, double lambda,
                               const DiagGaussian* teacher, double alpha_mean,
                               double alpha_cov, Vec& d_mean, Vec& d_var,
                               double& nll_out, double& kl_mean_out,
                               double& kl_cov_out, double& kl_teacher_out) {
  d_mean.assign(adim, 0.0);
  d_var.assign(adim, 0.0);
  nll_out = 0.0;

  const double w_nll = 1.0 - lambda;
  for (int j = 0; j < n_actions; ++j) {
    const double* a = actions + static_cast<size_t>(j) * adim;
    const double wj = weights[j];
    for (int k = 0; k < adim; ++k) {
      const double d = a[k] - online.mean[k];
      const double inv = 1.0 / online.var[k];
      nll_out += wj * 0.5 * (kLog2Pi + std::log(online.var[k]) + d * d * inv);
      d_mean[k] += w_nll * wj * (-d * inv);
      d_var[k] += w_nll * wj * 0.5 * (inv - d * d * inv * inv);
    }
  }

  kl_teacher_out = 0.0;
  if (teacher && lambda > 0.0) {
    for (int k = 0; k < adim; ++k) {
      const double r = online.var[k] / teacher->var[k];
      const double d = online.mean[k] - teacher->mean[k];
      kl_teacher_out += 0.5 * (r - 1.0 - std::log(r) + d * d / teacher->var[k]);
      d_mean[k] += lambda * d / teacher->var[k];
      d_var[k] += lambda * 0.5 * (1.0 / teacher->var[k] - 1.0 / online.var[k]);
    }
  }

  const DecoupledKl kl = gaussian_kl_decoupled(target, online);
  kl_mean_out = kl.mean;
  kl_cov_out = kl.cov;
  for (int k = 0; k < adim; ++k) {
    const double d = target.mean[k] - online.mean[k];
    const double inv = 1.0 / online.var[k];
    d_mean[k] += alpha_mean * (online.mean[k] - target.mean[k]) * inv;
    d_var[k] += alpha_mean * (-0.5) * d * d * inv * inv;
    d_var[k] += alpha_cov * 0.5 * (online.var[k] - target.var[k]) * inv * inv;
  }
}

class DmpoLearner {
 public:
  DmpoLearner(DmpoConfig cfg, GaussianPolicy policy, CriticNet critic, DualState dual)
      : policy_(std::move(policy)),
        critic_(std::move(critic)),
        target_policy_(policy_),
        target_critic_(critic_),
        dual_(dual),
        policy_adam_(AdamState::like(policy_.params)),
        critic_adam_(AdamState::like(critic_.params)),
        cfg_(cfg),
        grid_(atom_grid(cfg.support_min, cfg.support_max, cfg.atom_count)) {
    if (critic_.spec.output_dim != cfg.atom_count)
      throw ConfigError("DmpoLearner: critic output dim != atom count");
  }

  // Copies the online nets into the targets on their configured periods.
  void target_sync() {
    if (step_count_ % cfg_.target_period_actor == 0)
      target_policy_.params = policy_.params;
    if (step_count_ % cfg_.target_period_critic == 0)
      target_critic_.params = critic_.params;
  }

  UpdateStats update(const ReplayBuffer& replay, Rng& master,
                     const Distillation* distill) {
    const int want = cfg_.batch_segments * cfg_.offsets_per_segment;
    struct Item {
      const TrajectorySegment* seg;
      int t;
    };
    std::vector<Item> items;
    items.reserve(want);
    int guard = 0;
    while (static_cast<int>(items.size()) < want && guard < want * 20) {
      ++guard;
      const TrajectorySegment& seg = replay.sample(master);
      const bool terminal = seg.terminal();
      if (!terminal && seg.len <= cfg_.n_step) continue;
      for (int k = 0; k < cfg_.offsets_per_segment &&
                      static_cast<int>(items.size()) < want; ++k) {
        const int hi = terminal ? seg.len : seg.len - cfg_.n_step;
        items.push_back({&seg, static_cast<int>(master.uniform_int(hi))});
      }
    }
    const int m = static_cast<int>(items.size());
    UpdateStats stats;
    stats.transitions = m;
    if (m == 0) return stats;

    const std::uint64_t nonce = master.next_u64();
    const int adim = policy_.action_dim;
    const int n_act = cfg_.actions_per_state;
    const int threads = std::max(1, cfg_.threads);

    struct PerItem {
      Vec q_row;
      Vec actions;  // n_act x adim
      DiagGaussian target_pi;
      double eq_online = 0.0;
      double ce = 0.0;
    };
    std::vector<PerItem> work(m);

    std::vector<MlpParams> critic_grads(threads, MlpParams::zeros(critic_.spec));
    std::vector<MlpParams> policy_grads(threads, MlpParams::zeros(policy_.spec));

    // ---- policy evaluation + E-step Q sampling ----
    parallel_for(m, threads, [&](int tid, int begin, int end) {
      MlpWorkspace ws_pi, ws_boot, ws_critic;
      Vec boot_action;
      for (int i = begin; i < end; ++i) {
        const TrajectorySegment& seg = *items[i].seg;
        const int t = items[i].t;
        Rng rng = Rng::derive(nonce, static_cast<std::uint64_t>(i));
        PerItem& out = work[i];

        Vec pobs(seg.policy_obs_at(t), seg.policy_obs_at(t) + seg.policy_obs_dim);
        out.target_pi = target_policy_.eval(pobs, ws_pi);

        // n-step distributional target
        Vec rewards, flags;
        rewards.reserve(cfg_.n_step);
        bool terminated = false;
        int k = 0;
        for (; k < cfg_.n_step && t + k < seg.len; ++k) {
          rewards.push_back(seg.reward[t + k]);
          flags.push_back(seg.discount_flag[t + k]);
          if (seg.discount_flag[t + k] == 0.0) {
            terminated = true;
            ++k;
            break;
          }
        }
        CategoricalValue boot{Vec(grid_.size(), 0.0)};
        if (!terminated) {
          const int tb = t + k;  // bootstrap index (k == n_step here)
          Vec pobs_b(seg.policy_obs_at(tb), seg.policy_obs_at(tb) + seg.policy_obs_dim);
          DiagGaussian pi_b = target_policy_.eval(pobs_b, ws_boot);
          boot_action = pi_b.sample(rng);
          Vec cobs_b(seg.critic_obs_at(tb), seg.critic_obs_at(tb) + seg.critic_obs_dim);
          boot.p = softmax(target_critic_.logits(cobs_b, boot_action, ws_boot));
        }
        const CategoricalValue target_dist = n_step_distributional_target(
            rewards, flags, boot, cfg_.gamma, grid_);

        // online critic cross-entropy gradient
        Vec cobs(seg.critic_obs_at(t), seg.critic_obs_at(t) + seg.critic_obs_dim);
        Vec act(seg.action_at(t), seg.action_at(t) + adim);
        const Vec logits = critic_.logits(cobs, act, ws_critic);
        const Vec p_online = softmax(logits);
        out.ce = cross_entropy(target_dist.p, p_online);
        out.eq_online = 0.0;
        for (size_t z = 0; z < p_online.size(); ++z)
          out.eq_online += p_online[z] * grid_[z];
        Vec upstream(logits.size());
        for (size_t z = 0; z < logits.size(); ++z)
          upstream[z] = p_online[z] - target_dist.p[z];
        mlp_backward(critic_.spec, critic_.params, ws_critic, upstream,
                     critic_grads[tid]);

        // E-step proposals scored by the target critic
        const CriticNet::ObsCache cache = target_critic_.cache_obs(cobs);
        out.q_row.resize(n_act);
        out.actions.resize(static_cast<size_t>(n_act) * adim);
        Vec aj(adim);
        for (int j = 0; j < n_act; ++j) {
          for (int d = 0; d < adim; ++d)
            aj[d] = out.target_pi.mean[d] +
                    std::sqrt(out.target_pi.var[d]) * rng.normal();
          std::copy(aj.begin(), aj.end(),
                    out.actions.begin() + static_cast<size_t>(j) * adim);
          out.q_row[j] = target_critic_.expected_q(cache, aj, grid_);
        }
      }
    });

    // critic Adam step (gradients averaged over the batch)
    const double inv_m = 1.0 / static_cast<double>(m);
    for (int t = 1; t < threads; ++t)
      accumulate_params(critic_grads[0], critic_grads[t]);
    critic_grads[0].visit([&](Vec& g) {
      for (double& x : g) x *= inv_m;
    });
    if (!adam_step(critic_adam_, critic_.params, critic_grads[0], cfg_.lr_critic))
      stats.critic_skipped = true;

    for (int i = 0; i < m; ++i) stats.critic_loss += work[i].ce * inv_m;

    // ---- E-step weights + temperature dual ----
    std::vector<Vec> q_matrix(m);
    for (int i = 0; i < m; ++i) q_matrix[i] = work[i].q_row;
    std::vector<Vec> weights(m);
    for (int i = 0; i < m; ++i) weights[i] = e_step_weights(work[i].q_row, dual_.eta);
    eta_update(q_matrix, dual_);

    // ---- M-step ----
    const double alpha_mean = dual_.alpha_mean();
    const double alpha_cov = dual_.alpha_cov();
    std::vector<UpdateStats> tstats(threads);
    parallel_for(m, threads, [&](int tid, int begin, int end) {
      MlpWorkspace ws_pi, ws_teacher;
      Vec d_mean, d_var, teacher_obs;
      UpdateStats& ts = tstats[tid];
      for (int i = begin; i < end; ++i) {
        const TrajectorySegment& seg = *items[i].seg;
        const int t = items[i].t;
        Vec pobs(seg.policy_obs_at(t), seg.policy_obs_at(t) + seg.policy_obs_dim);
        const DiagGaussian online = policy_.eval(pobs, ws_pi);

        double lambda = 0.0;
        DiagGaussian teacher;
        const DiagGaussian* teacher_ptr = nullptr;
        const bool upright = t < static_cast<int>(seg.upright.size()) &&
                             seg.upright[t] != 0;
        if (distill) {
          if (upright && distill->soccer) {
            lambda = distill->lambda_f;
            teacher = distill->soccer->eval(pobs, ws_teacher);
            teacher_ptr = &teacher;
          } else if (!upright && distill->getup) {
            lambda = distill->lambda_g;
            teacher_obs = pobs;
            teacher_obs.insert(teacher_obs.end(), distill->getup_obs_suffix.begin(),
                               distill->getup_obs_suffix.end());
            teacher = distill->getup->eval(teacher_obs, ws_teacher);
            teacher_ptr = &teacher;
          }
        }

        double nll, klm, klc, klt;
        m_step_state_grads(online, work[i].target_pi, work[i].actions.data(),
                           weights[i].data(), cfg_.actions_per_state, adim, lambda,
                           teacher_ptr, alpha_mean, alpha_cov, d_mean, d_var, nll,
                           klm, klc, klt);
        policy_.backward(ws_pi, d_mean, d_var, policy_grads[tid]);

        ts.policy_nll += nll;
        ts.kl_mean += klm;
        ts.kl_cov += klc;
        if (teacher_ptr) {
          if (upright) ts.kl_teacher_f += klt;
          else ts.kl_teacher_g += klt;
        }
        ts.eq_mean += work[i].eq_online;
        if (upright) {
          ts.eq_upright += work[i].eq_online;
          ts.n_upright += 1;
        } else {
          ts.eq_ground += work[i].eq_online;
          ts.n_ground += 1;
        }
      }
    });

    for (int t = 1; t < threads; ++t)
      accumulate_params(policy_grads[0], policy_grads[t]);
    policy_grads[0].visit([&](Vec& g) {
      for (double& x : g) x *= inv_m;
    });
    if (!adam_step(policy_adam_, policy_.params, policy_grads[0], cfg_.lr_policy))
      stats.policy_skipped = true;

    double kl_mean_batch = 0.0, kl_cov_batch = 0.0;
    for (const UpdateStats& ts : tstats) {
      stats.policy_nll += ts.policy_nll * inv_m;
      kl_mean_batch += ts.kl_mean * inv_m;
      kl_cov_batch += ts.kl_cov * inv_m;
      stats.kl_teacher_f += ts.kl_teacher_f;
      stats.kl_teacher_g += ts.kl_teacher_g;
      stats.eq_mean += ts.eq_mean * inv_m;
      stats.eq_upright += ts.eq_upright;
      stats.n_upright += ts.n_upright;
      stats.eq_ground += ts.eq_ground;
      stats.n_ground += ts.n_ground;
    }
    stats.kl_mean = kl_mean_batch;
    stats.kl_cov = kl_cov_batch;
    if (stats.n_upright > 0) stats.eq_upright /= static_cast<double>(stats.n_upright);
    if (stats.n_ground > 0) stats.eq_ground /= static_cast<double>(stats.n_ground);
    if (stats.n_upright > 0) stats.kl_teacher_f /= static_cast<double>(stats.n_upright);
    if (stats.n_ground > 0) stats.kl_teacher_g /= static_cast<double>(stats.n_ground);

    dual_.update_alpha_mean(kl_mean_batch);
    dual_.update_alpha_cov(kl_cov_batch);

    step_count_ += 1;
    target_sync();

    stats.eta = dual_.eta;
    stats.alpha_mean = alpha_mean;
    stats.alpha_cov = alpha_cov;
    return stats;
  }

  const DmpoConfig& config() const { return cfg_; }
  const Vec& grid() const { return grid_; }

  GaussianPolicy policy_;
  CriticNet critic_;
  GaussianPolicy target_policy_;
  CriticNet target_critic_;
  DualState dual_;
  AdamState policy_adam_;
  AdamState critic_adam_;
  long long step_count_ = 0;

 private:
  DmpoConfig cfg_;
  Vec grid_;
};

}  // namespace pitchrl
