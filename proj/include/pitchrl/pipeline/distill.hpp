#pragma once

#include "pitchrl/dmpo/policy.hpp"
#include "pitchrl/numcore/adam.hpp"

namespace pitchrl {

struct DistillConfig {
  double q_f = 40.0;  // scaled-return threshold for the soccer teacher
  double q_g = 20.0;  // threshold for the get-up teacher
  double lr = 1e-2;
  double lambda_init = 0.5;
};

// Adaptive distillation weights, softplus-parameterized with clipping so
// lambda stays in [0, 1]. Descent on c(lambda) = lambda * (E[Q] - Q_thresh):
// below the threshold lambda rises toward 1 (behavioral cloning), above it
// decays toward 0 (pure RL).
struct DistillState {
  double pre_f = 0.0;
  double pre_g = 0.0;
  ScalarAdam adam_f, adam_g;

  static constexpr double kPreMax = 0.5413248546129181;  // softplus^-1(1)
  static constexpr double kPreMin = -13.8;               // lambda ~ 1e-6

  static DistillState init(const DistillConfig& cfg) {
    DistillState d;
    const double pre = softplus_inv(std::max(cfg.lambda_init, 1e-6));
    d.pre_f = clamp(pre, kPreMin, kPreMax);
    d.pre_g = d.pre_f;
    return d;
  }

  double lambda_f() const { return std::min(softplus(pre_f), 1.0); }
  double lambda_g() const { return std::min(softplus(pre_g), 1.0); }

  void update_f(double batch_expected_q, const DistillConfig& cfg) {
    step(pre_f, adam_f, batch_expected_q, cfg.q_f, cfg.lr);
  }
  void update_g(double batch_expected_q, const DistillConfig& cfg) {
    step(pre_g, adam_g, batch_expected_q, cfg.q_g, cfg.lr);
  }

 private:
  static void step(double& pre, ScalarAdam& adam, double eq, double thresh,
                   double lr) {
    const double g = (eq - thresh) * sigmoid(pre);
    pre -= adam.update(g, lr);
    pre = clamp(pre, kPreMin, kPreMax);
  }
};

}  // namespace pitchrl
