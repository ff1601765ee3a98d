#pragma once

#include <cmath>
#include <vector>

#include "pitchrl/dmpo/policy.hpp"
#include "pitchrl/numcore/adam.hpp"

namespace pitchrl {

constexpr double kEtaFloor = 1e-6;

// Temperature and trust-region multipliers with their Adam accumulators.
// alpha_mean / alpha_cov are softplus-parameterized to stay non-negative.
struct DualState {
  double epsilon = 0.1;
  double beta_mean = 0.0025;
  double beta_cov = 1e-6;
  double lr = 1e-2;

  double eta = 1.0;
  // alpha_cov starts in the binding regime: beta_cov = 1e-6 puts its dual
  // equilibrium near 1e2-1e3, which Adam at lr 1e-2 would otherwise take
  // ~1e5 steps to reach.
  double alpha_mean_pre = 0.5413248546129181;  // softplus^-1(1)
  double alpha_cov_pre = 300.0;

  ScalarAdam eta_adam;
  ScalarAdam alpha_mean_adam;
  ScalarAdam alpha_cov_adam;

  double alpha_mean() const { return softplus(alpha_mean_pre); }
  double alpha_cov() const { return softplus(alpha_cov_pre); }

  // Dual ascent on the constraint kl <= beta: minimize alpha*(beta - kl)
  // through the pre-activation, so alpha grows while the constraint is
  // violated and decays once it holds.
  void update_alpha_mean(double kl_batch) {
    const double g = (beta_mean - kl_batch) * sigmoid(alpha_mean_pre);
    alpha_mean_pre -= alpha_mean_adam.update(g, lr);
  }
  void update_alpha_cov(double kl_batch) {
    const double g = (beta_cov - kl_batch) * sigmoid(alpha_cov_pre);
    alpha_cov_pre -= alpha_cov_adam.update(g, lr);
  }
};

// Nonparametric improved-policy weights: softmax(Q / eta), stabilized by
// max subtraction. With proposal actions drawn from the target policy the
// importance terms cancel and this is the closed-form E-step solution.
inline Vec e_step_weights(const Vec& q_values, double eta) {
  eta = std::max(eta, kEtaFloor);
  double mx = q_values[0];
  for (double q : q_values) mx = std::max(mx, q);
  Vec w(q_values.size());
  double sum = 0.0;
  for (size_t i = 0; i < q_values.size(); ++i) {
    w[i] = std::exp((q_values[i] - mx) / eta);
    sum += w[i];
  }
  for (double& x : w) x /= sum;
  return w;
}

// Gradient of the temperature dual
//   g(eta) = eta*eps + eta * mean_s log mean_a exp(Q_sa / eta)
// evaluated at the current eta.
inline double eta_dual_gradient(const std::vector<Vec>& q_matrix, double eta,
                                double epsilon) {
  eta = std::max(eta, kEtaFloor);
  double acc = 0.0;
  for (const Vec& row : q_matrix) {
    double mx = row[0];
    for (double q : row) mx = std::max(mx, q);
    double z = 0.0, wq = 0.0;
    for (double q : row) {
      const double e = std::exp((q - mx) / eta);
      z += e;
      wq += e * q;
    }
    const double log_mean = mx / eta + std::log(z / static_cast<double>(row.size()));
    const double mean_q = wq / z;  // E_w[Q]
    acc += log_mean - mean_q / eta;
  }
  return epsilon + acc / static_cast<double>(q_matrix.size());
}

// One Adam descent step on the dual, initialized at the previous solution.
inline void eta_update(const std::vector<Vec>& q_matrix, DualState& dual) {
  const double g = eta_dual_gradient(q_matrix, dual.eta, dual.epsilon);
  dual.eta -= dual.eta_adam.update(g, dual.lr);
  dual.eta = std::max(dual.eta, kEtaFloor);
}

}  // namespace pitchrl
