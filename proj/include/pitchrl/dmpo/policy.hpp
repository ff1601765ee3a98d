#pragma once

#include <cmath>
#include <vector>

#include "pitchrl/dmpo/gaussian.hpp"
#include "pitchrl/numcore/mlp.hpp"

namespace pitchrl {

inline double softplus(double x) {
  if (x > 30.0) return x;
  if (x < -30.0) return std::exp(x);
  return std::log1p(std::exp(x));
}
inline double sigmoid(double x) {
  return x >= 0.0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
}
inline double softplus_inv(double y) {
  // inverse on y > 0
  return y > 30.0 ? y : std::log(std::expm1(y));
}

// MLP head emitting a diagonal Gaussian: first action_dim outputs are the
// mean, the rest map through softplus plus a variance floor.
struct GaussianPolicy {
  MlpSpec spec;
  MlpParams params;
  int action_dim = 0;
  double min_variance = 0.001;

  static GaussianPolicy make(int obs_dim, int action_dim, std::vector<int> hidden,
                             bool first_layer_norm, double min_variance,
                             double init_variance, Rng& rng) {
    GaussianPolicy p;
    p.spec.input_dim = obs_dim;
    p.spec.hidden = std::move(hidden);
    p.spec.output_dim = 2 * action_dim;
    p.spec.first_layer_norm = first_layer_norm;
    p.spec.validate();
    p.action_dim = action_dim;
    p.min_variance = min_variance;
    p.params = random_init(p.spec, rng);
    // near-zero initial actions: damp the mean head rows
    Matrix& head = p.params.w.back();
    for (int r = 0; r < action_dim; ++r)
      for (int c = 0; c < head.cols; ++c) head.at(r, c) *= 1e-2;
    // start with a configured exploration variance
    const double bias = softplus_inv(std::max(init_variance - min_variance, 1e-6));
    for (int r = action_dim; r < 2 * action_dim; ++r) p.params.b.back()[r] = bias;
    return p;
  }

  DiagGaussian eval(const Vec& obs, MlpWorkspace& ws) const {
    const Vec& out = mlp_forward(spec, params, obs, ws);
    DiagGaussian g;
    g.mean.assign(out.begin(), out.begin() + action_dim);
    g.var.resize(action_dim);
    for (int i = 0; i < action_dim; ++i)
      g.var[i] = softplus(out[action_dim + i]) + min_variance;
    return g;
  }

  DiagGaussian eval(const Vec& obs) const {
    MlpWorkspace ws;
    return eval(obs, ws);
  }

  // Backward from (dL/dmean, dL/dvar) through the softplus head.
  void backward(const MlpWorkspace& ws, const Vec& d_mean, const Vec& d_var,
                MlpParams& grads) const {
    Vec upstream(2 * action_dim);
    const Vec& out = ws.pre.back();
    for (int i = 0; i < action_dim; ++i) {
      upstream[i] = d_mean[i];
      upstream[action_dim + i] = d_var[i] * sigmoid(out[action_dim + i]);
    }
    mlp_backward(spec, params, ws, upstream, grads);
  }
};

}  // namespace pitchrl
