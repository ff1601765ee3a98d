#pragma once

#include <vector>

#include "pitchrl/dmpo/categorical.hpp"
#include "pitchrl/numcore/mlp.hpp"

namespace pitchrl {

// Q-network over (critic observation ++ action) emitting atom logits.
struct CriticNet {
  MlpSpec spec;
  MlpParams params;
  int obs_dim = 0;
  int action_dim = 0;

  static CriticNet make(int obs_dim, int action_dim, std::vector<int> hidden,
                        bool first_layer_norm, int atom_count, Rng& rng) {
    CriticNet c;
    c.spec.input_dim = obs_dim + action_dim;
    c.spec.hidden = std::move(hidden);
    c.spec.output_dim = atom_count;
    c.spec.first_layer_norm = first_layer_norm;
    c.spec.validate();
    c.obs_dim = obs_dim;
    c.action_dim = action_dim;
    c.params = random_init(c.spec, rng);
    return c;
  }

  Vec logits(const Vec& obs, const Vec& action, MlpWorkspace& ws) const {
    Vec in(obs_dim + action_dim);
    std::copy(obs.begin(), obs.end(), in.begin());
    std::copy(action.begin(), action.end(), in.begin() + obs_dim);
    return mlp_forward(spec, params, in, ws);
  }

  // Hoisted first-layer observation product, reused when scoring many
  // candidate actions at one state (the E-step's 20 samples).
  struct ObsCache {
    Vec pre0;  // W0[:, :obs_dim] * obs + b0
  };

  ObsCache cache_obs(const Vec& obs) const {
    ObsCache c;
    const Matrix& w0 = params.w[0];
    c.pre0.assign(w0.rows, 0.0);
    for (int r = 0; r < w0.rows; ++r) {
      const double* wr = w0.row(r);
      double acc = params.b[0][r];
      for (int k = 0; k < obs_dim; ++k) acc += wr[k] * obs[k];
      c.pre0[r] = acc;
    }
    return c;
  }

  // Forward from the cached layer-0 pre-activation; no workspace retained.
  Vec logits_cached(const ObsCache& cache, const Vec& action) const {
    const int layers = spec.layer_count();
    Vec z = cache.pre0;
    const Matrix& w0 = params.w[0];
    for (int r = 0; r < w0.rows; ++r) {
      const double* wr = w0.row(r) + obs_dim;
      double acc = 0.0;
      for (int k = 0; k < action_dim; ++k) acc += wr[k] * action[k];
      z[r] += acc;
    }
    Vec a(z.size());
    const size_t n = z.size();
    if (spec.first_layer_norm) {
      double mean = 0.0;
      for (double v : z) mean += v;
      mean /= static_cast<double>(n);
      double var = 0.0;
      for (double v : z) var += (v - mean) * (v - mean);
      var /= static_cast<double>(n);
      const double denom = std::sqrt(var) + kLayerNormEps;
      for (size_t k = 0; k < n; ++k)
        a[k] = std::tanh(params.ln_gain[k] * (z[k] - mean) / denom + params.ln_offset[k]);
    } else {
      for (size_t k = 0; k < n; ++k) a[k] = elu(z[k]);
    }
    Vec cur = std::move(a);
    for (int i = 1; i < layers; ++i) {
      Vec next(spec.layer_out(i), 0.0);
      matvec(params.w[i], cur.data(), next.data());
      for (int r = 0; r < spec.layer_out(i); ++r) next[r] += params.b[i][r];
      if (i < layers - 1)
        for (double& v : next) v = elu(v);
      cur = std::move(next);
    }
    return cur;
  }

  double expected_q(const ObsCache& cache, const Vec& action, const Vec& grid) const {
    const Vec p = softmax(logits_cached(cache, action));
    double acc = 0.0;
    for (size_t i = 0; i < p.size(); ++i) acc += p[i] * grid[i];
    return acc;
  }
};

}  // namespace pitchrl
