#pragma once

#include <cmath>
#include <vector>

#include "pitchrl/numcore/mlp.hpp"

namespace pitchrl {

constexpr double kAdamBeta1 = 0.9;
constexpr double kAdamBeta2 = 0.999;
constexpr double kAdamEps = 1e-8;

// Moment accumulators laid out like an MlpParams (same visit order).
struct AdamState {
  std::vector<Vec> m, v;
  long long step = 0;

  static AdamState like(const MlpParams& p) {
    AdamState s;
    p.visit([&s](const Vec& a) {
      s.m.emplace_back(a.size(), 0.0);
      s.v.emplace_back(a.size(), 0.0);
    });
    return s;
  }
};

// One bias-corrected Adam update. Returns false (no change, step not
// counted) when the gradient contains a non-finite value; the caller logs it.
inline bool adam_step(AdamState& state, MlpParams& params, const MlpParams& grads,
                      double lr) {
  if (!grads.finite()) return false;
  state.step += 1;
  const double bc1 = 1.0 - std::pow(kAdamBeta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(kAdamBeta2, static_cast<double>(state.step));
  size_t idx = 0;
  auto g_it = [&](const Vec& g, Vec& p) {
    Vec& m = state.m[idx];
    Vec& v = state.v[idx];
    for (size_t i = 0; i < g.size(); ++i) {
      m[i] = kAdamBeta1 * m[i] + (1.0 - kAdamBeta1) * g[i];
      v[i] = kAdamBeta2 * v[i] + (1.0 - kAdamBeta2) * g[i] * g[i];
      const double mhat = m[i] / bc1;
      const double vhat = v[i] / bc2;
      p[i] -= lr * mhat / (std::sqrt(vhat) + kAdamEps);
    }
    ++idx;
  };
  // walk both structures in the shared visit order
  std::vector<Vec*> pv;
  params.visit([&pv](Vec& a) { pv.push_back(&a); });
  size_t k = 0;
  grads.visit([&](const Vec& g) { g_it(g, *pv[k]); ++k; });
  return true;
}

inline void accumulate_params(MlpParams& dst, const MlpParams& src) {
  std::vector<Vec*> d;
  dst.visit([&d](Vec& a) { d.push_back(&a); });
  size_t k = 0;
  src.visit([&](const Vec& g) {
    Vec& a = *d[k++];
    for (size_t z = 0; z < g.size(); ++z) a[z] += g[z];
  });
}

// Scalar Adam for dual variables and distillation weights.
struct ScalarAdam {
  double m = 0.0;
  double v = 0.0;
  long long step = 0;

  // Returns the update to subtract from the parameter.
  double update(double g, double lr) {
    step += 1;
    m = kAdamBeta1 * m + (1.0 - kAdamBeta1) * g;
    v = kAdamBeta2 * v + (1.0 - kAdamBeta2) * g * g;
    const double mhat = m / (1.0 - std::pow(kAdamBeta1, static_cast<double>(step)));
    const double vhat = v / (1.0 - std::pow(kAdamBeta2, static_cast<double>(step)));
    return lr * mhat / (std::sqrt(vhat) + kAdamEps);
  }
};

}  // namespace pitchrl
