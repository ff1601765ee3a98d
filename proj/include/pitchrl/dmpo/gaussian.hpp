#pragma once

#include <cmath>
#include <vector>

#include "pitchrl/numcore/matrix.hpp"
#include "pitchrl/numcore/rng.hpp"

namespace pitchrl {

constexpr double kLog2Pi = 1.8378770664093454836;

// Diagonal Gaussian given by mean and variance vectors.
struct DiagGaussian {
  Vec mean;
  Vec var;

  int dim() const { return static_cast<int>(mean.size()); }

  Vec sample(Rng& rng) const {
    Vec a(mean.size());
    for (size_t i = 0; i < mean.size(); ++i)
      a[i] = mean[i] + std::sqrt(var[i]) * rng.normal();
    return a;
  }
};

inline double gaussian_log_prob(const Vec& mean, const Vec& var, const Vec& action) {
  double acc = 0.0;
  for (size_t i = 0; i < mean.size(); ++i) {
    const double d = action[i] - mean[i];
    acc += -0.5 * (kLog2Pi + std::log(var[i]) + d * d / var[i]);
  }
  return acc;
}

// KL(p || q) for diagonal Gaussians.
inline double gaussian_kl(const DiagGaussian& p, const DiagGaussian& q) {
  double acc = 0.0;
  for (int i = 0; i < p.dim(); ++i) {
    const double r = p.var[i] / q.var[i];
    const double d = p.mean[i] - q.mean[i];
    acc += 0.5 * (r - 1.0 - std::log(r) + d * d / q.var[i]);
  }
  return acc;
}

// Decoupled mean/covariance KL used by the decoupled trust-region constraints:
//   kl_mean = KL((mean_p, var_q) || (mean_q, var_q))
//   kl_cov  = KL((mean_q, var_p) || (mean_q, var_q))
struct DecoupledKl {
  double mean = 0.0;
  double cov = 0.0;
};

inline DecoupledKl gaussian_kl_decoupled(const DiagGaussian& p, const DiagGaussian& q) {
  DecoupledKl kl;
  for (int i = 0; i < p.dim(); ++i) {
    const double d = p.mean[i] - q.mean[i];
    kl.mean += 0.5 * d * d / q.var[i];
    const double r = p.var[i] / q.var[i];
    kl.cov += 0.5 * (r - 1.0 - std::log(r));
  }
  return kl;
}

}  // namespace pitchrl
