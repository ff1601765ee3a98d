#pragma once

#include <cmath>
#include <vector>

#include "pitchrl/numcore/matrix.hpp"

namespace pitchrl {

// Uniform atom grid including both endpoints.
inline Vec atom_grid(double support_min, double support_max, int atom_count) {
  if (atom_count < 2) throw ConfigError("atom_grid: atom_count must be >= 2");
  if (!(support_max > support_min))
    throw ConfigError("atom_grid: support_max must exceed support_min");
  Vec grid(atom_count);
  const double spacing = (support_max - support_min) / (atom_count - 1);
  for (int i = 0; i < atom_count; ++i) grid[i] = support_min + spacing * i;
  grid.back() = support_max;
  return grid;
}

struct CategoricalValue {
  Vec p;  // probabilities over the canonical grid

  double expected(const Vec& grid) const {
    double acc = 0.0;
    for (size_t i = 0; i < p.size(); ++i) acc += p[i] * grid[i];
    return acc;
  }
};

inline CategoricalValue delta_at(double value, const Vec& grid);

// Project point masses (values[i], weights[i]) onto the grid: each value's
// mass is split linearly between its two neighboring atoms; out-of-support
// values are clamped to the edge atoms.
inline Vec categorical_project(const Vec& values, const Vec& weights, const Vec& grid) {
  const int n = static_cast<int>(grid.size());
  const double vmin = grid.front();
  const double vmax = grid.back();
  const double spacing = (vmax - vmin) / (n - 1);
  Vec out(n, 0.0);
  for (size_t i = 0; i < values.size(); ++i) {
    const double w = weights[i];
    if (w == 0.0) continue;
    const double z = clamp(values[i], vmin, vmax);
    const double b = (z - vmin) / spacing;
    int lo = static_cast<int>(std::floor(b));
    if (lo >= n - 1) lo = n - 2;
    const int hi = lo + 1;
    const double frac = b - lo;
    out[lo] += w * (1.0 - frac);
    out[hi] += w * frac;
  }
  return out;
}

inline CategoricalValue delta_at(double value, const Vec& grid) {
  Vec v{value}, w{1.0};
  return CategoricalValue{categorical_project(v, w, grid)};
}

// Transform the bootstrap atoms through the n-step return
//   z -> sum_k gamma^k r_k + gamma^n * z,
// truncated at the first terminal (discount flag 0), then re-project.
inline CategoricalValue n_step_distributional_target(const Vec& rewards,
                                                     const Vec& discount_flags,
                                                     const CategoricalValue& bootstrap,
                                                     double gamma, const Vec& grid) {
  double base = 0.0;
  double scale = 1.0;
  bool terminated = false;
  for (size_t k = 0; k < rewards.size(); ++k) {
    base += scale * rewards[k];
    if (discount_flags[k] == 0.0) {
      terminated = true;
      break;
    }
    scale *= gamma;
  }
  if (terminated) {
    return delta_at(base, grid);
  }
  Vec values(grid.size());
  for (size_t i = 0; i < grid.size(); ++i) values[i] = base + scale * grid[i];
  return CategoricalValue{categorical_project(values, bootstrap.p, grid)};
}

inline double expected_value(const CategoricalValue& v, const Vec& grid) {
  return v.expected(grid);
}

inline Vec softmax(const Vec& logits) {
  double mx = logits[0];
  for (double x : logits) mx = std::max(mx, x);
  Vec out(logits.size());
  double sum = 0.0;
  for (size_t i = 0; i < logits.size(); ++i) {
    out[i] = std::exp(logits[i] - mx);
    sum += out[i];
  }
  for (double& x : out) x /= sum;
  return out;
}

inline double cross_entropy(const Vec& target_p, const Vec& q) {
  double acc = 0.0;
  for (size_t i = 0; i < target_p.size(); ++i)
    if (target_p[i] > 0.0) acc -= target_p[i] * std::log(std::max(q[i], 1e-300));
  return acc;
}

}  // namespace pitchrl
