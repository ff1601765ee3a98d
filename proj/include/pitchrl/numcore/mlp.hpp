#pragma once

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "pitchrl/numcore/matrix.hpp"
#include "pitchrl/numcore/rng.hpp"

namespace pitchrl {

enum class Activation { Elu };

struct MlpSpec {
  int input_dim = 0;
  std::vector<int> hidden;
  int output_dim = 0;
  bool first_layer_norm = false;
  Activation activation = Activation::Elu;

  int layer_count() const { return static_cast<int>(hidden.size()) + 1; }

  int layer_in(int layer) const {
    return layer == 0 ? input_dim : hidden[layer - 1];
  }
  int layer_out(int layer) const {
    return layer == static_cast<int>(hidden.size()) ? output_dim : hidden[layer];
  }

  void validate() const {
    if (input_dim < 1 || output_dim < 1)
      throw ConfigError("MlpSpec: input/output dims must be >= 1");
    for (int h : hidden)
      if (h < 1) throw ConfigError("MlpSpec: hidden widths must be >= 1");
    if (first_layer_norm && (hidden.empty() || hidden[0] < 2))
      throw ConfigError("MlpSpec: layer norm needs a first hidden layer of width >= 2");
  }

  bool operator==(const MlpSpec& o) const {
    return input_dim == o.input_dim && hidden == o.hidden &&
           output_dim == o.output_dim && first_layer_norm == o.first_layer_norm;
  }
};

struct MlpParams {
  std::vector<Matrix> w;       // layer i: (out x in)
  std::vector<Vec> b;          // layer i bias
  Vec ln_gain, ln_offset;      // first-layer norm, if enabled

  static MlpParams zeros(const MlpSpec& spec) {
    MlpParams p;
    const int n = spec.layer_count();
    p.w.reserve(n);
    p.b.reserve(n);
    for (int i = 0; i < n; ++i) {
      p.w.emplace_back(spec.layer_out(i), spec.layer_in(i));
      p.b.emplace_back(spec.layer_out(i), 0.0);
    }
    if (spec.first_layer_norm) {
      p.ln_gain.assign(spec.hidden[0], 0.0);
      p.ln_offset.assign(spec.hidden[0], 0.0);
    }
    return p;
  }

  void scale_by(double k) {
    visit([k](Vec& a) { for (double& x : a) x *= k; });
  }

  // Fixed array order: w0, b0, w1, b1, ..., ln_gain, ln_offset. This order
  // is the serialization contract for checkpoints and the Adam layout.
  template <class F>
  void visit(F&& f) {
    for (size_t i = 0; i < w.size(); ++i) {
      f(w[i].v);
      f(b[i]);
    }
    if (!ln_gain.empty()) {
      f(ln_gain);
      f(ln_offset);
    }
  }
  template <class F>
  void visit(F&& f) const {
    for (size_t i = 0; i < w.size(); ++i) {
      f(w[i].v);
      f(b[i]);
    }
    if (!ln_gain.empty()) {
      f(ln_gain);
      f(ln_offset);
    }
  }

  size_t count() const {
    size_t n = 0;
    visit([&n](const Vec& a) { n += a.size(); });
    return n;
  }

  bool finite() const {
    bool ok = true;
    visit([&ok](const Vec& a) { ok = ok && all_finite(a); });
    return ok;
  }
};

// Truncated-normal fan-in init for weights, zero biases.
inline MlpParams random_init(const MlpSpec& spec, Rng& rng) {
  MlpParams p = MlpParams::zeros(spec);
  for (double& g : p.ln_gain) g = 1.0;
  for (size_t i = 0; i < p.w.size(); ++i) {
    const double stddev = 1.0 / std::sqrt(static_cast<double>(p.w[i].cols));
    for (double& x : p.w[i].v) {
      double z;
      do {
        z = rng.normal();
      } while (std::fabs(z) > 2.0);
      x = stddev * z;
    }
  }
  return p;
}

inline double elu(double z) { return z > 0.0 ? z : std::expm1(z); }
inline double elu_grad(double z, double fz) { return z > 0.0 ? 1.0 : fz + 1.0; }

constexpr double kLayerNormEps = 1e-6;

// tanh(gain * normalize(x) + offset), normalize = (x - mean) / (stddev + eps)
// with the population standard deviation.
inline Vec layer_norm_tanh(const Vec& x, const Vec& gain, const Vec& offset) {
  if (x.size() < 2) throw ConfigError("layer_norm_tanh: input length must be >= 2");
  const size_t n = x.size();
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= static_cast<double>(n);
  double var = 0.0;
  for (double v : x) var += (v - mean) * (v - mean);
  var /= static_cast<double>(n);
  const double denom = std::sqrt(var) + kLayerNormEps;
  Vec out(n);
  for (size_t i = 0; i < n; ++i)
    out[i] = std::tanh(gain[i] * (x[i] - mean) / denom + offset[i]);
  return out;
}

// Per-layer intermediates kept for the backward pass.
struct MlpWorkspace {
  Vec input;
  std::vector<Vec> pre;   // z_i, one per layer (last entry = network output)
  std::vector<Vec> act;   // post-activation per hidden layer
  Vec ln_center;          // z0 - mean
  Vec ln_norm;            // (z0 - mean) / (stddev + eps)
  Vec ln_arg;             // gain * norm + offset (pre-tanh)
  double ln_std = 0.0;
};

inline const Vec& mlp_forward(const MlpSpec& spec, const MlpParams& params,
                              const Vec& input, MlpWorkspace& ws) {
  if (static_cast<int>(input.size()) != spec.input_dim)
    throw ConfigError("mlp_forward: input length " + std::to_string(input.size()) +
                      " != spec input_dim " + std::to_string(spec.input_dim));
  const int layers = spec.layer_count();
  ws.input = input;
  ws.pre.resize(layers);
  ws.act.resize(spec.hidden.size());

  const Vec* cur = &ws.input;
  for (int i = 0; i < layers; ++i) {
    Vec& z = ws.pre[i];
    z.assign(spec.layer_out(i), 0.0);
    matvec(params.w[i], cur->data(), z.data());
    for (int r = 0; r < spec.layer_out(i); ++r) z[r] += params.b[i][r];
    if (i == layers - 1) break;  // linear output head

    Vec& a = ws.act[i];
    const size_t n = z.size();
    a.resize(n);
    if (i == 0 && spec.first_layer_norm) {
      double mean = 0.0;
      for (double v : z) mean += v;
      mean /= static_cast<double>(n);
      ws.ln_center.resize(n);
      ws.ln_norm.resize(n);
      ws.ln_arg.resize(n);
      double var = 0.0;
      for (size_t k = 0; k < n; ++k) {
        ws.ln_center[k] = z[k] - mean;
        var += ws.ln_center[k] * ws.ln_center[k];
      }
      var /= static_cast<double>(n);
      ws.ln_std = std::sqrt(var);
      const double denom = ws.ln_std + kLayerNormEps;
      for (size_t k = 0; k < n; ++k) {
        ws.ln_norm[k] = ws.ln_center[k] / denom;
        ws.ln_arg[k] = params.ln_gain[k] * ws.ln_norm[k] + params.ln_offset[k];
        a[k] = std::tanh(ws.ln_arg[k]);
      }
    } else {
      for (size_t k = 0; k < n; ++k) a[k] = elu(z[k]);
    }
    cur = &a;
  }
  return ws.pre.back();
}

// Reverse mode for upstream^T * output. Gradients are accumulated (+=) into
// `grads`; pass a zeroed MlpParams to get plain derivatives. `input_grad`
// (optional) receives d(upstream^T y)/d(input), overwritten.
inline void mlp_backward(const MlpSpec& spec, const MlpParams& params,
                         const MlpWorkspace& ws, const Vec& upstream,
                         MlpParams& grads, Vec* input_grad = nullptr) {
  if (static_cast<int>(upstream.size()) != spec.output_dim)
    throw ConfigError("mlp_backward: upstream length != output_dim");
  const int layers = spec.layer_count();
  Vec delta = upstream;  // gradient w.r.t. pre-activation of current layer
  for (int i = layers - 1; i >= 0; --i) {
    const Vec& below = (i == 0) ? ws.input : ws.act[i - 1];
    outer_acc(grads.w[i], delta.data(), below.data());
    for (size_t r = 0; r < delta.size(); ++r) grads.b[i][r] += delta[r];

    Vec prev(spec.layer_in(i), 0.0);
    matvec_transpose_acc(params.w[i], delta.data(), prev.data());
    if (i == 0) {
      if (input_grad) *input_grad = std::move(prev);
      return;
    }

    // chain through the activation of layer i-1
    const int j = i - 1;
    if (j == 0 && spec.first_layer_norm) {
      const size_t n = prev.size();
      Vec darg(n);
      for (size_t k = 0; k < n; ++k) {
        const double t = ws.act[0][k];
        darg[k] = prev[k] * (1.0 - t * t);
        grads.ln_offset[k] += darg[k];
        grads.ln_gain[k] += darg[k] * ws.ln_norm[k];
      }
      // back through normalize: n_k = c_k / (s + eps), c = z - mean(z)
      const double denom = ws.ln_std + kLayerNormEps;
      Vec u(n);
      double u_mean = 0.0, uc_sum = 0.0;
      for (size_t k = 0; k < n; ++k) {
        u[k] = darg[k] * params.ln_gain[k];
        u_mean += u[k];
        uc_sum += u[k] * ws.ln_center[k];
      }
      u_mean /= static_cast<double>(n);
      delta.assign(n, 0.0);
      const double s = ws.ln_std;
      const double corr = (s > 0.0)
          ? uc_sum / (s * static_cast<double>(n) * denom * denom)
          : 0.0;
      for (size_t k = 0; k < n; ++k)
        delta[k] = (u[k] - u_mean) / denom - ws.ln_center[k] * corr;
    } else {
      delta.resize(prev.size());
      for (size_t k = 0; k < prev.size(); ++k)
        delta[k] = prev[k] * elu_grad(ws.pre[j][k], ws.act[j][k]);
    }
  }
}

// Convenience wrappers matching the library-level operation signatures.
inline Vec mlp_forward(const MlpSpec& spec, const MlpParams& params, const Vec& input) {
  MlpWorkspace ws;
  return mlp_forward(spec, params, input, ws);
}

inline MlpParams mlp_gradients(const MlpSpec& spec, const MlpParams& params,
                               const Vec& input, const Vec& upstream,
                               Vec* input_grad = nullptr) {
  MlpWorkspace ws;
  mlp_forward(spec, params, input, ws);
  MlpParams grads = MlpParams::zeros(spec);
  mlp_backward(spec, params, ws, upstream, grads, input_grad);
  return grads;
}

}  // namespace pitchrl
