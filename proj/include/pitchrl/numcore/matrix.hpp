#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace pitchrl {

using Vec = std::vector<double>;

struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

struct NumericError : std::runtime_error {
  explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

// Dense row-major matrix of doubles.
struct Matrix {
  int rows = 0;
  int cols = 0;
  Vec v;

  Matrix() = default;
  Matrix(int r, int c) : rows(r), cols(c), v(static_cast<size_t>(r) * c, 0.0) {}

  double& at(int r, int c) { return v[static_cast<size_t>(r) * cols + c]; }
  double at(int r, int c) const { return v[static_cast<size_t>(r) * cols + c]; }
  const double* row(int r) const { return v.data() + static_cast<size_t>(r) * cols; }
  double* row(int r) { return v.data() + static_cast<size_t>(r) * cols; }
};

// out = W x
inline void matvec(const Matrix& w, const double* x, double* out) {
  for (int r = 0; r < w.rows; ++r) {
    const double* wr = w.row(r);
    double acc = 0.0;
    for (int c = 0; c < w.cols; ++c) acc += wr[c] * x[c];
    out[r] = acc;
  }
}

// out += W^T u   (back-propagated input gradient)
inline void matvec_transpose_acc(const Matrix& w, const double* u, double* out) {
  for (int r = 0; r < w.rows; ++r) {
    const double* wr = w.row(r);
    const double ur = u[r];
    if (ur == 0.0) continue;
    for (int c = 0; c < w.cols; ++c) out[c] += wr[c] * ur;
  }
}

// dW += u x^T
inline void outer_acc(Matrix& dw, const double* u, const double* x) {
  for (int r = 0; r < dw.rows; ++r) {
    double* wr = dw.row(r);
    const double ur = u[r];
    if (ur == 0.0) continue;
    for (int c = 0; c < dw.cols; ++c) wr[c] += ur * x[c];
  }
}

inline double dot(const Vec& a, const Vec& b) {
  double acc = 0.0;
  for (size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

inline bool all_finite(const Vec& v) {
  for (double x : v)
    if (!std::isfinite(x)) return false;
  return true;
}

inline double clamp(double x, double lo, double hi) {
  return x < lo ? lo : (x > hi ? hi : x);
}

}  // namespace pitchrl
