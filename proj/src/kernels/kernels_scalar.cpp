// SPDX-License-Identifier: Apache-2.0
//
// Scalar reference kernels. These define the canonical result for every
// operation: the SIMD variants must reproduce them bit for bit.

#include "gsgd/kernels.hpp"

#include <cmath>

namespace gsgd::kernels {
namespace {

double dot_scalar(const double* a, const double* b, std::size_t n) {
  double lane[4] = {0.0, 0.0, 0.0, 0.0};
  std::size_t i = 0;
  const std::size_t n4 = n & ~std::size_t(3);
  for (; i < n4; i += 4) {
    lane[0] = std::fma(a[i], b[i], lane[0]);
    lane[1] = std::fma(a[i + 1], b[i + 1], lane[1]);
    lane[2] = std::fma(a[i + 2], b[i + 2], lane[2]);
    lane[3] = std::fma(a[i + 3], b[i + 3], lane[3]);
  }
  for (std::size_t j = 0; i < n; ++i, ++j) lane[j] = std::fma(a[i], b[i], lane[j]);
  return (lane[0] + lane[1]) + (lane[2] + lane[3]);
}

double sum_scalar(const double* x, std::size_t n) {
  double lane[4] = {0.0, 0.0, 0.0, 0.0};
  std::size_t i = 0;
  const std::size_t n4 = n & ~std::size_t(3);
  for (; i < n4; i += 4) {
    lane[0] += x[i];
    lane[1] += x[i + 1];
    lane[2] += x[i + 2];
    lane[3] += x[i + 3];
  }
  for (std::size_t j = 0; i < n; ++i, ++j) lane[j] += x[i];
  return (lane[0] + lane[1]) + (lane[2] + lane[3]);
}

double sum_sq_scalar(const double* x, std::size_t n) {
  double lane[4] = {0.0, 0.0, 0.0, 0.0};
  std::size_t i = 0;
  const std::size_t n4 = n & ~std::size_t(3);
  for (; i < n4; i += 4) {
    lane[0] = std::fma(x[i], x[i], lane[0]);
    lane[1] = std::fma(x[i + 1], x[i + 1], lane[1]);
    lane[2] = std::fma(x[i + 2], x[i + 2], lane[2]);
    lane[3] = std::fma(x[i + 3], x[i + 3], lane[3]);
  }
  for (std::size_t j = 0; i < n; ++i, ++j) lane[j] = std::fma(x[i], x[i], lane[j]);
  return (lane[0] + lane[1]) + (lane[2] + lane[3]);
}

double max_scalar(const double* x, std::size_t n) {
  double m = x[0];
  for (std::size_t i = 1; i < n; ++i)
    if (x[i] > m) m = x[i];
  return m;
}

double max_sq_scalar(const double* x, std::size_t n) {
  double m = x[0] * x[0];
  for (std::size_t i = 1; i < n; ++i) {
    const double t = x[i] * x[i];
    if (t > m) m = t;
  }
  return m;
}

std::size_t argmax_scalar(const double* x, std::size_t n) {
  std::size_t best = 0;
  double m = x[0];
  for (std::size_t i = 1; i < n; ++i) {
    if (x[i] > m) {
      m = x[i];
      best = i;
    }
  }
  return best;
}

void axpy_scalar(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] = std::fma(alpha, x[i], y[i]);
}

void scale_scalar(double* x, double s, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) x[i] *= s;
}

}  // namespace

const Ops& scalar_ops() {
  static const Ops ops{"scalar",    dot_scalar, sum_scalar,  sum_sq_scalar, max_scalar,
                       max_sq_scalar, argmax_scalar, axpy_scalar, scale_scalar};
  return ops;
}

}  // namespace gsgd::kernels
