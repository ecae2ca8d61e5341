// SPDX-License-Identifier: Apache-2.0
//
// NEON kernels (aarch64). float64x2_t is two lanes wide, so the canonical
// four reduction lanes live in a pair of registers: acc01 holds lanes {0,1}
// and acc23 holds lanes {2,3}. The combine order matches the scalar
// reference, keeping results bitwise identical.

#include "gsgd/kernels.hpp"

#if defined(__aarch64__)

#include <arm_neon.h>

#include <cmath>

namespace gsgd::kernels {
namespace {

inline double combine4(float64x2_t acc01, float64x2_t acc23, double lane_tail[4]) {
  double lane[4] = {vgetq_lane_f64(acc01, 0), vgetq_lane_f64(acc01, 1),
                    vgetq_lane_f64(acc23, 0), vgetq_lane_f64(acc23, 1)};
  for (int j = 0; j < 4; ++j) lane[j] += lane_tail[j];
  return (lane[0] + lane[1]) + (lane[2] + lane[3]);
}

double dot_neon(const double* a, const double* b, std::size_t n) {
  float64x2_t acc01 = vdupq_n_f64(0.0), acc23 = vdupq_n_f64(0.0);
  std::size_t i = 0;
  const std::size_t n4 = n & ~std::size_t(3);
  for (; i < n4; i += 4) {
    acc01 = vfmaq_f64(acc01, vld1q_f64(a + i), vld1q_f64(b + i));
    acc23 = vfmaq_f64(acc23, vld1q_f64(a + i + 2), vld1q_f64(b + i + 2));
  }
  double tail[4] = {0.0, 0.0, 0.0, 0.0};
  for (std::size_t j = 0; i < n; ++i, ++j) tail[j] = std::fma(a[i], b[i], tail[j]);
  return combine4(acc01, acc23, tail);
}

double sum_neon(const double* x, std::size_t n) {
  float64x2_t acc01 = vdupq_n_f64(0.0), acc23 = vdupq_n_f64(0.0);
  std::size_t i = 0;
  const std::size_t n4 = n & ~std::size_t(3);
  for (; i < n4; i += 4) {
    acc01 = vaddq_f64(acc01, vld1q_f64(x + i));
    acc23 = vaddq_f64(acc23, vld1q_f64(x + i + 2));
  }
  double tail[4] = {0.0, 0.0, 0.0, 0.0};
  for (std::size_t j = 0; i < n; ++i, ++j) tail[j] += x[i];
  return combine4(acc01, acc23, tail);
}

double sum_sq_neon(const double* x, std::size_t n) {
  float64x2_t acc01 = vdupq_n_f64(0.0), acc23 = vdupq_n_f64(0.0);
  std::size_t i = 0;
  const std::size_t n4 = n & ~std::size_t(3);
  for (; i < n4; i += 4) {
    const float64x2_t v0 = vld1q_f64(x + i);
    const float64x2_t v1 = vld1q_f64(x + i + 2);
    acc01 = vfmaq_f64(acc01, v0, v0);
    acc23 = vfmaq_f64(acc23, v1, v1);
  }
  double tail[4] = {0.0, 0.0, 0.0, 0.0};
  for (std::size_t j = 0; i < n; ++i, ++j) tail[j] = std::fma(x[i], x[i], tail[j]);
  return combine4(acc01, acc23, tail);
}

double max_neon(const double* x, std::size_t n) {
  if (n < 4) {
    double m = x[0];
    for (std::size_t i = 1; i < n; ++i)
      if (x[i] > m) m = x[i];
    return m;
  }
  float64x2_t acc = vld1q_f64(x);
  std::size_t i = 2;
  const std::size_t n2 = n & ~std::size_t(1);
  for (; i < n2; i += 2) acc = vmaxq_f64(acc, vld1q_f64(x + i));
  double m = vgetq_lane_f64(acc, 0);
  const double m1 = vgetq_lane_f64(acc, 1);
  if (m1 > m) m = m1;
  for (; i < n; ++i)
    if (x[i] > m) m = x[i];
  return m;
}

double max_sq_neon(const double* x, std::size_t n) {
  if (n < 4) {
    double m = x[0] * x[0];
    for (std::size_t i = 1; i < n; ++i) {
      const double t = x[i] * x[i];
      if (t > m) m = t;
    }
    return m;
  }
  float64x2_t v0 = vld1q_f64(x);
  float64x2_t acc = vmulq_f64(v0, v0);
  std::size_t i = 2;
  const std::size_t n2 = n & ~std::size_t(1);
  for (; i < n2; i += 2) {
    const float64x2_t v = vld1q_f64(x + i);
    acc = vmaxq_f64(acc, vmulq_f64(v, v));
  }
  double m = vgetq_lane_f64(acc, 0);
  const double m1 = vgetq_lane_f64(acc, 1);
  if (m1 > m) m = m1;
  for (; i < n; ++i) {
    const double t = x[i] * x[i];
    if (t > m) m = t;
  }
  return m;
}

std::size_t argmax_neon(const double* x, std::size_t n) {
  const double m = max_neon(x, n);
  for (std::size_t i = 0; i < n; ++i)
    if (x[i] == m) return i;
  return n - 1;  // unreachable for NaN-free input
}

void axpy_neon(double alpha, const double* x, double* y, std::size_t n) {
  const float64x2_t va = vdupq_n_f64(alpha);
  std::size_t i = 0;
  const std::size_t n2 = n & ~std::size_t(1);
  for (; i < n2; i += 2) vst1q_f64(y + i, vfmaq_f64(vld1q_f64(y + i), va, vld1q_f64(x + i)));
  for (; i < n; ++i) y[i] = std::fma(alpha, x[i], y[i]);
}

void scale_neon(double* x, double s, std::size_t n) {
  const float64x2_t vs = vdupq_n_f64(s);
  std::size_t i = 0;
  const std::size_t n2 = n & ~std::size_t(1);
  for (; i < n2; i += 2) vst1q_f64(x + i, vmulq_f64(vld1q_f64(x + i), vs));
  for (; i < n; ++i) x[i] *= s;
}

}  // namespace

const Ops& neon_ops() {
  static const Ops ops{"neon",      dot_neon, sum_neon,  sum_sq_neon, max_neon,
                       max_sq_neon, argmax_neon, axpy_neon, scale_neon};
  return ops;
}

}  // namespace gsgd::kernels

#endif  // aarch64
