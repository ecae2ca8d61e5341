// SPDX-License-Identifier: Apache-2.0
//
// AVX2 kernels. One __m256d accumulator holds the four canonical reduction
// lanes, so every intermediate matches the scalar reference exactly.
// This translation unit is compiled with -mavx2 -mfma; it must only be
// reached through the runtime dispatcher.

#include "gsgd/kernels.hpp"

#if defined(__x86_64__) || defined(_M_X64)

#include <immintrin.h>

#include <cmath>

namespace gsgd::kernels {
namespace {

inline double combine_lanes(__m256d acc, const double* x, std::size_t i, std::size_t n) {
  alignas(32) double lane[4];
  _mm256_store_pd(lane, acc);
  for (std::size_t j = 0; i < n; ++i, ++j) lane[j] += x[i];
  return (lane[0] + lane[1]) + (lane[2] + lane[3]);
}

double dot_avx2(const double* a, const double* b, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  const std::size_t n4 = n & ~std::size_t(3);
  for (; i < n4; i += 4)
    acc = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc);
  alignas(32) double lane[4];
  _mm256_store_pd(lane, acc);
  for (std::size_t j = 0; i < n; ++i, ++j) lane[j] = std::fma(a[i], b[i], lane[j]);
  return (lane[0] + lane[1]) + (lane[2] + lane[3]);
}

double sum_avx2(const double* x, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  const std::size_t n4 = n & ~std::size_t(3);
  for (; i < n4; i += 4) acc = _mm256_add_pd(acc, _mm256_loadu_pd(x + i));
  return combine_lanes(acc, x, i, n);
}

double sum_sq_avx2(const double* x, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  const std::size_t n4 = n & ~std::size_t(3);
  for (; i < n4; i += 4) {
    const __m256d v = _mm256_loadu_pd(x + i);
    acc = _mm256_fmadd_pd(v, v, acc);
  }
  alignas(32) double lane[4];
  _mm256_store_pd(lane, acc);
  for (std::size_t j = 0; i < n; ++i, ++j) lane[j] = std::fma(x[i], x[i], lane[j]);
  return (lane[0] + lane[1]) + (lane[2] + lane[3]);
}

double max_avx2(const double* x, std::size_t n) {
  if (n < 8) {
    double m = x[0];
    for (std::size_t i = 1; i < n; ++i)
      if (x[i] > m) m = x[i];
    return m;
  }
  __m256d acc = _mm256_loadu_pd(x);
  std::size_t i = 4;
  const std::size_t n4 = n & ~std::size_t(3);
  for (; i < n4; i += 4) acc = _mm256_max_pd(acc, _mm256_loadu_pd(x + i));
  alignas(32) double lane[4];
  _mm256_store_pd(lane, acc);
  double m = lane[0];
  for (int j = 1; j < 4; ++j)
    if (lane[j] > m) m = lane[j];
  for (; i < n; ++i)
    if (x[i] > m) m = x[i];
  return m;
}

double max_sq_avx2(const double* x, std::size_t n) {
  if (n < 8) {
    double m = x[0] * x[0];
    for (std::size_t i = 1; i < n; ++i) {
      const double t = x[i] * x[i];
      if (t > m) m = t;
    }
    return m;
  }
  __m256d v0 = _mm256_loadu_pd(x);
  __m256d acc = _mm256_mul_pd(v0, v0);
  std::size_t i = 4;
  const std::size_t n4 = n & ~std::size_t(3);
  for (; i < n4; i += 4) {
    const __m256d v = _mm256_loadu_pd(x + i);
    acc = _mm256_max_pd(acc, _mm256_mul_pd(v, v));
  }
  alignas(32) double lane[4];
  _mm256_store_pd(lane, acc);
  double m = lane[0];
  for (int j = 1; j < 4; ++j)
    if (lane[j] > m) m = lane[j];
  for (; i < n; ++i) {
    const double t = x[i] * x[i];
    if (t > m) m = t;
  }
  return m;
}

// Two passes: vector max, then first index equal to it. Equality is exact
// because the max came from the same array untouched.
std::size_t argmax_avx2(const double* x, std::size_t n) {
  if (n < 8) {
    std::size_t best = 0;
    double m = x[0];
    for (std::size_t i = 1; i < n; ++i)
      if (x[i] > m) {
        m = x[i];
        best = i;
      }
    return best;
  }
  const double m = max_avx2(x, n);
  const __m256d vm = _mm256_set1_pd(m);
  std::size_t i = 0;
  const std::size_t n4 = n & ~std::size_t(3);
  for (; i < n4; i += 4) {
    const int mask = _mm256_movemask_pd(_mm256_cmp_pd(_mm256_loadu_pd(x + i), vm, _CMP_EQ_OQ));
    if (mask) return i + static_cast<std::size_t>(__builtin_ctz(static_cast<unsigned>(mask)));
  }
  for (; i < n; ++i)
    if (x[i] == m) return i;
  return n - 1;  // unreachable for NaN-free input
}

void axpy_avx2(double alpha, const double* x, double* y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  const std::size_t n4 = n & ~std::size_t(3);
  for (; i < n4; i += 4)
    _mm256_storeu_pd(y + i, _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
  for (; i < n; ++i) y[i] = std::fma(alpha, x[i], y[i]);
}

void scale_avx2(double* x, double s, std::size_t n) {
  const __m256d vs = _mm256_set1_pd(s);
  std::size_t i = 0;
  const std::size_t n4 = n & ~std::size_t(3);
  for (; i < n4; i += 4) _mm256_storeu_pd(x + i, _mm256_mul_pd(_mm256_loadu_pd(x + i), vs));
  for (; i < n; ++i) x[i] *= s;
}

}  // namespace

const Ops& avx2_ops() {
  static const Ops ops{"avx2",      dot_avx2, sum_avx2,  sum_sq_avx2, max_avx2,
                       max_sq_avx2, argmax_avx2, axpy_avx2, scale_avx2};
  return ops;
}

}  // namespace gsgd::kernels

#endif  // x86-64
