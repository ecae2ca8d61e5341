// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <vector>

namespace gsgd::kernels {

// Dense double-precision inner-loop kernels. Every operation has a scalar
// reference implementation and may have SIMD variants (AVX2 on x86-64, NEON
// on aarch64). All variants follow the same canonical 4-lane reduction order
// (lane j accumulates elements j, j+4, j+8, ...; lanes combined as
// (l0+l1)+(l2+l3)), so results are bitwise identical across backends.
struct Ops {
  const char* name;
  double (*dot)(const double* a, const double* b, std::size_t n);
  double (*sum)(const double* x, std::size_t n);
  double (*sum_sq)(const double* x, std::size_t n);
  double (*max)(const double* x, std::size_t n);       // n >= 1, NaN-free input
  double (*max_sq)(const double* x, std::size_t n);    // max of x_i^2, n >= 1
  std::size_t (*argmax)(const double* x, std::size_t n);  // lowest index wins ties
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);  // y += alpha*x
  void (*scale)(double* x, double s, std::size_t n);
};

const Ops& scalar_ops();
#if defined(__x86_64__) || defined(_M_X64)
const Ops& avx2_ops();
#endif
#if defined(__aarch64__)
const Ops& neon_ops();
#endif

// Backend picked at startup from CPU features; GSGD_KERNEL_BACKEND=scalar|avx2|neon
// overrides (used by the equivalence tests).
const Ops& active_ops();

// Every backend usable on this host, scalar first.
std::vector<const Ops*> available_backends();

inline double dot(const double* a, const double* b, std::size_t n) { return active_ops().dot(a, b, n); }
inline double sum(const double* x, std::size_t n) { return active_ops().sum(x, n); }
inline double sum_sq(const double* x, std::size_t n) { return active_ops().sum_sq(x, n); }
inline double max(const double* x, std::size_t n) { return active_ops().max(x, n); }
inline double max_sq(const double* x, std::size_t n) { return active_ops().max_sq(x, n); }
inline std::size_t argmax(const double* x, std::size_t n) { return active_ops().argmax(x, n); }
inline void axpy(double alpha, const double* x, double* y, std::size_t n) { active_ops().axpy(alpha, x, y, n); }
inline void scale(double* x, double s, std::size_t n) { active_ops().scale(x, s, n); }

}  // namespace gsgd::kernels
