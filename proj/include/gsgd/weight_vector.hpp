// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "gsgd/kernels.hpp"

namespace gsgd {

// Dense parameter vector w in R^d.
struct WeightVector {
  std::vector<double> values;

  WeightVector() = default;
  explicit WeightVector(std::size_t dim, double fill = 0.0) : values(dim, fill) {}
  explicit WeightVector(std::vector<double> v) : values(std::move(v)) {}

  std::size_t dim() const { return values.size(); }
  double& operator[](std::size_t i) { return values[i]; }
  double operator[](std::size_t i) const { return values[i]; }
  const double* data() const { return values.data(); }
  double* data() { return values.data(); }

  bool finite() const {
    for (double v : values)
      if (!std::isfinite(v)) return false;
    return true;
  }
};

inline void check_same_dim(const WeightVector& a, const WeightVector& b, const char* where) {
  if (a.dim() != b.dim()) throw std::invalid_argument(std::string(where) + ": dimension mismatch");
}

inline double dot(const WeightVector& a, const WeightVector& b) {
  check_same_dim(a, b, "dot");
  return kernels::dot(a.data(), b.data(), a.dim());
}

inline double norm_sq(const WeightVector& a) { return kernels::sum_sq(a.data(), a.dim()); }
inline double norm(const WeightVector& a) { return std::sqrt(norm_sq(a)); }

// y += alpha * x
inline void axpy(double alpha, const WeightVector& x, WeightVector& y) {
  check_same_dim(x, y, "axpy");
  kernels::axpy(alpha, x.data(), y.data(), y.dim());
}

inline WeightVector operator-(const WeightVector& a, const WeightVector& b) {
  check_same_dim(a, b, "operator-");
  WeightVector out = a;
  kernels::axpy(-1.0, b.data(), out.data(), out.dim());
  return out;
}

inline double distance(const WeightVector& a, const WeightVector& b) { return norm(a - b); }

}  // namespace gsgd
