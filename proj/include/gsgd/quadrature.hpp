// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <functional>

namespace gsgd::numerics {

struct QuadratureResult {
  double value = 0.0;
  double error_estimate = 0.0;  // achieved absolute-error estimate
  std::size_t panels = 0;
  bool converged = false;
};

// Adaptive Gauss-Kronrod (G7/K15) integration of f over the finite
// interval [a, b]. Subdivides the panel with the largest error estimate
// until the total estimate drops below abs_tol or max_panels is reached.
QuadratureResult integrate_finite(const std::function<double(double)>& f, double a, double b,
                                  double abs_tol, std::size_t max_panels = 4000);

// Integral of f over [0, inf) for integrands with at-least-Gaussian decay.
// Maps through y = tan(u) onto [0, pi/2) and runs the adaptive rule there.
// A non-converged result carries the best estimate and achieved tolerance.
QuadratureResult integrate_semi_infinite(const std::function<double(double)>& f, double abs_tol,
                                         std::size_t max_panels = 4000);

}  // namespace gsgd::numerics
