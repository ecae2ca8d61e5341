// SPDX-License-Identifier: Apache-2.0
#pragma once

namespace gsgd::numerics {

// Gauss error function and its complement, accurate to ~1 ulp over the
// double range (rational minimax approximations after W. J. Cody).
double erf(double t);
double erfc(double t);

// Increasing logistic 1/(1 + e^{-z}), stable over the full double range.
double sigmoid(double z);

}  // namespace gsgd::numerics
