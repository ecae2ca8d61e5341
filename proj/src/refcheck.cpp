// SPDX-License-Identifier: Apache-2.0

#include "gsgd/refcheck.hpp"

#include <cmath>

namespace gsgd::refcheck {
namespace {

constexpr long double kTwoOverSqrtPi = 1.1283791670955125738961589031215451716881L;
constexpr long double kSqrtPi = 1.7724538509055160272981674833411451827975L;

// erf(t) = (2/sqrt(pi)) e^{-t^2} sum_k t (2t^2)^k / (2k+1)!!  — every term
// positive, so no cancellation; fine through t ~ 7 in long double.
long double erf_series(long double t) {
  const long double tt2 = 2.0L * t * t;
  long double term = t;
  long double sum = term;
  for (int k = 1; k < 500; ++k) {
    term *= tt2 / static_cast<long double>(2 * k + 1);
    sum += term;
    if (term < 1e-25L * sum) break;
  }
  return kTwoOverSqrtPi * std::exp(-t * t) * sum;
}

// erfc(t) = e^{-t^2}/sqrt(pi) * 1/(t + (1/2)/(t + 1/(t + (3/2)/(t + ...))))
// evaluated by the modified Lentz algorithm; solid for t >= 1.
long double erfc_cf(long double t) {
  const long double tiny = 1e-40L;
  long double f = t;
  long double c = f;
  long double d = 0.0L;
  for (int n = 1; n < 500; ++n) {
    const long double a = static_cast<long double>(n) / 2.0L;
    d = t + a * d;
    if (d == 0.0L) d = tiny;
    c = t + a / c;
    if (c == 0.0L) c = tiny;
    d = 1.0L / d;
    const long double delta = c * d;
    f *= delta;
    if (std::fabs(delta - 1.0L) < 1e-25L) break;
  }
  return std::exp(-t * t) / (kSqrtPi * f);
}

}  // namespace

long double erf_reference(long double t) {
  if (t < 0.0L) return -erf_reference(-t);
  if (t >= 6.5L) return 1.0L - erfc_cf(t);
  return erf_series(t);
}

long double erfc_reference(long double t) {
  if (t < 0.0L) return 2.0L - erfc_reference(-t);
  if (t < 1.0L) return 1.0L - erf_series(t);
  return erfc_cf(t);
}

}  // namespace gsgd::refcheck
