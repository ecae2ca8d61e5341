// SPDX-License-Identifier: Apache-2.0
#pragma once

namespace gsgd::refcheck {

// Reference error-function values used only to verify the production
// implementation; computed by a different route (all-positive Maclaurin
// series with exp rescaling, and a Lentz continued fraction for the
// complement) in extended precision.
long double erf_reference(long double t);
long double erfc_reference(long double t);

}  // namespace gsgd::refcheck
