// SPDX-License-Identifier: Apache-2.0
#pragma once

namespace gsgd {
inline constexpr const char* kArtifactVersion = "0.1.0";
}
