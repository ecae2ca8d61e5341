// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>

namespace gsgd::harness {

struct CommandOptions {
  std::string config_path;
  std::string out_dir = ".";
  std::uint64_t seed = 0;
  bool seed_given = false;  // CLI --seed overrides any config seed
  bool strict = false;      // WARN fails the run
};

// Exit codes: 0 all checks pass (warnings allowed unless strict),
// 1 check failure or divergence, 2 configuration/validation error.
int cmd_race(const CommandOptions& options);
int cmd_verify(const CommandOptions& options);
int cmd_pj(const CommandOptions& options);
int cmd_sift(const CommandOptions& options);

}  // namespace gsgd::harness
