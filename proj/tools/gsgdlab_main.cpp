// SPDX-License-Identifier: Apache-2.0
//
// gsgdlab: seeded experiments comparing greedy sample selection by
// approximate loss against uniform selection, plus the numerical checks
// behind the convergence guarantees. Subcommands: race, verify, pj, sift.

#include <cstdio>
#include <exception>

#include <CLI11.hpp>

#include "gsgd/commands.hpp"
#include "gsgd/config.hpp"
#include "gsgd/version.hpp"

int main(int argc, char** argv) {
  CLI::App app{"gsgdlab: greedy-selection SGD laboratory"};
  app.set_version_flag("--version", gsgd::kArtifactVersion);
  app.require_subcommand(1);

  gsgd::harness::CommandOptions options;
  int (*entry)(const gsgd::harness::CommandOptions&) = nullptr;

  const auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", options.config_path, "JSON experiment config")->required();
    sub->add_option("--out", options.out_dir, "output directory (default: .)");
    sub->add_option("--seed", options.seed, "global seed (overrides config)")
        ->each([&](const std::string&) { options.seed_given = true; });
    sub->add_flag("--strict", options.strict, "treat WARN as failure");
  };

  auto* race = app.add_subcommand("race", "paired optimizer head-to-head");
  add_common(race);
  race->callback([&] { entry = gsgd::harness::cmd_race; });

  auto* verify = app.add_subcommand("verify", "numerical checks of the convergence results");
  add_common(verify);
  verify->callback([&] { entry = gsgd::harness::cmd_verify; });

  auto* pj = app.add_subcommand("pj", "argmax-preservation probability table");
  add_common(pj);
  pj->callback([&] { entry = gsgd::harness::cmd_pj; });

  auto* sift = app.add_subcommand("sift", "early-exit batch filtering at toy scale");
  add_common(sift);
  sift->callback([&] { entry = gsgd::harness::cmd_sift; });

  CLI11_PARSE(app, argc, argv);

  try {
    return entry(options);
  } catch (const gsgd::harness::ConfigError& e) {
    std::fprintf(stderr, "%s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
