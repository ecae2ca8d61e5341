// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "gsgd/optimizers.hpp"
#include "gsgd/problems.hpp"
#include "gsgd/rng.hpp"

namespace gsgd::harness {

using nlohmann::json;

enum class CheckStatus { Pass, Fail, Warn };
const char* status_name(CheckStatus s);

struct CheckRow {
  std::string params;
  double estimate = 0.0;
  double bound = 0.0;
  double std_error = 0.0;
  CheckStatus status = CheckStatus::Pass;
};

struct CheckResult {
  std::string name;
  CheckStatus status = CheckStatus::Pass;  // worst row status
  double wall_seconds = 0.0;
  std::vector<CheckRow> rows;
  json details;
};

// erf vs the independent reference on a 1e-3 grid of [0, 6], the two erf
// tail inequalities on {0, 0.1, ..., 5}, and the Gaussian half-line
// integral identity for t in {0.5, 1, sqrt 2, 3}.
CheckResult check_numerics_floor();

// estimate_Delta_R(R=2) against the closed form 1 + 2/pi on the default
// noisy instance, within 3 standard errors.
CheckResult check_delta2_closed_form(const problems::ProblemInstance& problem, std::int64_t n,
                                     const numerics::RngStream& rng);

// F^_{2,approx} / F^_2 >= p(sigma) - 3 SE over the sigma x zeta x probe-w
// grid (probes are at given distances from the minimizer).
CheckResult check_noise_bound_sweep(const problems::ProblemInstance& problem,
                                    const std::vector<double>& sigmas,
                                    const std::vector<std::string>& zetas,
                                    const std::vector<double>& probe_distances, std::int64_t n,
                                    const numerics::RngStream& rng);

// MC rho_R >= closed-form bound - 3 SE over R x (eps, delta).
CheckResult check_rho_gaussian_sweep(const std::vector<std::uint64_t>& Rs,
                                     const std::vector<std::pair<double, double>>& eps_delta,
                                     std::int64_t n, const numerics::RngStream& rng);

// Numeric max of h(t; sigma) below 0.72 (1 - e^{-sqrt2 sigma}) with the
// maximizer inside [0.62 sqrt2 sigma, sqrt2 sigma].
CheckResult check_lemma_c1(const std::vector<double>& sigmas);

// (1 - lower bound at beta = 1 - tau) / sqrt(tau) <= 2.
CheckResult check_cor63(const std::vector<double>& taus);

// Random parameter sweep (with Delta_R > rho* F*): the returned crossover K
// brackets the sign change of gsgd_rhs - sgd_rhs.
CheckResult check_crossover_bracket(int n_points, const numerics::RngStream& rng);

// p(0) = 1, strict decrease, and p(sigma_max(rho)) * rho = 1 to 1e-10.
CheckResult check_p_sigma_identity();

struct SandwichConfig {
  std::size_t R = 8;
  double eta_over_L = 0.1;
  double w0_distance = 5.0;
  std::uint64_t K_max = 20000;
  std::vector<std::uint64_t> Ks{100, 1000, 10000};
  std::uint64_t n_seeds = 200;
  std::int64_t rho_probe_n = 100000;
  std::int64_t delta_n = 1000000;
  std::uint64_t early_k_max = 500;
};

// Runs the paired race, estimates rho* (probe shells plus a reference
// greedy trajectory) and Delta_R, then checks the empirical averaged-iterate
// losses against both convergence-bound right-hand sides, the early greedy
// advantage (some k <= early_k_max) and the long-run plateau ordering.
CheckResult check_bound_sandwich(const problems::ProblemInstance& problem,
                                 const SandwichConfig& cfg, std::uint64_t seed);

}  // namespace gsgd::harness
