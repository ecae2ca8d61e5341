// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "gsgd/montecarlo.hpp"
#include "gsgd/oracle.hpp"
#include "gsgd/problems.hpp"
#include "gsgd/weight_vector.hpp"

namespace gsgd::theory {

using numerics::McEstimate;
using numerics::RngStream;

// ---------------------------------------------------------------------------
// Selection-gain estimators
// ---------------------------------------------------------------------------

// Monte-Carlo estimate of the expected maximum per-sample loss over R
// i.i.d. draws at w.
McEstimate estimate_Fhat_R(const problems::ProblemInstance& problem, const WeightVector& w,
                           std::size_t R, std::int64_t n, const RngStream& rng);

// Expected exact loss of the sample whose *approximate* loss is largest.
McEstimate estimate_Fhat_R_approx(const problems::ProblemInstance& problem, const WeightVector& w,
                                  std::size_t R, const oracle::NoiseModel& noise, std::int64_t n,
                                  const RngStream& rng);

struct RhoEstimate {
  McEstimate value;
  std::size_t R = 0;
  WeightVector at_w;
};

// rho_R(w) (or its approximate-selection variant when noise is not exact).
RhoEstimate estimate_rho(const problems::ProblemInstance& problem, const WeightVector& w,
                         std::size_t R, const oracle::NoiseModel& noise, std::int64_t n,
                         const RngStream& rng);

// Minimum of rho over a probe set. This is an upper estimate of the true
// infimum over all non-minimizers; it is reported as such.
RhoEstimate estimate_rho_star(const problems::ProblemInstance& problem, std::size_t R,
                              const oracle::NoiseModel& noise,
                              const std::vector<WeightVector>& probe_ws, std::int64_t n,
                              const RngStream& rng);

// Expected max loss over R draws at the minimizer (the solution set here is
// always the singleton {w*}).
McEstimate estimate_Delta_R(const problems::ProblemInstance& problem, std::size_t R,
                            std::int64_t n, const RngStream& rng);

// ---------------------------------------------------------------------------
// Convergence-bound evaluators
// ---------------------------------------------------------------------------

enum class BoundMethod { Gsgd, GsgdApprox, Sgd };

struct BoundComponents {
  double D0 = 0.0;
  double eta = 0.0;
  double L = 0.0;
  double rho_star = 0.0;  // rho_R* or rho_{R,approx}* depending on method
  double Delta_R = 0.0;
  double F_star = 0.0;
};

struct BoundReport {
  BoundMethod method = BoundMethod::Gsgd;
  std::uint64_t K = 0;
  double rhs = 0.0;
  BoundComponents components;
};

// Reassembles the right-hand side from the stored components; must match
// report.rhs to 1e-12 relative.
double recompute_rhs(const BoundReport& report);

// D0^2 / (2 rho* eta (1 - eta L) K) + Delta_R / (rho* (1 - eta L)).
BoundReport gsgd_bound_rhs(double D0, double rho_star, double eta, double L, std::uint64_t K,
                           double Delta_R, BoundMethod method = BoundMethod::Gsgd);

// D0^2 / (2 eta (1 - eta L) K) + eta L F* / (1 - eta L) + F*.
BoundReport sgd_bound_rhs(double D0, double eta, double L, std::uint64_t K, double F_star);

// Largest K for which the greedy bound beats the plain bound:
// floor(D0^2 (rho* - 1) / (2 eta (Delta_R - rho* F*))); nullopt when
// Delta_R <= rho* F* (the greedy bound dominates at every K).
std::optional<double> crossover_K(double D0, double rho_star, double eta, double Delta_R,
                                  double F_star);

// ---------------------------------------------------------------------------
// Noise degradation (R = 2)
// ---------------------------------------------------------------------------

// p(sigma) = 1 - 0.72 (1 - e^{-sqrt(2) sigma}).
double p_sigma(double sigma);

// Largest noise level keeping p(sigma) rho2* > 1:
// (1/sqrt 2) log(18 rho2* / (25 - 7 rho2*)); nullopt when rho2* >= 25/7.
std::optional<double> sigma_max(double rho2_star);

struct NoiseBoundReport {
  double sigma = 0.0;
  oracle::ZetaDist zeta = oracle::ZetaDist::StandardGaussian;
  McEstimate fhat2;
  McEstimate fhat2_approx;
  double ratio = 0.0;
  double ratio_se = 0.0;  // delta-method SE of the paired ratio
  double p_sigma = 0.0;
  bool hypothesis_ok = true;  // sigma <= 1/(2 sqrt 2)
  bool pass = false;
};

// Paired MC check of F^_{2,approx}(w) >= p(sigma) F^_2(w) on shared draws.
// PASS iff ratio >= p(sigma) - 3 * ratio_se.
NoiseBoundReport verify_noise_bound(const problems::ProblemInstance& problem,
                                    const WeightVector& w, double sigma, oracle::ZetaDist zeta,
                                    std::int64_t n, const RngStream& rng);

// ---------------------------------------------------------------------------
// Gaussian prediction-error bound
// ---------------------------------------------------------------------------

// nu(R) = sqrt((pi/2) log(R / (4 log R))); natural logs. Requires
// R / (4 log R) > 1.
double nu_R(std::size_t R);

// (eps^2 + nu^2 delta^2 + 2 nu eps delta)(1 - 1/R) / (eps^2 + delta^2).
double rho_gaussian_lower_bound(double eps, double delta, std::size_t R);

struct RhoGaussianReport {
  double eps = 0.0;
  double delta = 0.0;
  std::size_t R = 0;
  McEstimate rho_mc;  // E[max_i Z_i^2] / (eps^2 + delta^2), Z_i ~ N(eps, delta^2)
  double bound = 0.0;
  bool pass = false;
};

RhoGaussianReport verify_rho_gaussian(double eps, double delta, std::size_t R, std::int64_t n,
                                      const RngStream& rng);

// ---------------------------------------------------------------------------
// h(t; sigma) maximum check
// ---------------------------------------------------------------------------

struct LemmaC1Report {
  double sigma = 0.0;
  double max_h = 0.0;
  double t_star = 0.0;
  double bound = 0.0;  // 0.72 (1 - e^{-sqrt 2 sigma})
  bool max_below_bound = false;
  bool t_star_in_bracket = false;  // t* in [0.62 sqrt2 sigma, sqrt2 sigma]
  bool pass = false;
};

// Maximizes h(t; sigma) = 2 (1 - e^{-t}) / (2 + t^2 / sigma^2) over t > 0
// by a dense log-spaced grid plus golden-section refinement.
LemmaC1Report lemma_c1_check(double sigma);

// ---------------------------------------------------------------------------
// Early-exit argmax-preservation probability
// ---------------------------------------------------------------------------

// p_j as a function of beta: 1 - (1/(2 sqrt pi)) int_0^inf e^{-y^2/4}
// erfc(beta y / (2 sqrt(1 - beta^2))) dy, evaluated by quadrature.
// beta = 1 short-circuits to 1; beta < 0 is out of scope.
double pj_exact(double beta, double abs_tol = 1e-10);

// 1 - sqrt((2 - 2 beta^2) / (2 - beta^2)).
double pj_lower_bound(double beta);

// Bivariate-normal orthant closed form 1/2 + arcsin(beta)/pi; used as an
// independent verification route, not as the implementation of record.
double pj_orthant(double beta);

struct Cor63Report {
  std::vector<double> taus;
  std::vector<double> ratios;  // (1 - pj_lower_bound(1 - tau)) / sqrt(tau)
  bool pass = false;           // all ratios <= 2
};

Cor63Report cor63_check(const std::vector<double>& tau_grid);

}  // namespace gsgd::theory
