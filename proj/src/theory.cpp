// SPDX-License-Identifier: Apache-2.0

#include "gsgd/theory.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "gsgd/errors.hpp"
#include "gsgd/kernels.hpp"
#include "gsgd/quadrature.hpp"
#include "gsgd/special.hpp"

namespace gsgd::theory {
namespace {

constexpr double kSqrt2 = std::numbers::sqrt2;
constexpr double kSigmaHypothesisMax = 0.35355339059327373;  // 1 / (2 sqrt 2)

// Bivariate running moments with covariance; combines are done in a fixed
// substream order so the reduction is schedule-independent.
struct PairedMoments {
  std::int64_t n = 0;
  double mean_a = 0.0, mean_b = 0.0;
  double m2_a = 0.0, m2_b = 0.0, c_ab = 0.0;

  void add(double a, double b) {
    ++n;
    const double da = a - mean_a;
    const double db = b - mean_b;
    mean_a += da / static_cast<double>(n);
    mean_b += db / static_cast<double>(n);
    m2_a += da * (a - mean_a);
    m2_b += db * (b - mean_b);
    c_ab += da * (b - mean_b);
  }

  void combine(const PairedMoments& o) {
    if (o.n == 0) return;
    if (n == 0) {
      *this = o;
      return;
    }
    const double na = static_cast<double>(n);
    const double nb = static_cast<double>(o.n);
    const double nt = na + nb;
    const double da = o.mean_a - mean_a;
    const double db = o.mean_b - mean_b;
    m2_a += o.m2_a + da * da * na * nb / nt;
    m2_b += o.m2_b + db * db * na * nb / nt;
    c_ab += o.c_ab + da * db * na * nb / nt;
    mean_a += da * nb / nt;
    mean_b += db * nb / nt;
    n += o.n;
  }
};

double golden_section_max(const std::function<double(double)>& f, double lo, double hi) {
  constexpr double kInvPhi = 0.6180339887498949;
  double a = lo, b = hi;
  double c = b - kInvPhi * (b - a);
  double d = a + kInvPhi * (b - a);
  double fc = f(c), fd = f(d);
  for (int it = 0; it < 200 && (b - a) > 1e-14 * std::max(1.0, std::fabs(a)); ++it) {
    if (fc > fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - kInvPhi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + kInvPhi * (b - a);
      fd = f(d);
    }
  }
  return 0.5 * (a + b);
}

}  // namespace

McEstimate estimate_Fhat_R(const problems::ProblemInstance& problem, const WeightVector& w,
                           std::size_t R, std::int64_t n, const RngStream& rng) {
  if (R < 1) throw std::invalid_argument("estimate_Fhat_R: R must be >= 1");
  auto factory = [&](int) {
    return [&problem, &w, R, s = problems::Sample{}](RngStream& r) mutable {
      double best = 0.0;
      for (std::size_t j = 0; j < R; ++j) {
        problem.draw_sample_into(s, r);
        const double f = problem.loss(w, s);
        if (j == 0 || f > best) best = f;
      }
      return best;
    };
  };
  return numerics::mc_estimate_parallel(rng, n, numerics::kDefaultSubstreams,
                                        numerics::SamplerFactory(factory));
}

McEstimate estimate_Fhat_R_approx(const problems::ProblemInstance& problem, const WeightVector& w,
                                  std::size_t R, const oracle::NoiseModel& noise, std::int64_t n,
                                  const RngStream& rng) {
  if (R < 1) throw std::invalid_argument("estimate_Fhat_R_approx: R must be >= 1");
  auto factory = [&](int) {
    std::vector<double> exact(R), approx(R);
    return [&problem, &w, &noise, R, s = problems::Sample{}, exact, approx](RngStream& r) mutable {
      const double mu = noise.mu_at(w);
      for (std::size_t j = 0; j < R; ++j) {
        problem.draw_sample_into(s, r);
        exact[j] = problem.loss(w, s);
        approx[j] = noise.mode == oracle::NoiseMode::Exact
                        ? exact[j]
                        : exact[j] * std::exp(mu + noise.sigma * noise.draw_zeta(r));
      }
      return exact[kernels::argmax(approx.data(), R)];
    };
  };
  return numerics::mc_estimate_parallel(rng, n, numerics::kDefaultSubstreams,
                                        numerics::SamplerFactory(factory));
}

RhoEstimate estimate_rho(const problems::ProblemInstance& problem, const WeightVector& w,
                         std::size_t R, const oracle::NoiseModel& noise, std::int64_t n,
                         const RngStream& rng) {
  const double F = problem.population_loss(w);
  if (!(F > 0.0))
    throw std::invalid_argument("estimate_rho: F(w) must be positive (w must not be a minimizer "
                                "of a zero-floor objective)");
  const McEstimate fhat = noise.mode == oracle::NoiseMode::Exact
                              ? estimate_Fhat_R(problem, w, R, n, rng)
                              : estimate_Fhat_R_approx(problem, w, R, noise, n, rng);
  RhoEstimate est;
  est.value = McEstimate{fhat.mean / F, fhat.std_error / F, fhat.n_samples};
  est.R = R;
  est.at_w = w;
  return est;
}

RhoEstimate estimate_rho_star(const problems::ProblemInstance& problem, std::size_t R,
                              const oracle::NoiseModel& noise,
                              const std::vector<WeightVector>& probe_ws, std::int64_t n,
                              const RngStream& rng) {
  if (probe_ws.empty()) throw std::invalid_argument("estimate_rho_star: empty probe set");
  RhoEstimate best;
  bool first = true;
  for (std::size_t i = 0; i < probe_ws.size(); ++i) {
    RhoEstimate cur =
        estimate_rho(problem, probe_ws[i], R, noise, n, rng.substream(i));
    if (first || cur.value.mean < best.value.mean) {
      best = std::move(cur);
      first = false;
    }
  }
  return best;
}

McEstimate estimate_Delta_R(const problems::ProblemInstance& problem, std::size_t R,
                            std::int64_t n, const RngStream& rng) {
  return estimate_Fhat_R(problem, problem.minimizer(), R, n, rng);
}

double recompute_rhs(const BoundReport& report) {
  const BoundComponents& c = report.components;
  const double K = static_cast<double>(report.K);
  if (report.method == BoundMethod::Sgd) {
    return c.D0 * c.D0 / (2.0 * c.eta * (1.0 - c.eta * c.L) * K) +
           c.eta * c.L * c.F_star / (1.0 - c.eta * c.L) + c.F_star;
  }
  return c.D0 * c.D0 / (2.0 * c.rho_star * c.eta * (1.0 - c.eta * c.L) * K) +
         c.Delta_R / (c.rho_star * (1.0 - c.eta * c.L));
}

BoundReport gsgd_bound_rhs(double D0, double rho_star, double eta, double L, std::uint64_t K,
                           double Delta_R, BoundMethod method) {
  if (!(eta > 0.0) || eta >= 1.0 / L)
    throw std::invalid_argument("gsgd_bound_rhs: requires 0 < eta < 1/L");
  if (!(rho_star > 1.0)) throw std::invalid_argument("gsgd_bound_rhs: requires rho_star > 1");
  if (K < 1) throw std::invalid_argument("gsgd_bound_rhs: requires K >= 1");
  if (method == BoundMethod::Sgd) throw std::invalid_argument("gsgd_bound_rhs: wrong method tag");
  BoundReport report;
  report.method = method;
  report.K = K;
  report.components = BoundComponents{D0, eta, L, rho_star, Delta_R, 0.0};
  report.rhs = recompute_rhs(report);
  return report;
}

BoundReport sgd_bound_rhs(double D0, double eta, double L, std::uint64_t K, double F_star) {
  if (!(eta > 0.0) || eta >= 1.0 / L)
    throw std::invalid_argument("sgd_bound_rhs: requires 0 < eta < 1/L");
  if (K < 1) throw std::invalid_argument("sgd_bound_rhs: requires K >= 1");
  BoundReport report;
  report.method = BoundMethod::Sgd;
  report.K = K;
  report.components = BoundComponents{D0, eta, L, 0.0, 0.0, F_star};
  report.rhs = recompute_rhs(report);
  return report;
}

std::optional<double> crossover_K(double D0, double rho_star, double eta, double Delta_R,
                                  double F_star) {
  if (!(rho_star > 1.0)) throw std::invalid_argument("crossover_K: requires rho_star > 1");
  if (!(eta > 0.0)) throw std::invalid_argument("crossover_K: requires eta > 0");
  const double denom = Delta_R - rho_star * F_star;
  if (denom <= 0.0) return std::nullopt;  // greedy bound dominates at every K
  return std::floor(D0 * D0 * (rho_star - 1.0) / (2.0 * eta * denom));
}

double p_sigma(double sigma) {
  if (sigma < 0.0) throw std::invalid_argument("p_sigma: sigma must be >= 0");
  return 1.0 - 0.72 * (1.0 - std::exp(-kSqrt2 * sigma));
}

std::optional<double> sigma_max(double rho2_star) {
  if (rho2_star < 1.0) throw std::invalid_argument("sigma_max: requires rho2_star >= 1");
  const double denom = 25.0 - 7.0 * rho2_star;
  if (denom <= 0.0) return std::nullopt;  // any noise level keeps the speedup
  return std::log(18.0 * rho2_star / denom) / kSqrt2;
}

NoiseBoundReport verify_noise_bound(const problems::ProblemInstance& problem,
                                    const WeightVector& w, double sigma, oracle::ZetaDist zeta,
                                    std::int64_t n, const RngStream& rng) {
  if (sigma < 0.0) throw std::invalid_argument("verify_noise_bound: sigma must be >= 0");
  if (!(problem.population_loss(w) > 0.0))
    throw std::invalid_argument("verify_noise_bound: requires F(w) > 0");

  const oracle::NoiseModel noise = oracle::NoiseModel::log_multiplicative(sigma, zeta);

  const int n_sub = numerics::kDefaultSubstreams;
  std::vector<PairedMoments> partial(static_cast<std::size_t>(n_sub));
  numerics::parallel_for(n_sub, [&](int k) {
    const std::int64_t share = n / n_sub + (k < n % n_sub ? 1 : 0);
    RngStream r = rng.substream(static_cast<std::uint64_t>(k));
    problems::Sample s;
    PairedMoments& m = partial[static_cast<std::size_t>(k)];
    for (std::int64_t i = 0; i < share; ++i) {
      double f0, f1;
      problem.draw_sample_into(s, r);
      f0 = problem.loss(w, s);
      problem.draw_sample_into(s, r);
      f1 = problem.loss(w, s);
      const double fmax = f0 > f1 ? f0 : f1;
      double selected;
      if (sigma == 0.0) {
        selected = fmax;  // exp(mu) is a common factor; argmax preserved
      } else {
        const double a0 = f0 * std::exp(sigma * noise.draw_zeta(r));
        const double a1 = f1 * std::exp(sigma * noise.draw_zeta(r));
        selected = a0 >= a1 ? f0 : f1;
      }
      m.add(selected, fmax);
    }
  });
  PairedMoments total;
  for (const auto& m : partial) total.combine(m);

  NoiseBoundReport report;
  report.sigma = sigma;
  report.zeta = zeta;
  const double nn = static_cast<double>(total.n);
  const double se_a = std::sqrt(std::max(0.0, total.m2_a / (nn - 1.0) / nn));
  const double se_b = std::sqrt(std::max(0.0, total.m2_b / (nn - 1.0) / nn));
  report.fhat2_approx = McEstimate{total.mean_a, se_a, total.n};
  report.fhat2 = McEstimate{total.mean_b, se_b, total.n};
  report.ratio = total.mean_a / total.mean_b;

  // Delta-method variance of the paired ratio mean_a / mean_b.
  const double va = total.m2_a / (nn - 1.0);
  const double vb = total.m2_b / (nn - 1.0);
  const double cab = total.c_ab / (nn - 1.0);
  const double mb = total.mean_b;
  const double ma = total.mean_a;
  const double var_ratio =
      (va / (mb * mb) + ma * ma * vb / (mb * mb * mb * mb) - 2.0 * ma * cab / (mb * mb * mb)) / nn;
  report.ratio_se = std::sqrt(std::max(0.0, var_ratio));

  report.p_sigma = p_sigma(sigma);
  report.hypothesis_ok = sigma <= kSigmaHypothesisMax + 1e-15;
  report.pass = report.ratio >= report.p_sigma - 3.0 * report.ratio_se;
  return report;
}

double nu_R(std::size_t R) {
  if (R < 2) throw std::domain_error("nu_R: requires R >= 2");
  const double r = static_cast<double>(R);
  const double ratio = r / (4.0 * std::log(r));
  if (ratio < 1.0)
    throw std::domain_error("nu_R: requires R / (4 log R) >= 1 (R too small, bound vacuous)");
  return std::sqrt(std::numbers::pi / 2.0 * std::log(ratio));
}

double rho_gaussian_lower_bound(double eps, double delta, std::size_t R) {
  if (delta < 0.0) throw std::invalid_argument("rho_gaussian_lower_bound: delta must be >= 0");
  const double nu = nu_R(R);
  const double num = eps * eps + nu * nu * delta * delta + 2.0 * nu * eps * delta;
  const double den = eps * eps + delta * delta;
  if (!(den > 0.0))
    throw std::invalid_argument("rho_gaussian_lower_bound: eps and delta cannot both be 0");
  return num * (1.0 - 1.0 / static_cast<double>(R)) / den;
}

RhoGaussianReport verify_rho_gaussian(double eps, double delta, std::size_t R, std::int64_t n,
                                      const RngStream& rng) {
  if (R < 16) throw std::invalid_argument("verify_rho_gaussian: requires R >= 16");
  if (n < 100000) throw std::invalid_argument("verify_rho_gaussian: requires n >= 1e5");
  const double F = eps * eps + delta * delta;

  auto factory = [&](int) {
    std::vector<double> z(R);
    return [eps, delta, R, F, z](RngStream& r) mutable {
      r.fill_gaussian(z.data(), R);
      if (delta != 1.0 || eps != 0.0)
        for (std::size_t j = 0; j < R; ++j) z[j] = eps + delta * z[j];
      return kernels::max_sq(z.data(), R) / F;
    };
  };
  RhoGaussianReport report;
  report.eps = eps;
  report.delta = delta;
  report.R = R;
  report.rho_mc = numerics::mc_estimate_parallel(rng, n, numerics::kDefaultSubstreams,
                                                 numerics::SamplerFactory(factory));
  report.bound = rho_gaussian_lower_bound(eps, delta, R);
  report.pass = report.rho_mc.mean >= report.bound - 3.0 * report.rho_mc.std_error;
  return report;
}

LemmaC1Report lemma_c1_check(double sigma) {
  if (!(sigma > 0.0) || sigma > kSigmaHypothesisMax + 1e-15)
    throw std::invalid_argument("lemma_c1_check: requires 0 < sigma <= 1/(2 sqrt 2)");

  const auto h = [sigma](double t) {
    return 2.0 * (1.0 - std::exp(-t)) / (2.0 + t * t / (sigma * sigma));
  };

  // Dense log-spaced grid over [1e-8, 10] * sqrt(2) sigma captures the
  // single interior maximum; golden-section refines the bracketing triple.
  const int n_grid = 4000;
  const double scale = kSqrt2 * sigma;
  double best_t = scale;
  double best_h = h(best_t);
  for (int i = 0; i < n_grid; ++i) {
    const double t = scale * std::pow(10.0, -8.0 + 9.0 * i / (n_grid - 1.0));
    const double v = h(t);
    if (v > best_h) {
      best_h = v;
      best_t = t;
    }
  }
  const double lo = best_t / 1.01;
  const double hi = best_t * 1.01;
  const double t_star = golden_section_max(h, lo, hi);

  LemmaC1Report report;
  report.sigma = sigma;
  report.t_star = t_star;
  report.max_h = std::max(h(t_star), best_h);
  report.bound = 0.72 * (1.0 - std::exp(-kSqrt2 * sigma));
  report.max_below_bound = report.max_h <= report.bound + 1e-9;
  report.t_star_in_bracket =
      t_star >= 0.62 * scale - 1e-9 * scale && t_star <= scale + 1e-9 * scale;
  report.pass = report.max_below_bound;
  return report;
}

double pj_exact(double beta, double abs_tol) {
  if (beta < 0.0)
    throw OutOfScopeError("pj_exact: beta < 0 is outside the covered regime (beta >= 0)");
  if (beta > 1.0) throw std::invalid_argument("pj_exact: beta must be <= 1");
  if (beta == 1.0) return 1.0;

  const double c = beta / (2.0 * std::sqrt(1.0 - beta * beta));
  auto integrand = [c](double y) {
    const double g = std::exp(-y * y / 4.0);
    if (g == 0.0) return 0.0;
    return g * numerics::erfc(c * y);
  };
  const auto q = numerics::integrate_semi_infinite(integrand, abs_tol);
  if (!q.converged)
    throw std::runtime_error("pj_exact: quadrature failed to reach the requested tolerance");
  return 1.0 - q.value / (2.0 * std::sqrt(std::numbers::pi));
}

double pj_lower_bound(double beta) {
  if (beta < 0.0)
    throw OutOfScopeError("pj_lower_bound: beta < 0 is outside the covered regime (beta >= 0)");
  if (beta > 1.0) throw std::invalid_argument("pj_lower_bound: beta must be <= 1");
  return 1.0 - std::sqrt((2.0 - 2.0 * beta * beta) / (2.0 - beta * beta));
}

double pj_orthant(double beta) {
  if (beta < 0.0)
    throw OutOfScopeError("pj_orthant: beta < 0 is outside the covered regime (beta >= 0)");
  if (beta > 1.0) throw std::invalid_argument("pj_orthant: beta must be <= 1");
  return 0.5 + std::asin(beta) / std::numbers::pi;
}

Cor63Report cor63_check(const std::vector<double>& tau_grid) {
  Cor63Report report;
  report.pass = true;
  for (double tau : tau_grid) {
    if (!(tau > 0.0) || tau > 0.1)
      throw std::invalid_argument("cor63_check: tau values must lie in (0, 0.1]");
    const double ratio = (1.0 - pj_lower_bound(1.0 - tau)) / std::sqrt(tau);
    report.taus.push_back(tau);
    report.ratios.push_back(ratio);
    if (!(ratio <= 2.0)) report.pass = false;
  }
  return report;
}

}  // namespace gsgd::theory
