// SPDX-License-Identifier: Apache-2.0

#include "gsgd/checks.hpp"

#include <chrono>
#include <cmath>
#include <numbers>
#include <sstream>

#include "gsgd/quadrature.hpp"
#include "gsgd/refcheck.hpp"
#include "gsgd/special.hpp"
#include "gsgd/theory.hpp"

namespace gsgd::harness {
namespace {

class Stopwatch {
 public:
  Stopwatch() : start_(std::chrono::steady_clock::now()) {}
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

CheckStatus worst(const std::vector<CheckRow>& rows) {
  CheckStatus s = CheckStatus::Pass;
  for (const auto& r : rows) {
    if (r.status == CheckStatus::Fail) return CheckStatus::Fail;
    if (r.status == CheckStatus::Warn) s = CheckStatus::Warn;
  }
  return s;
}

std::string fmt(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

oracle::ZetaDist zeta_from_name(const std::string& name) {
  if (name == "standard-gaussian") return oracle::ZetaDist::StandardGaussian;
  if (name == "rademacher") return oracle::ZetaDist::Rademacher;
  throw std::invalid_argument("unknown zeta distribution '" + name + "'");
}

}  // namespace

const char* status_name(CheckStatus s) {
  switch (s) {
    case CheckStatus::Pass:
      return "PASS";
    case CheckStatus::Fail:
      return "FAIL";
    case CheckStatus::Warn:
      return "WARN";
  }
  return "?";
}

CheckResult check_numerics_floor() {
  Stopwatch timer;
  CheckResult result;
  result.name = "numerics-floor";

  // erf against the independent series/continued-fraction reference.
  double max_err = 0.0;
  for (int i = 0; i <= 6000; ++i) {
    const double t = static_cast<double>(i) * 1e-3;
    const double err = std::fabs(
        numerics::erf(t) - static_cast<double>(refcheck::erf_reference(static_cast<long double>(t))));
    if (err > max_err) max_err = err;
  }
  result.rows.push_back({"erf-grid;t=[0,6];step=1e-3", max_err, 1e-12, 0.0,
                         max_err <= 1e-12 ? CheckStatus::Pass : CheckStatus::Fail});

  // erf(t) <= sqrt(1 - exp(-4 t^2 / pi)) and erfc(t) <= 2 exp(-t^2 / 2).
  double worst_a3 = -1.0, worst_a4 = -1.0;
  for (int i = 0; i <= 50; ++i) {
    const double t = 0.1 * static_cast<double>(i);
    worst_a3 = std::max(worst_a3, numerics::erf(t) -
                                      std::sqrt(1.0 - std::exp(-4.0 * t * t / std::numbers::pi)));
    worst_a4 = std::max(worst_a4, numerics::erfc(t) - 2.0 * std::exp(-t * t / 2.0));
  }
  result.rows.push_back({"erf-upper-bound;t=0:0.1:5", worst_a3, 1e-12, 0.0,
                         worst_a3 <= 1e-12 ? CheckStatus::Pass : CheckStatus::Fail});
  result.rows.push_back({"erfc-upper-bound;t=0:0.1:5", worst_a4, 1e-12, 0.0,
                         worst_a4 <= 1e-12 ? CheckStatus::Pass : CheckStatus::Fail});

  // int_0^inf exp(-y^2 / (2 t^2)) dy = sqrt(pi/2) t.
  const double abs_tol = 1e-10;
  double worst_a5 = 0.0;
  for (double t : {0.5, 1.0, std::numbers::sqrt2, 3.0}) {
    const auto q = numerics::integrate_semi_infinite(
        [t](double y) { return std::exp(-y * y / (2.0 * t * t)); }, abs_tol);
    const double target = std::sqrt(std::numbers::pi / 2.0) * t;
    worst_a5 = std::max(worst_a5, std::fabs(q.value - target));
    if (!q.converged) worst_a5 = 1.0;
  }
  result.rows.push_back({"gaussian-halfline-integral;t={0.5,1,sqrt2,3}", worst_a5, abs_tol, 0.0,
                         worst_a5 <= abs_tol ? CheckStatus::Pass : CheckStatus::Fail});

  result.status = worst(result.rows);
  result.details["max_erf_error"] = max_err;
  result.wall_seconds = timer.seconds();
  return result;
}

CheckResult check_delta2_closed_form(const problems::ProblemInstance& problem, std::int64_t n,
                                     const numerics::RngStream& rng) {
  Stopwatch timer;
  CheckResult result;
  result.name = "delta2-closed-form";
  const auto est = theory::estimate_Delta_R(problem, 2, n, rng);
  const double sigma_y = problem.label_noise_std();
  const double target = sigma_y * sigma_y * (1.0 + 2.0 / std::numbers::pi);
  const bool pass = std::fabs(est.mean - target) <= 3.0 * est.std_error;
  result.rows.push_back({"R=2;n=" + std::to_string(n), est.mean, target, est.std_error,
                         pass ? CheckStatus::Pass : CheckStatus::Fail});
  result.status = worst(result.rows);
  result.details["estimate"] = est.mean;
  result.details["target"] = target;
  result.details["std_error"] = est.std_error;
  result.wall_seconds = timer.seconds();
  return result;
}

CheckResult check_noise_bound_sweep(const problems::ProblemInstance& problem,
                                    const std::vector<double>& sigmas,
                                    const std::vector<std::string>& zetas,
                                    const std::vector<double>& probe_distances, std::int64_t n,
                                    const numerics::RngStream& rng) {
  Stopwatch timer;
  CheckResult result;
  result.name = "noise-bound";
  const std::size_t d = problem.dim();
  WeightVector direction(d, 1.0 / std::sqrt(static_cast<double>(d)));

  std::uint64_t idx = 0;
  for (double dist : probe_distances) {
    WeightVector w = problem.minimizer();
    axpy(dist, direction, w);
    for (const auto& zeta_name : zetas) {
      const auto zeta = zeta_from_name(zeta_name);
      for (double sigma : sigmas) {
        const auto report =
            theory::verify_noise_bound(problem, w, sigma, zeta, n, rng.substream(idx++));
        CheckStatus status = report.pass ? CheckStatus::Pass : CheckStatus::Fail;
        if (!report.hypothesis_ok && report.pass) status = CheckStatus::Warn;
        result.rows.push_back({"sigma=" + fmt(sigma) + ";zeta=" + zeta_name +
                                   ";dist=" + fmt(dist),
                               report.ratio, report.p_sigma, report.ratio_se, status});
      }
    }
  }
  result.status = worst(result.rows);
  result.details["n"] = n;
  result.details["checks"] = result.rows.size();
  result.wall_seconds = timer.seconds();
  return result;
}

CheckResult check_rho_gaussian_sweep(const std::vector<std::uint64_t>& Rs,
                                     const std::vector<std::pair<double, double>>& eps_delta,
                                     std::int64_t n, const numerics::RngStream& rng) {
  Stopwatch timer;
  CheckResult result;
  result.name = "rho-gaussian";
  std::uint64_t idx = 0;
  for (const auto& [eps, delta] : eps_delta) {
    for (std::uint64_t R : Rs) {
      const auto report = theory::verify_rho_gaussian(eps, delta, static_cast<std::size_t>(R), n,
                                                      rng.substream(idx++));
      result.rows.push_back({"R=" + std::to_string(R) + ";eps=" + fmt(eps) +
                                 ";delta=" + fmt(delta),
                             report.rho_mc.mean, report.bound, report.rho_mc.std_error,
                             report.pass ? CheckStatus::Pass : CheckStatus::Fail});
    }
  }
  result.status = worst(result.rows);
  result.details["n"] = n;
  result.wall_seconds = timer.seconds();
  return result;
}

CheckResult check_lemma_c1(const std::vector<double>& sigmas) {
  Stopwatch timer;
  CheckResult result;
  result.name = "lemma-c1";
  for (double sigma : sigmas) {
    const auto report = theory::lemma_c1_check(sigma);
    const bool pass = report.max_below_bound && report.t_star_in_bracket;
    result.rows.push_back({"sigma=" + fmt(sigma) + ";t_star=" + fmt(report.t_star), report.max_h,
                           report.bound, 0.0, pass ? CheckStatus::Pass : CheckStatus::Fail});
  }
  result.status = worst(result.rows);
  result.wall_seconds = timer.seconds();
  return result;
}

CheckResult check_cor63(const std::vector<double>& taus) {
  Stopwatch timer;
  CheckResult result;
  result.name = "cor63";
  const auto report = theory::cor63_check(taus);
  for (std::size_t i = 0; i < report.taus.size(); ++i) {
    result.rows.push_back({"tau=" + fmt(report.taus[i]), report.ratios[i], 2.0, 0.0,
                           report.ratios[i] <= 2.0 ? CheckStatus::Pass : CheckStatus::Fail});
  }
  result.status = worst(result.rows);
  result.wall_seconds = timer.seconds();
  return result;
}

CheckResult check_crossover_bracket(int n_points, const numerics::RngStream& rng) {
  Stopwatch timer;
  CheckResult result;
  result.name = "crossover-bracket";
  numerics::RngStream r = rng.substream("params");
  int produced = 0;
  while (produced < n_points) {
    const double D0 = r.uniform(0.5, 10.0);
    const double rho_star = r.uniform(1.05, 3.0);
    const double L = r.uniform(0.5, 4.0);
    const double eta = r.uniform(0.05, 0.95) / L;
    const double F_star = r.uniform(0.1, 2.0);
    const double Delta_R = rho_star * F_star * r.uniform(1.01, 4.0);  // keeps Delta > rho* F*

    const auto k = theory::crossover_K(D0, rho_star, eta, Delta_R, F_star);
    if (!k.has_value() || *k < 1.0 || *k > 1e12) continue;
    const auto K = static_cast<std::uint64_t>(*k);

    const double g_at = theory::gsgd_bound_rhs(D0, rho_star, eta, L, K, Delta_R).rhs;
    const double s_at = theory::sgd_bound_rhs(D0, eta, L, K, F_star).rhs;
    const double g_after = theory::gsgd_bound_rhs(D0, rho_star, eta, L, K + 1, Delta_R).rhs;
    const double s_after = theory::sgd_bound_rhs(D0, eta, L, K + 1, F_star).rhs;
    const bool pass = g_at <= s_at && g_after > s_after - 1e-9;

    result.rows.push_back({"D0=" + fmt(D0) + ";rho=" + fmt(rho_star) + ";eta=" + fmt(eta) +
                               ";L=" + fmt(L) + ";Delta=" + fmt(Delta_R) + ";Fstar=" +
                               fmt(F_star),
                           *k, g_at - s_at, 0.0, pass ? CheckStatus::Pass : CheckStatus::Fail});
    ++produced;
  }
  result.status = worst(result.rows);
  result.wall_seconds = timer.seconds();
  return result;
}

CheckResult check_p_sigma_identity() {
  Stopwatch timer;
  CheckResult result;
  result.name = "p-sigma-identity";

  const double p0_err = std::fabs(theory::p_sigma(0.0) - 1.0);
  result.rows.push_back(
      {"p(0)=1", p0_err, 0.0, 0.0, p0_err == 0.0 ? CheckStatus::Pass : CheckStatus::Fail});

  bool decreasing = true;
  double prev = theory::p_sigma(0.0);
  for (int i = 1; i <= 200; ++i) {
    const double p = theory::p_sigma(0.01 * static_cast<double>(i));
    if (!(p < prev) || p > 1.0) decreasing = false;
    prev = p;
  }
  result.rows.push_back({"strictly-decreasing;sigma=0:0.01:2", decreasing ? 1.0 : 0.0, 1.0, 0.0,
                         decreasing ? CheckStatus::Pass : CheckStatus::Fail});

  double worst_identity = 0.0;
  for (double rho : {1.1, 1.5, 2.0, 2.5, 3.0, 3.4, 25.0 / 7.0 - 1e-3}) {
    const auto s = theory::sigma_max(rho);
    worst_identity = std::max(worst_identity, std::fabs(theory::p_sigma(*s) * rho - 1.0));
  }
  result.rows.push_back({"p(sigma_max(rho))*rho=1;rho in (1,25/7)", worst_identity, 1e-10, 0.0,
                         worst_identity <= 1e-10 ? CheckStatus::Pass : CheckStatus::Fail});

  result.status = worst(result.rows);
  result.wall_seconds = timer.seconds();
  return result;
}

CheckResult check_bound_sandwich(const problems::ProblemInstance& problem,
                                 const SandwichConfig& cfg, std::uint64_t seed) {
  Stopwatch timer;
  CheckResult result;
  result.name = "bound-sandwich";

  const std::size_t d = problem.dim();
  const double L = problem.smoothness();
  const double eta = cfg.eta_over_L / L;
  const double F_star = problem.minimum_value();
  WeightVector direction(d, 1.0 / std::sqrt(static_cast<double>(d)));
  WeightVector w0 = problem.minimizer();
  axpy(cfg.w0_distance, direction, w0);
  const double D0 = distance(w0, problem.minimizer());

  const numerics::RngStream base(seed, 0);
  const oracle::NoiseModel noise = oracle::NoiseModel::exact();
  const opt::StepSchedule schedule{eta};

  // Delta_R at the minimizer.
  const auto delta_est = theory::estimate_Delta_R(problem, cfg.R, cfg.delta_n,
                                                  base.substream("sandwich/delta"));

  // rho* over probe shells plus iterates of one reference greedy run.
  std::vector<WeightVector> probes;
  for (double radius : {0.1, 0.25, 0.5, 1.0, 2.0, 3.5, 5.0, 7.5, 10.0}) {
    WeightVector w = problem.minimizer();
    axpy(radius, direction, w);
    probes.push_back(std::move(w));
  }
  {
    numerics::RngStream dir_rng = base.substream("sandwich/probe-direction");
    const auto gv = numerics::sample_gaussian_vector(dir_rng, d, 1.0);
    WeightVector g(gv);
    kernels::scale(g.data(), 1.0 / norm(g), d);
    for (double radius : {0.5, 2.0, 5.0, 10.0}) {
      WeightVector w = problem.minimizer();
      axpy(radius, g, w);
      probes.push_back(std::move(w));
    }
    const auto ref = opt::run(problem, opt::Method::Gsgd, cfg.R, noise, schedule,
                              std::min<std::uint64_t>(cfg.K_max, 2000), w0,
                              opt::make_run_streams(seed, 999983));
    for (std::size_t i = 1; i < ref.iterates.size(); i += 2) probes.push_back(ref.iterates[i]);
  }
  const auto rho_star = theory::estimate_rho_star(problem, cfg.R, noise, probes, cfg.rho_probe_n,
                                                  base.substream("sandwich/rho"));

  // Paired race, shared draws.
  const auto race = opt::race(problem, opt::Method::Sgd, opt::Method::Gsgd, cfg.R, noise,
                              schedule, cfg.K_max, w0, cfg.n_seeds, seed);

  auto find_k = [&race](std::uint64_t k) -> std::size_t {
    for (std::size_t i = 0; i < race.ks.size(); ++i)
      if (race.ks[i] == k) return i;
    throw std::runtime_error("sandwich: step " + std::to_string(k) + " not recorded");
  };

  json points = json::array();
  for (std::uint64_t K : cfg.Ks) {
    const std::size_t i = find_k(K);
    const double gsgd_rhs =
        theory::gsgd_bound_rhs(D0, rho_star.value.mean, eta, L, K, delta_est.mean).rhs;
    const double sgd_rhs = theory::sgd_bound_rhs(D0, eta, L, K, F_star).rhs;
    const bool gsgd_pass = race.mean_b[i] <= gsgd_rhs + 3.0 * race.se_b[i];
    const bool sgd_pass = race.mean_a[i] <= sgd_rhs + 3.0 * race.se_a[i];
    result.rows.push_back({"method=gsgd;K=" + std::to_string(K), race.mean_b[i], gsgd_rhs,
                           race.se_b[i], gsgd_pass ? CheckStatus::Pass : CheckStatus::Fail});
    result.rows.push_back({"method=sgd;K=" + std::to_string(K), race.mean_a[i], sgd_rhs,
                           race.se_a[i], sgd_pass ? CheckStatus::Pass : CheckStatus::Fail});
    points.push_back({{"K", K},
                      {"gsgd_mean", race.mean_b[i]},
                      {"gsgd_se", race.se_b[i]},
                      {"gsgd_rhs", gsgd_rhs},
                      {"gsgd_pass", gsgd_pass},
                      {"sgd_mean", race.mean_a[i]},
                      {"sgd_se", race.se_a[i]},
                      {"sgd_rhs", sgd_rhs},
                      {"sgd_pass", sgd_pass}});
  }

  // Early greedy advantage: gap = gsgd - sgd goes below -3 SE at some
  // recorded k <= early_k_max. Report the most significant such k.
  bool early_pass = false;
  std::uint64_t early_k = 0;
  double early_gap = 0.0, early_se = 0.0, best_z = 0.0;
  for (std::size_t i = 0; i < race.ks.size(); ++i) {
    if (race.ks[i] == 0 || race.ks[i] > cfg.early_k_max) continue;
    const double z = race.gap_mean[i] / std::max(race.gap_se[i], 1e-300);
    if (early_k == 0 || z < best_z) {
      best_z = z;
      early_k = race.ks[i];
      early_gap = race.gap_mean[i];
      early_se = race.gap_se[i];
    }
  }
  early_pass = early_k != 0 && early_gap < -3.0 * early_se;
  result.rows.push_back({"early-advantage;k<=" + std::to_string(cfg.early_k_max) +
                             ";at_k=" + std::to_string(early_k),
                         early_gap, -3.0 * early_se, early_se,
                         early_pass ? CheckStatus::Pass : CheckStatus::Fail});

  // Plateau ordering at K_max on the iterate loss F(w_K), where the
  // constant-step floors sit: gsgd >= sgd - 3 SE.
  const std::size_t last = find_k(cfg.K_max);
  const bool plateau_pass = race.iter_gap_mean[last] >= -3.0 * race.iter_gap_se[last];
  result.rows.push_back({"plateau;k=" + std::to_string(cfg.K_max), race.iter_gap_mean[last],
                         -3.0 * race.iter_gap_se[last], race.iter_gap_se[last],
                         plateau_pass ? CheckStatus::Pass : CheckStatus::Fail});

  result.status = worst(result.rows);
  result.details = {{"D0", D0},
                    {"eta", eta},
                    {"L", L},
                    {"F_star", F_star},
                    {"R", cfg.R},
                    {"n_seeds", cfg.n_seeds},
                    {"rho_star", rho_star.value.mean},
                    {"rho_star_se", rho_star.value.std_error},
                    {"rho_star_probe_count", probes.size()},
                    {"Delta_R", delta_est.mean},
                    {"Delta_R_se", delta_est.std_error},
                    {"points", points},
                    {"early_advantage",
                     {{"pass", early_pass}, {"k", early_k}, {"gap", early_gap}, {"gap_se", early_se}}},
                    {"plateau",
                     {{"pass", plateau_pass},
                      {"k", cfg.K_max},
                      {"gap", race.iter_gap_mean[last]},
                      {"gap_se", race.iter_gap_se[last]}}}};
  result.wall_seconds = timer.seconds();
  return result;
}

}  // namespace gsgd::harness
