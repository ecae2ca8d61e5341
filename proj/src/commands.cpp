// SPDX-License-Identifier: Apache-2.0

#include "gsgd/commands.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>

#include "gsgd/checks.hpp"
#include "gsgd/config.hpp"
#include "gsgd/csv.hpp"
#include "gsgd/earlyexit.hpp"
#include "gsgd/errors.hpp"
#include "gsgd/optimizers.hpp"
#include "gsgd/theory.hpp"
#include "gsgd/version.hpp"

namespace gsgd::harness {
namespace {

namespace fs = std::filesystem;

std::uint64_t resolve_seed(const CommandOptions& options, const json& config) {
  if (options.seed_given) return options.seed;
  if (config.contains("seed")) return get_count(config, "config", "seed", 0, UINT64_MAX - 1);
  return 0;
}

std::string hex_digest(std::uint64_t digest) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "0x%016llx", static_cast<unsigned long long>(digest));
  return buf;
}

std::string iso_timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
  return buf;
}

struct RunContext {
  json config;
  std::uint64_t seed = 0;
  fs::path out;
  json manifest_checks = json::object();
  json manifest_seconds = json::object();
  json outputs = json::array();
  bool any_fail = false;
  bool any_warn = false;

  void note_check(const std::string& name, CheckStatus status, double seconds = 0.0) {
    manifest_checks[name] = status_name(status);
    manifest_seconds[name] = seconds;
    if (status == CheckStatus::Fail) any_fail = true;
    if (status == CheckStatus::Warn) any_warn = true;
    std::printf("[%s] %s\n", status_name(status), name.c_str());
  }

  std::string out_file(const std::string& name) {
    outputs.push_back(name);
    return (out / name).string();
  }
};

RunContext open_context(const CommandOptions& options, const std::string& command) {
  RunContext ctx;
  ctx.config = load_config(options.config_path);
  if (!ctx.config.contains("schema_version") ||
      get_count(ctx.config, "config", "schema_version", 1, 1) != 1)
    throw ConfigError("config: schema_version must be 1");
  ctx.seed = resolve_seed(options, ctx.config);
  ctx.out = fs::path(options.out_dir);
  fs::create_directories(ctx.out);
  std::printf("gsgdlab %s: config=%s seed=%llu out=%s\n", command.c_str(),
              options.config_path.c_str(), static_cast<unsigned long long>(ctx.seed),
              options.out_dir.c_str());
  return ctx;
}

int finish(RunContext& ctx, const CommandOptions& options, const std::string& command) {
  json manifest = {{"artifact_version", kArtifactVersion},
                   {"command", command},
                   {"config_digest", hex_digest(config_digest(ctx.config))},
                   {"seed", ctx.seed},
                   {"timestamp", iso_timestamp()},
                   {"checks", ctx.manifest_checks},
                   {"check_seconds", ctx.manifest_seconds},
                   {"outputs", ctx.outputs}};
  std::ofstream mf(ctx.out / "manifest.json");
  mf << manifest.dump(2) << '\n';

  if (ctx.any_fail) return 1;
  if (ctx.any_warn && options.strict) return 1;
  return 0;
}

void write_trajectory_csv(const std::string& path, const opt::Trajectory& traj, std::size_t R) {
  CsvWriter csv(path);
  csv.header({"step", "F_iterate", "F_averaged", "gradient_evals", "samples_inspected"});
  for (std::size_t i = 0; i < traj.steps.size(); ++i) {
    const std::uint64_t k = traj.steps[i];
    csv.row({k, traj.population_losses[i], traj.averaged_losses[i], k,
             k * static_cast<std::uint64_t>(R)});
  }
}

void write_checks_csv(CsvWriter& csv, const CheckResult& check) {
  for (const auto& row : check.rows)
    csv.row({check.name, row.params, row.estimate, row.bound, row.std_error,
             std::string(status_name(row.status))});
}

std::vector<double> number_list(const json& obj, const std::string& context,
                                const std::string& key, double lo, double hi) {
  if (!obj.contains(key) || !obj.at(key).is_array())
    throw ConfigError("config: " + context + "." + key + " must be an array");
  std::vector<double> out;
  for (const auto& v : obj.at(key)) {
    if (!v.is_number()) throw ConfigError("config: " + context + "." + key + " entries: numbers");
    const double x = v.get<double>();
    if (!std::isfinite(x) || x < lo || x > hi)
      throw ConfigError("config: " + context + "." + key + " entry out of range");
    out.push_back(x);
  }
  if (out.empty()) throw ConfigError("config: " + context + "." + key + " must be nonempty");
  return out;
}

std::vector<std::uint64_t> count_list(const json& obj, const std::string& context,
                                      const std::string& key, std::uint64_t lo,
                                      std::uint64_t hi) {
  const auto nums = number_list(obj, context, key, static_cast<double>(lo),
                                static_cast<double>(hi));
  std::vector<std::uint64_t> out;
  for (double v : nums) {
    if (v != std::floor(v)) throw ConfigError("config: " + context + "." + key + ": integers");
    out.push_back(static_cast<std::uint64_t>(v));
  }
  return out;
}

double resolve_eta(const json& config, double L) {
  if (config.contains("eta") && config.contains("eta_over_L"))
    throw ConfigError("config: give either eta or eta_over_L, not both");
  double eta;
  if (config.contains("eta_over_L"))
    eta = get_number(config, "config", "eta_over_L", 1e-12, 10.0) / L;
  else
    eta = get_number(config, "config", "eta", 1e-300, 1e300);
  if (!(eta > 0.0) || eta >= 1.0 / L)
    throw ConfigError("config: eta = " + std::to_string(eta) + " violates eta < 1/L = " +
                      std::to_string(1.0 / L) +
                      " (both convergence guarantees require eta < 1/L)");
  return eta;
}

opt::Method method_from_name(const std::string& name) {
  if (name == "sgd") return opt::Method::Sgd;
  if (name == "gsgd") return opt::Method::Gsgd;
  throw ConfigError("config: method must be \"sgd\" or \"gsgd\"");
}

}  // namespace

// ---------------------------------------------------------------------------
// race
// ---------------------------------------------------------------------------

int cmd_race(const CommandOptions& options) {
  RunContext ctx = open_context(options, "race");
  const json& config = ctx.config;
  check_allowed_keys(config, "config",
                     {"schema_version", "seed", "problem", "noise", "method_a", "method_b", "R",
                      "eta", "eta_over_L", "K", "n_seeds", "w0_distance", "checks"});

  const auto problem = problem_from_json(config.at("problem"));
  const auto noise = config.contains("noise") ? noise_from_json(config.at("noise"))
                                              : oracle::NoiseModel::exact();
  const auto method_a = method_from_name(get_string(config, "config", "method_a"));
  const auto method_b = method_from_name(get_string(config, "config", "method_b"));
  const auto R = static_cast<std::size_t>(get_count(config, "config", "R", 1, 1 << 20));
  const double eta = resolve_eta(config, problem.smoothness());
  const std::uint64_t K = get_count(config, "config", "K", 1, 100000000);
  const std::uint64_t n_seeds = get_count(config, "config", "n_seeds", 2, 100000);
  const double w0_distance = get_number_or(config, "config", "w0_distance", 0.0, 1e9, 5.0);

  const std::size_t d = problem.dim();
  WeightVector w0 = problem.minimizer();
  {
    WeightVector direction(d, 1.0 / std::sqrt(static_cast<double>(d)));
    axpy(w0_distance, direction, w0);
  }
  const opt::StepSchedule schedule{eta};

  try {
    // Per-run CSVs for the first replicate of each method.
    const auto t0 = opt::run(problem, method_a, R, noise, schedule, K, w0,
                             opt::make_run_streams(ctx.seed, 0));
    write_trajectory_csv(ctx.out_file(std::string("run_") + opt::method_name(method_a) +
                                      "_seed0.csv"),
                         t0, R);
    const auto t1 = opt::run(problem, method_b, R, noise, schedule, K, w0,
                             opt::make_run_streams(ctx.seed, 0));
    write_trajectory_csv(ctx.out_file(std::string("run_") + opt::method_name(method_b) +
                                      "_seed0.csv"),
                         t1, R);

    const auto race =
        opt::race(problem, method_a, method_b, R, noise, schedule, K, w0, n_seeds, ctx.seed);

    const std::string name_a = opt::method_name(method_a);
    const std::string name_b = opt::method_name(method_b);
    const std::string sfx_a = name_a == name_b ? "_a" : "";
    const std::string sfx_b = name_a == name_b ? "_b" : "";
    {
      CsvWriter csv(ctx.out_file("race_summary.csv"));
      csv.header({"k", "mean_" + name_a + sfx_a, "se_" + name_a + sfx_a, "mean_" + name_b + sfx_b,
                  "se_" + name_b + sfx_b, "gap_mean", "gap_se"});
      for (std::size_t i = 0; i < race.ks.size(); ++i)
        csv.row({race.ks[i], race.mean_a[i], race.se_a[i], race.mean_b[i], race.se_b[i],
                 race.gap_mean[i], race.gap_se[i]});
    }
    {
      CsvWriter csv(ctx.out_file("race_iterate_summary.csv"));
      csv.header({"k", "mean_" + name_a + sfx_a, "se_" + name_a + sfx_a, "mean_" + name_b + sfx_b,
                  "se_" + name_b + sfx_b, "gap_mean", "gap_se"});
      for (std::size_t i = 0; i < race.ks.size(); ++i)
        csv.row({race.ks[i], race.iter_mean_a[i], race.iter_se_a[i], race.iter_mean_b[i],
                 race.iter_se_b[i], race.iter_gap_mean[i], race.iter_gap_se[i]});
    }

    if (config.contains("checks")) {
      const json& checks = config.at("checks");
      check_allowed_keys(checks, "checks", {"early_k_max", "plateau"});
      const std::uint64_t early_k_max = get_count_or(checks, "checks", "early_k_max", 1, K, 500);
      bool early = false;
      for (std::size_t i = 0; i < race.ks.size(); ++i) {
        if (race.ks[i] == 0 || race.ks[i] > early_k_max) continue;
        if (race.gap_mean[i] < -3.0 * race.gap_se[i]) early = true;
      }
      ctx.note_check("early-advantage", early ? CheckStatus::Pass : CheckStatus::Fail);
      if (checks.contains("plateau") && checks.at("plateau").get<bool>()) {
        const std::size_t last = race.ks.size() - 1;
        const bool plateau = race.iter_gap_mean[last] >= -3.0 * race.iter_gap_se[last];
        ctx.note_check("plateau-ordering", plateau ? CheckStatus::Pass : CheckStatus::Fail);
      }
    }
  } catch (const DivergenceError& e) {
    std::fprintf(stderr, "race: %s\n", e.what());
    return 1;
  }

  return finish(ctx, options, "race");
}

// ---------------------------------------------------------------------------
// verify
// ---------------------------------------------------------------------------

int cmd_verify(const CommandOptions& options) {
  RunContext ctx = open_context(options, "verify");
  const json& config = ctx.config;
  check_allowed_keys(config, "config",
                     {"schema_version", "seed", "checks", "problem", "mc_n", "delta2",
                      "noise_bound", "rho_gaussian", "lemma_c1", "cor63", "crossover",
                      "sandwich"});

  const auto problem = config.contains("problem") ? problem_from_json(config.at("problem"))
                                                  : problems::default_race_instance();
  const std::int64_t mc_n =
      static_cast<std::int64_t>(get_count_or(config, "config", "mc_n", 2, 1000000000, 1000000));

  std::vector<std::string> wanted;
  if (config.contains("checks")) {
    for (const auto& c : config.at("checks")) wanted.push_back(c.get<std::string>());
  } else {
    wanted = {"numerics-floor", "delta2-closed-form", "noise-bound", "rho-gaussian",
              "lemma-c1",       "cor63",              "crossover-bracket", "p-sigma-identity",
              "bound-sandwich"};
  }

  const numerics::RngStream base(ctx.seed, 0);
  std::vector<CheckResult> results;

  for (const auto& name : wanted) {
    if (name == "numerics-floor") {
      results.push_back(check_numerics_floor());
    } else if (name == "delta2-closed-form") {
      std::int64_t n = mc_n;
      if (config.contains("delta2")) {
        const json& d2 = config.at("delta2");
        check_allowed_keys(d2, "delta2", {"n"});
        n = static_cast<std::int64_t>(
            get_count_or(d2, "delta2", "n", 2, 1000000000, static_cast<std::uint64_t>(mc_n)));
      }
      results.push_back(check_delta2_closed_form(problem, n, base.substream("verify/delta2")));
    } else if (name == "noise-bound") {
      std::vector<double> sigmas{0.05, 0.1, 0.2, 1.0 / (2.0 * std::numbers::sqrt2)};
      std::vector<std::string> zetas{"standard-gaussian", "rademacher"};
      std::vector<double> dists{1.0, 2.0, 6.32455532033676};
      std::int64_t n = mc_n;
      if (config.contains("noise_bound")) {
        const json& nb = config.at("noise_bound");
        check_allowed_keys(nb, "noise_bound", {"sigmas", "zetas", "probe_distances", "n"});
        if (nb.contains("sigmas")) sigmas = number_list(nb, "noise_bound", "sigmas", 0.0, 10.0);
        if (nb.contains("zetas")) {
          zetas.clear();
          for (const auto& z : nb.at("zetas")) zetas.push_back(z.get<std::string>());
        }
        if (nb.contains("probe_distances"))
          dists = number_list(nb, "noise_bound", "probe_distances", 1e-9, 1e9);
        n = static_cast<std::int64_t>(get_count_or(nb, "noise_bound", "n", 2, 1000000000,
                                                   static_cast<std::uint64_t>(mc_n)));
      }
      results.push_back(
          check_noise_bound_sweep(problem, sigmas, zetas, dists, n, base.substream("verify/nb")));
    } else if (name == "rho-gaussian") {
      std::vector<std::uint64_t> Rs{16, 64, 256, 1024};
      std::vector<std::pair<double, double>> eps_delta{{0.0, 1.0}, {1.0, 1.0}, {2.0, 0.5}};
      std::int64_t n = mc_n;
      if (config.contains("rho_gaussian")) {
        const json& rg = config.at("rho_gaussian");
        check_allowed_keys(rg, "rho_gaussian", {"R", "eps_delta", "n"});
        if (rg.contains("R")) Rs = count_list(rg, "rho_gaussian", "R", 16, 1 << 20);
        if (rg.contains("eps_delta")) {
          eps_delta.clear();
          for (const auto& pair : rg.at("eps_delta"))
            eps_delta.emplace_back(pair.at(0).get<double>(), pair.at(1).get<double>());
        }
        n = static_cast<std::int64_t>(get_count_or(rg, "rho_gaussian", "n", 100000, 1000000000,
                                                   static_cast<std::uint64_t>(mc_n)));
      }
      results.push_back(check_rho_gaussian_sweep(Rs, eps_delta, n, base.substream("verify/rg")));
    } else if (name == "lemma-c1") {
      std::vector<double> sigmas{0.01, 0.05, 0.1, 0.2, 1.0 / (2.0 * std::numbers::sqrt2)};
      if (config.contains("lemma_c1")) {
        const json& lc = config.at("lemma_c1");
        check_allowed_keys(lc, "lemma_c1", {"sigmas"});
        sigmas = number_list(lc, "lemma_c1", "sigmas", 1e-9, 1.0 / (2.0 * std::numbers::sqrt2));
      }
      results.push_back(check_lemma_c1(sigmas));
    } else if (name == "cor63") {
      std::vector<double> taus{0.001, 0.01, 0.05, 0.1};
      if (config.contains("cor63")) {
        const json& cc = config.at("cor63");
        check_allowed_keys(cc, "cor63", {"taus"});
        taus = number_list(cc, "cor63", "taus", 1e-12, 0.1);
      }
      results.push_back(check_cor63(taus));
    } else if (name == "crossover-bracket") {
      int points = 20;
      if (config.contains("crossover")) {
        const json& co = config.at("crossover");
        check_allowed_keys(co, "crossover", {"n_points"});
        points = static_cast<int>(get_count_or(co, "crossover", "n_points", 1, 10000, 20));
      }
      results.push_back(check_crossover_bracket(points, base.substream("verify/crossover")));
    } else if (name == "p-sigma-identity") {
      results.push_back(check_p_sigma_identity());
    } else if (name == "bound-sandwich") {
      SandwichConfig sc;
      if (config.contains("sandwich")) {
        const json& sw = config.at("sandwich");
        check_allowed_keys(sw, "sandwich",
                           {"R", "eta_over_L", "w0_distance", "K_max", "Ks", "n_seeds",
                            "rho_probe_n", "delta_n", "early_k_max"});
        sc.R = static_cast<std::size_t>(get_count_or(sw, "sandwich", "R", 1, 1 << 20, sc.R));
        sc.eta_over_L = get_number_or(sw, "sandwich", "eta_over_L", 1e-12, 0.999, sc.eta_over_L);
        sc.w0_distance = get_number_or(sw, "sandwich", "w0_distance", 1e-9, 1e9, sc.w0_distance);
        sc.K_max = get_count_or(sw, "sandwich", "K_max", 1, 100000000, sc.K_max);
        if (sw.contains("Ks")) sc.Ks = count_list(sw, "sandwich", "Ks", 1, sc.K_max);
        sc.n_seeds = get_count_or(sw, "sandwich", "n_seeds", 2, 100000, sc.n_seeds);
        sc.rho_probe_n = static_cast<std::int64_t>(get_count_or(
            sw, "sandwich", "rho_probe_n", 2, 1000000000,
            static_cast<std::uint64_t>(sc.rho_probe_n)));
        sc.delta_n = static_cast<std::int64_t>(get_count_or(
            sw, "sandwich", "delta_n", 2, 1000000000, static_cast<std::uint64_t>(sc.delta_n)));
        sc.early_k_max = get_count_or(sw, "sandwich", "early_k_max", 1, sc.K_max, sc.early_k_max);
      }
      results.push_back(check_bound_sandwich(problem, sc, ctx.seed));
    } else {
      throw ConfigError("config: unknown check '" + name + "'");
    }
  }

  CsvWriter csv(ctx.out_file("checks.csv"));
  csv.header({"check", "params", "estimate", "bound", "std_error", "status"});
  json report_checks = json::array();
  for (const auto& check : results) {
    write_checks_csv(csv, check);
    ctx.note_check(check.name, check.status, check.wall_seconds);
    report_checks.push_back({{"name", check.name},
                             {"status", status_name(check.status)},
                             {"rows", check.rows.size()},
                             {"details", check.details}});
  }
  {
    json report = {{"schema_version", 1},
                   {"seed", ctx.seed},
                   {"checks", report_checks}};
    std::ofstream rf(ctx.out_file("report.json"));
    rf << report.dump(2) << '\n';
  }

  return finish(ctx, options, "verify");
}

// ---------------------------------------------------------------------------
// pj
// ---------------------------------------------------------------------------

int cmd_pj(const CommandOptions& options) {
  RunContext ctx = open_context(options, "pj");
  const json& config = ctx.config;
  check_allowed_keys(config, "config",
                     {"schema_version", "seed", "mode", "betas", "mc_n", "net_dim", "net_depth",
                      "abs_tol"});

  const std::string mode =
      config.contains("mode") ? get_string(config, "config", "mode") : "beta-grid";
  const std::int64_t mc_n =
      static_cast<std::int64_t>(get_count_or(config, "config", "mc_n", 10000, 1000000000, 1000000));
  const double abs_tol = get_number_or(config, "config", "abs_tol", 1e-14, 1e-3, 1e-9);
  const numerics::RngStream base(ctx.seed, 0);

  CsvWriter csv(ctx.out_file("pj.csv"));
  csv.header({"j", "beta_j", "pj_mc", "pj_se", "pj_quadrature", "pj_orthant", "pj_lower_bound"});

  bool triangle_ok = true, bound_ok = true, monotone_ok = true;
  double prev_quad = -1.0;

  if (mode == "beta-grid") {
    std::vector<double> betas{0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 0.99};
    if (config.contains("betas")) betas = number_list(config, "config", "betas", 0.0, 1.0);
    const auto dim =
        static_cast<std::size_t>(get_count_or(config, "config", "net_dim", 2, 4096, 8));
    numerics::RngStream net_rng = base.substream("pj/net");
    std::uint64_t idx = 0;
    for (double beta : betas) {
      auto net = earlyexit::make_net_with_beta(dim, beta, net_rng);
      double b = earlyexit::beta_j(net, 1);
      if (b < 0.0 && b > -1e-9) b = 0.0;  // rounding at the beta = 0 construction
      const auto mc = earlyexit::pj_monte_carlo(net, 1, mc_n, base.substream(idx++));
      const double quad = theory::pj_exact(b, abs_tol);
      const double orthant = theory::pj_orthant(b);
      const double lower = theory::pj_lower_bound(b);
      csv.row({std::uint64_t{1}, b, mc.mean, mc.std_error, quad, orthant, lower});

      const double tol = std::max(1e-6, 3.0 * mc.std_error);
      if (std::fabs(quad - orthant) > 1e-6 || std::fabs(mc.mean - quad) > tol ||
          std::fabs(mc.mean - orthant) > tol)
        triangle_ok = false;
      if (quad < lower - 1e-9) bound_ok = false;
      if (quad < prev_quad - 1e-9) monotone_ok = false;
      prev_quad = quad;
    }
    ctx.note_check("pj-triangle", triangle_ok ? CheckStatus::Pass : CheckStatus::Fail);
    ctx.note_check("pj-bound-dominated", bound_ok ? CheckStatus::Pass : CheckStatus::Fail);
    ctx.note_check("pj-monotone", monotone_ok ? CheckStatus::Pass : CheckStatus::Fail);
  } else if (mode == "random-net") {
    const auto dim =
        static_cast<std::size_t>(get_count_or(config, "config", "net_dim", 2, 4096, 8));
    const auto depth =
        static_cast<std::size_t>(get_count_or(config, "config", "net_depth", 1, 64, 3));
    numerics::RngStream net_rng = base.substream("pj/net");
    const auto net = earlyexit::random_net(dim, depth, net_rng);
    for (std::size_t j = 1; j <= depth; ++j) {
      const double b = earlyexit::beta_j(net, j);
      const auto mc = earlyexit::pj_monte_carlo(net, j, mc_n, base.substream(j));
      double quad = std::nan(""), orthant = std::nan(""), lower = std::nan("");
      if (b >= 0.0) {
        quad = theory::pj_exact(b, abs_tol);
        orthant = theory::pj_orthant(b);
        lower = theory::pj_lower_bound(b);
        const double tol = std::max(1e-6, 3.0 * mc.std_error);
        if (std::fabs(mc.mean - quad) > tol) triangle_ok = false;
        if (quad < lower - 1e-9) bound_ok = false;
      }
      csv.row({static_cast<std::uint64_t>(j), b, mc.mean, mc.std_error, quad, orthant, lower});
    }
    ctx.note_check("pj-triangle", triangle_ok ? CheckStatus::Pass : CheckStatus::Fail);
    ctx.note_check("pj-bound-dominated", bound_ok ? CheckStatus::Pass : CheckStatus::Fail);
  } else {
    throw ConfigError("config: pj mode must be \"beta-grid\" or \"random-net\"");
  }

  return finish(ctx, options, "pj");
}

// ---------------------------------------------------------------------------
// sift
// ---------------------------------------------------------------------------

namespace {

earlyexit::LinearNet initial_net(std::size_t dim, std::size_t depth, double head_std,
                                 numerics::RngStream& rng) {
  earlyexit::LinearNet net;
  for (std::size_t l = 0; l < depth; ++l)
    net.layers.push_back(earlyexit::Matrix::identity(dim));
  net.head.resize(dim);
  for (auto& v : net.head) v = head_std * rng.gaussian();
  return net;
}

// Cumulative backprop samples when eval loss first reaches the threshold;
// nullopt when it never does.
std::optional<std::uint64_t> samples_to_threshold(const earlyexit::TrainLog& log,
                                                  double threshold) {
  for (std::size_t i = 0; i < log.eval_loss.size(); ++i)
    if (log.eval_loss[i] <= threshold) return log.backprop_samples[i];
  return std::nullopt;
}

}  // namespace

int cmd_sift(const CommandOptions& options) {
  RunContext ctx = open_context(options, "sift");
  const json& config = ctx.config;
  check_allowed_keys(config, "config",
                     {"schema_version", "seed", "task", "net", "sift", "n_seeds",
                      "loss_threshold"});

  std::size_t dim = 20;
  if (config.contains("task")) {
    const json& task = config.at("task");
    check_allowed_keys(task, "task", {"dim"});
    dim = static_cast<std::size_t>(get_count_or(task, "task", "dim", 2, 4096, 20));
  }
  std::size_t depth = 2;
  double head_std = 0.01;
  if (config.contains("net")) {
    const json& net = config.at("net");
    check_allowed_keys(net, "net", {"depth", "head_init_std"});
    depth = static_cast<std::size_t>(get_count_or(net, "net", "depth", 1, 64, 2));
    head_std = get_number_or(net, "net", "head_init_std", 0.0, 100.0, 0.01);
  }

  earlyexit::SiftConfig sift_cfg;
  if (config.contains("sift")) {
    const json& sc = config.at("sift");
    check_allowed_keys(sc, "sift",
                       {"batch_size", "keep_fraction", "criterion", "exit_layer", "warmup_steps",
                        "step_size", "total_steps", "eval_set_size"});
    sift_cfg.batch_size = static_cast<std::size_t>(
        get_count_or(sc, "sift", "batch_size", 1, 65536, sift_cfg.batch_size));
    sift_cfg.keep_fraction =
        get_number_or(sc, "sift", "keep_fraction", 1e-6, 1.0, sift_cfg.keep_fraction);
    if (sc.contains("criterion")) {
      const std::string c = get_string(sc, "sift", "criterion");
      if (c == "early-loss")
        sift_cfg.criterion = earlyexit::SiftCriterion::EarlyLoss;
      else if (c == "early-entropy")
        sift_cfg.criterion = earlyexit::SiftCriterion::EarlyEntropy;
      else
        throw ConfigError("config: sift.criterion must be early-loss or early-entropy");
    }
    sift_cfg.exit_layer = static_cast<std::size_t>(
        get_count_or(sc, "sift", "exit_layer", 1, depth, sift_cfg.exit_layer));
    sift_cfg.warmup_steps = get_count_or(sc, "sift", "warmup_steps", 0, 100000000, 20);
    sift_cfg.step_size = get_number_or(sc, "sift", "step_size", 1e-9, 100.0, 0.25);
    sift_cfg.total_steps = get_count_or(sc, "sift", "total_steps", 1, 100000000, 400);
    sift_cfg.eval_set_size = static_cast<std::size_t>(
        get_count_or(sc, "sift", "eval_set_size", 1, 1000000, sift_cfg.eval_set_size));
  }
  const std::uint64_t n_seeds = get_count_or(config, "config", "n_seeds", 1, 100000, 20);
  const double threshold = get_number_or(config, "config", "loss_threshold", 1e-9, 10.0, 0.3);

  earlyexit::SiftConfig baseline_cfg = sift_cfg;
  baseline_cfg.keep_fraction = 1.0;
  baseline_cfg.warmup_steps = sift_cfg.total_steps;  // never filter

  const numerics::RngStream base(ctx.seed, 0);
  std::vector<double> diffs;
  bool all_reached = true;

  try {
    for (std::uint64_t rep = 0; rep < n_seeds; ++rep) {
      numerics::RngStream dir_rng = base.substream("sift/direction").substream(rep);
      const auto direction = earlyexit::random_unit_direction(dim, dir_rng);
      const auto data = earlyexit::make_planted_direction_task(direction);
      numerics::RngStream net_rng = base.substream("sift/net").substream(rep);
      const auto net0 = initial_net(dim, depth, head_std, net_rng);

      const numerics::RngStream train_rng = base.substream("sift/train").substream(rep);
      auto sift_run = earlyexit::sift_train(data, net0, sift_cfg, train_rng);
      auto base_run = earlyexit::sift_train(data, net0, baseline_cfg, train_rng);

      if (rep == 0) {
        CsvWriter sift_csv(ctx.out_file("sift.csv"));
        sift_csv.header({"step", "eval_loss", "backprop_samples", "scored_samples"});
        for (std::size_t i = 0; i < sift_run.log.eval_loss.size(); ++i)
          sift_csv.row({static_cast<std::uint64_t>(i), sift_run.log.eval_loss[i],
                        sift_run.log.backprop_samples[i], sift_run.log.scored_samples[i]});
        CsvWriter base_csv(ctx.out_file("baseline.csv"));
        base_csv.header({"step", "eval_loss", "backprop_samples", "scored_samples"});
        for (std::size_t i = 0; i < base_run.log.eval_loss.size(); ++i)
          base_csv.row({static_cast<std::uint64_t>(i), base_run.log.eval_loss[i],
                        base_run.log.backprop_samples[i], base_run.log.scored_samples[i]});
      }

      const auto s = samples_to_threshold(sift_run.log, threshold);
      const auto b = samples_to_threshold(base_run.log, threshold);
      if (!s.has_value() || !b.has_value()) {
        all_reached = false;
        continue;
      }
      diffs.push_back(static_cast<double>(*b) - static_cast<double>(*s));
    }
  } catch (const DivergenceError& e) {
    std::fprintf(stderr, "sift: %s\n", e.what());
    return 1;
  }

  bool advantage = false;
  double gap_mean = 0.0, gap_se = 0.0;
  if (all_reached && diffs.size() >= 2) {
    numerics::RunningMoments m;
    for (double v : diffs) m.add(v);
    const auto est = m.estimate();
    gap_mean = est.mean;
    gap_se = est.std_error;
    advantage = gap_mean > 2.0 * gap_se;
  }
  ctx.note_check("sift-advantage", advantage ? CheckStatus::Pass : CheckStatus::Fail);
  std::printf("  backprop-to-threshold saving: %.1f +/- %.1f samples over %zu seeds\n", gap_mean,
              gap_se, diffs.size());

  return finish(ctx, options, "sift");
}

}  // namespace gsgd::harness
