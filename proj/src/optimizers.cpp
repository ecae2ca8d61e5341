// SPDX-License-Identifier: Apache-2.0

#include "gsgd/optimizers.hpp"

#include <cmath>
#include <stdexcept>

#include "gsgd/errors.hpp"
#include "gsgd/montecarlo.hpp"

namespace gsgd::opt {

namespace {
constexpr std::uint64_t kMaxCheckpoints = 1000;
}

const char* method_name(Method m) { return m == Method::Sgd ? "sgd" : "gsgd"; }

RunStreams make_run_streams(std::uint64_t seed, std::uint64_t replicate) {
  const numerics::RngStream base(seed, 0);
  return RunStreams{base.substream("opt/draw").substream(replicate),
                    base.substream("opt/select").substream(replicate)};
}

Trajectory run(const problems::ProblemInstance& problem, Method method, std::size_t R,
               const oracle::NoiseModel& noise, const StepSchedule& schedule, std::uint64_t K,
               const WeightVector& w0, RunStreams streams, const StepObserver& observer) {
  const double L = problem.smoothness();
  if (!(schedule.eta > 0.0) || schedule.eta >= 1.0 / L)
    throw std::invalid_argument(
        "run: eta must satisfy 0 < eta < 1/L (the convergence guarantees assume eta < 1/L)");
  if (K < 1) throw std::invalid_argument("run: K must be >= 1");
  if (w0.dim() != problem.dim()) throw std::invalid_argument("run: w0 dimension mismatch");
  if (!w0.finite()) throw std::invalid_argument("run: w0 must be finite");

  const std::uint64_t stride = (K + kMaxCheckpoints - 1) / kMaxCheckpoints;
  const double guard = 1e6 * (1.0 + norm(w0));

  Trajectory traj;
  traj.stride = stride;
  traj.seed = streams.draw.seed();

  WeightVector w = w0;
  WeightVector iterate_sum(w0.dim(), 0.0);  // sum of w_0 .. w_{k-1}
  oracle::GradEvalCounter counter;

  auto record = [&](std::uint64_t k) {
    traj.steps.push_back(k);
    traj.iterates.push_back(w);
    traj.population_losses.push_back(problem.population_loss(w));
    if (k == 0) {
      traj.averaged_iterates.push_back(w);
      traj.averaged_losses.push_back(traj.population_losses.back());
    } else {
      WeightVector avg = iterate_sum;
      kernels::scale(avg.data(), 1.0 / static_cast<double>(k), avg.dim());
      traj.averaged_losses.push_back(problem.population_loss(avg));
      traj.averaged_iterates.push_back(std::move(avg));
    }
  };

  for (std::uint64_t k = 0; k < K; ++k) {
    if (k % stride == 0) record(k);
    axpy(1.0, w, iterate_sum);

    oracle::OracleDraw draw = oracle::query(problem, w, R, noise, streams.draw);
    const std::size_t idx = method == Method::Gsgd ? oracle::select_greedy(draw)
                                                   : oracle::select_uniform(draw, streams.select);
    if (observer) observer(k, draw, idx, w);
    const WeightVector& g = oracle::finalize(problem, w, draw, idx, &counter);
    axpy(-schedule.eta, g, w);
    traj.samples_inspected += R;

    if (!w.finite() || norm(w) > guard)
      throw DivergenceError("run: iterate diverged", static_cast<std::size_t>(k + 1));
  }
  record(K);

  traj.gradient_evals = counter.count;
  return traj;
}

const WeightVector& averaged_iterate(const Trajectory& trajectory, std::uint64_t k) {
  if (k == 0) throw std::invalid_argument("averaged_iterate: k must be >= 1");
  for (std::size_t i = 0; i < trajectory.steps.size(); ++i)
    if (trajectory.steps[i] == k) return trajectory.averaged_iterates[i];
  throw std::invalid_argument("averaged_iterate: step " + std::to_string(k) +
                              " was not recorded (stride " + std::to_string(trajectory.stride) +
                              ")");
}

RaceSummary race(const problems::ProblemInstance& problem, Method method_a, Method method_b,
                 std::size_t R, const oracle::NoiseModel& noise, const StepSchedule& schedule,
                 std::uint64_t K, const WeightVector& w0, std::uint64_t n_seeds,
                 std::uint64_t seed) {
  if (n_seeds < 2) throw std::invalid_argument("race: n_seeds must be >= 2");

  const std::uint64_t n = n_seeds;
  std::vector<std::vector<double>> losses_a(n), losses_b(n);
  std::vector<std::vector<double>> iter_a(n), iter_b(n);
  std::vector<std::uint64_t> ks;

  numerics::parallel_for(static_cast<int>(n), [&](int i) {
    const auto rep = static_cast<std::uint64_t>(i);
    Trajectory ta = run(problem, method_a, R, noise, schedule, K, w0, make_run_streams(seed, rep));
    Trajectory tb = run(problem, method_b, R, noise, schedule, K, w0, make_run_streams(seed, rep));
    losses_a[rep] = std::move(ta.averaged_losses);
    losses_b[rep] = std::move(tb.averaged_losses);
    iter_a[rep] = std::move(ta.population_losses);
    iter_b[rep] = std::move(tb.population_losses);
    if (rep == 0) ks = std::move(ta.steps);
  });

  RaceSummary summary;
  summary.method_a = method_a;
  summary.method_b = method_b;
  summary.n_seeds = n;
  summary.ks = std::move(ks);

  const std::size_t n_points = summary.ks.size();
  const auto reduce = [n, n_points](const std::vector<std::vector<double>>& a,
                                    const std::vector<std::vector<double>>& b,
                                    std::vector<double>& mean_a, std::vector<double>& se_a,
                                    std::vector<double>& mean_b, std::vector<double>& se_b,
                                    std::vector<double>& gap_mean, std::vector<double>& gap_se) {
    mean_a.resize(n_points);
    se_a.resize(n_points);
    mean_b.resize(n_points);
    se_b.resize(n_points);
    gap_mean.resize(n_points);
    gap_se.resize(n_points);
    for (std::size_t j = 0; j < n_points; ++j) {
      numerics::RunningMoments ma, mb, mg;
      for (std::uint64_t i = 0; i < n; ++i) {
        ma.add(a[i][j]);
        mb.add(b[i][j]);
        mg.add(b[i][j] - a[i][j]);
      }
      const auto ea = ma.estimate();
      const auto eb = mb.estimate();
      const auto eg = mg.estimate();
      mean_a[j] = ea.mean;
      se_a[j] = ea.std_error;
      mean_b[j] = eb.mean;
      se_b[j] = eb.std_error;
      gap_mean[j] = eg.mean;
      gap_se[j] = eg.std_error;
    }
  };
  reduce(losses_a, losses_b, summary.mean_a, summary.se_a, summary.mean_b, summary.se_b,
         summary.gap_mean, summary.gap_se);
  reduce(iter_a, iter_b, summary.iter_mean_a, summary.iter_se_a, summary.iter_mean_b,
         summary.iter_se_b, summary.iter_gap_mean, summary.iter_gap_se);
  return summary;
}

}  // namespace gsgd::opt
