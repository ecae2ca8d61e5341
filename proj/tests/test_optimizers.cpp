// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "gsgd/errors.hpp"
#include "gsgd/montecarlo.hpp"
#include "gsgd/optimizers.hpp"

using gsgd::WeightVector;
using gsgd::numerics::RngStream;
using namespace gsgd::opt;
namespace oracle = gsgd::oracle;
namespace problems = gsgd::problems;

namespace {

WeightVector offset_w0(const problems::ProblemInstance& p, double dist) {
  WeightVector w0 = p.minimizer();
  WeightVector dir(p.dim(), 1.0 / std::sqrt(static_cast<double>(p.dim())));
  axpy(dist, dir, w0);
  return w0;
}

}  // namespace

TEST_CASE("run: validation of step size, K and w0") {
  const auto p = problems::default_race_instance();
  const WeightVector w0 = offset_w0(p, 1.0);
  CHECK_THROWS_AS(run(p, Method::Sgd, 2, oracle::NoiseModel::exact(), StepSchedule{0.5}, 10, w0,
                      make_run_streams(1, 0)),
                  std::invalid_argument);  // eta = 1/L violates eta < 1/L
  CHECK_THROWS_AS(run(p, Method::Sgd, 2, oracle::NoiseModel::exact(), StepSchedule{-0.1}, 10, w0,
                      make_run_streams(1, 0)),
                  std::invalid_argument);
  CHECK_THROWS_AS(run(p, Method::Sgd, 2, oracle::NoiseModel::exact(), StepSchedule{0.05}, 0, w0,
                      make_run_streams(1, 0)),
                  std::invalid_argument);
  CHECK_THROWS_AS(run(p, Method::Sgd, 2, oracle::NoiseModel::exact(), StepSchedule{0.05}, 10,
                      WeightVector(3, 0.0), make_run_streams(1, 0)),
                  std::invalid_argument);
}

TEST_CASE("run: R=1 makes the two methods bitwise identical") {
  const auto p = problems::default_race_instance();
  const WeightVector w0 = offset_w0(p, 3.0);
  const auto a = run(p, Method::Sgd, 1, oracle::NoiseModel::exact(), StepSchedule{0.1}, 300, w0,
                     make_run_streams(7, 0));
  const auto b = run(p, Method::Gsgd, 1, oracle::NoiseModel::exact(), StepSchedule{0.1}, 300, w0,
                     make_run_streams(7, 0));
  REQUIRE(a.population_losses.size() == b.population_losses.size());
  for (std::size_t i = 0; i < a.population_losses.size(); ++i) {
    CHECK(a.population_losses[i] == b.population_losses[i]);
    CHECK(a.averaged_losses[i] == b.averaged_losses[i]);
  }
}

TEST_CASE("run: 1-D least squares degenerates to deterministic gradient descent") {
  // In one dimension the sphere is {-r, r} and both the per-sample loss and
  // gradient are even in the feature sign, so every seed follows the same
  // deterministic path.
  const auto p = problems::ProblemInstance::realizable_least_squares(1, 1.0, WeightVector(1, 2.0));
  const WeightVector w0(1, 0.0);
  const auto t1 = run(p, Method::Sgd, 3, oracle::NoiseModel::exact(), StepSchedule{0.2}, 50, w0,
                      make_run_streams(1, 0));
  const auto t2 = run(p, Method::Gsgd, 3, oracle::NoiseModel::exact(), StepSchedule{0.2}, 50, w0,
                      make_run_streams(999, 5));
  for (std::size_t i = 0; i < t1.population_losses.size(); ++i)
    CHECK(t1.population_losses[i] == t2.population_losses[i]);
  // Exact contraction: w - w* scales by (1 - 2 eta r^2) each step.
  const double expect = 4.0 * std::pow(1.0 - 0.4, 2.0 * 50);
  CHECK(t1.population_losses.back() == doctest::Approx(expect).epsilon(1e-9));
}

TEST_CASE("run: realizable instance reaches 1e-3 of the initial loss by step 500") {
  const auto p = problems::ProblemInstance::realizable_least_squares(10, 1.0,
                                                                     WeightVector(10, 0.0));
  const double eta = 0.9 / p.smoothness();
  const WeightVector w0 = offset_w0(p, 5.0);
  const double f0 = p.population_loss(w0);
  for (Method m : {Method::Sgd, Method::Gsgd}) {
    gsgd::numerics::RunningMoments final_losses;
    for (std::uint64_t rep = 0; rep < 20; ++rep) {
      const auto t = run(p, m, 4, oracle::NoiseModel::exact(), StepSchedule{eta}, 500, w0,
                         make_run_streams(100, rep));
      final_losses.add(t.population_losses.back());
    }
    CHECK(final_losses.mean() <= 1e-3 * f0);
  }
}

TEST_CASE("run: accounting and determinism invariants") {
  const auto p = problems::default_race_instance();
  const WeightVector w0 = offset_w0(p, 2.0);
  const auto t = run(p, Method::Gsgd, 8, oracle::NoiseModel::exact(), StepSchedule{0.05}, 1234,
                     w0, make_run_streams(42, 1));
  CHECK(t.gradient_evals == 1234);
  CHECK(t.samples_inspected == 8u * 1234u);
  CHECK(t.steps.front() == 0);
  CHECK(t.steps.back() == 1234);

  const auto t2 = run(p, Method::Gsgd, 8, oracle::NoiseModel::exact(), StepSchedule{0.05}, 1234,
                      w0, make_run_streams(42, 1));
  for (std::size_t i = 0; i < t.population_losses.size(); ++i)
    CHECK(t.population_losses[i] == t2.population_losses[i]);
}

TEST_CASE("run: greedy selection always takes at least the batch-average loss") {
  const auto p = problems::default_race_instance();
  const WeightVector w0 = offset_w0(p, 2.0);
  bool all_good = true;
  auto observer = [&](std::uint64_t, const oracle::OracleDraw& draw, std::size_t sel,
                      const WeightVector&) {
    double mean = 0.0;
    for (double f : draw.exact_losses) mean += f;
    mean /= static_cast<double>(draw.size());
    if (draw.exact_losses[sel] < mean) all_good = false;
  };
  run(p, Method::Gsgd, 6, oracle::NoiseModel::exact(), StepSchedule{0.05}, 500, w0,
      make_run_streams(3, 0), observer);
  CHECK(all_good);
}

TEST_CASE("averaged_iterate: prefix means with exact recomputation") {
  const auto p = problems::default_race_instance();
  const WeightVector w0 = offset_w0(p, 1.0);
  const auto t = run(p, Method::Sgd, 2, oracle::NoiseModel::exact(), StepSchedule{0.05}, 10, w0,
                     make_run_streams(8, 0));
  REQUIRE(t.stride == 1);

  const auto& avg1 = averaged_iterate(t, 1);
  for (std::size_t j = 0; j < w0.dim(); ++j) CHECK(avg1[j] == w0[j]);

  const auto& avg3 = averaged_iterate(t, 3);
  for (std::size_t j = 0; j < w0.dim(); ++j) {
    const double want = (t.iterates[0][j] + t.iterates[1][j] + t.iterates[2][j]) / 3.0;
    CHECK(avg3[j] == doctest::Approx(want).epsilon(1e-15));
  }

  CHECK_THROWS_AS(averaged_iterate(t, 0), std::invalid_argument);
  CHECK_THROWS_AS(averaged_iterate(t, 11), std::invalid_argument);

  // A constant trajectory averages to itself: start at the minimizer of a
  // realizable problem, where every gradient vanishes.
  const auto fixed = problems::ProblemInstance::realizable_least_squares(2, 1.0,
                                                                         WeightVector(2, 1.0));
  const auto tc = run(fixed, Method::Sgd, 2, oracle::NoiseModel::exact(), StepSchedule{0.2}, 5,
                      fixed.minimizer(), make_run_streams(1, 0));
  const auto& avg = averaged_iterate(tc, 5);
  for (std::size_t j = 0; j < 2; ++j) CHECK(avg[j] == 1.0);
}

TEST_CASE("race: a method against itself has identically zero gap") {
  const auto p = problems::default_race_instance();
  const WeightVector w0 = offset_w0(p, 2.0);
  const auto summary = race(p, Method::Sgd, Method::Sgd, 4, oracle::NoiseModel::exact(),
                            StepSchedule{0.05}, 200, w0, 8, 31);
  for (std::size_t i = 0; i < summary.ks.size(); ++i) {
    CHECK(summary.gap_mean[i] == 0.0);
    CHECK(summary.gap_se[i] == 0.0);
    CHECK(summary.mean_a[i] == summary.mean_b[i]);
  }
  CHECK_THROWS_AS(race(p, Method::Sgd, Method::Gsgd, 4, oracle::NoiseModel::exact(),
                       StepSchedule{0.05}, 100, w0, 1, 31),
                  std::invalid_argument);
}
