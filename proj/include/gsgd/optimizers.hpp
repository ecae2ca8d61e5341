// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "gsgd/oracle.hpp"
#include "gsgd/problems.hpp"
#include "gsgd/rng.hpp"
#include "gsgd/weight_vector.hpp"

namespace gsgd::opt {

enum class Method { Sgd, Gsgd };

const char* method_name(Method m);

// Constant step size; eta < 1/L is checked at run start because both
// convergence guarantees assume it.
struct StepSchedule {
  double eta = 0.0;
};

// Checkpointed record of one run. Long runs are strided to at most ~1000
// checkpoints; the running average iterate is maintained online so the
// averaged-iterate loss at a checkpoint k is exactly F((1/k) sum_{i<k} w_i)
// (the step-0 row carries F(w_0) in both loss columns).
struct Trajectory {
  std::vector<std::uint64_t> steps;
  std::vector<WeightVector> iterates;
  std::vector<WeightVector> averaged_iterates;
  std::vector<double> population_losses;
  std::vector<double> averaged_losses;
  std::uint64_t stride = 1;
  std::uint64_t gradient_evals = 0;
  std::uint64_t samples_inspected = 0;
  std::uint64_t seed = 0;
};

// Two independent streams per run: `draw` feeds the oracle (samples and
// loss noise), `select` feeds only SGD's uniform pick. Keeping them apart
// lets both methods replay identical oracle draws (common random numbers).
struct RunStreams {
  numerics::RngStream draw;
  numerics::RngStream select;
};

RunStreams make_run_streams(std::uint64_t seed, std::uint64_t replicate);

using StepObserver =
    std::function<void(std::uint64_t step, const oracle::OracleDraw& draw, std::size_t selected,
                       const WeightVector& w_before)>;

Trajectory run(const problems::ProblemInstance& problem, Method method, std::size_t R,
               const oracle::NoiseModel& noise, const StepSchedule& schedule, std::uint64_t K,
               const WeightVector& w0, RunStreams streams, const StepObserver& observer = {});

// Recorded average iterate after k steps, i.e. (1/k) sum_{i<k} w_i.
// k must be one of the recorded checkpoints; k = 0 is rejected.
const WeightVector& averaged_iterate(const Trajectory& trajectory, std::uint64_t k);

// Paired head-to-head summary over n_seeds replicates with common random
// numbers (shared oracle draws, method-specific selection). The *_a/*_b
// series are averaged-iterate losses, the iter_* series are plain iterate
// losses F(w_k) (where the constant-step plateau is visible); gap = b - a
// with its paired standard error.
struct RaceSummary {
  Method method_a = Method::Sgd;
  Method method_b = Method::Gsgd;
  std::vector<std::uint64_t> ks;
  std::vector<double> mean_a, se_a;
  std::vector<double> mean_b, se_b;
  std::vector<double> gap_mean, gap_se;
  std::vector<double> iter_mean_a, iter_se_a;
  std::vector<double> iter_mean_b, iter_se_b;
  std::vector<double> iter_gap_mean, iter_gap_se;
  std::uint64_t n_seeds = 0;
};

RaceSummary race(const problems::ProblemInstance& problem, Method method_a, Method method_b,
                 std::size_t R, const oracle::NoiseModel& noise, const StepSchedule& schedule,
                 std::uint64_t K, const WeightVector& w0, std::uint64_t n_seeds,
                 std::uint64_t seed);

}  // namespace gsgd::opt
