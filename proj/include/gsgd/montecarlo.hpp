// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <functional>

#include "gsgd/rng.hpp"

namespace gsgd::numerics {

struct McEstimate {
  double mean = 0.0;
  double std_error = 0.0;  // sample std dev / sqrt(n)
  std::int64_t n_samples = 0;
};

// Streaming mean/variance accumulator (Welford), with the pairwise combine
// used for the deterministic substream reduction.
class RunningMoments {
 public:
  void add(double x);
  void combine(const RunningMoments& other);
  std::int64_t count() const { return n_; }
  double mean() const { return mean_; }
  double variance() const;  // unbiased; requires count >= 2
  McEstimate estimate() const;

 private:
  std::int64_t n_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

// Mean and standard error of n i.i.d. draws from `draw`. n >= 2.
McEstimate mc_estimate(RngStream& rng, std::int64_t n,
                       const std::function<double(RngStream&)>& draw);

// Same estimate fanned out over `n_substreams` child streams of `base`
// (substream k handles a fixed share of the n draws). Partial moments are
// combined in substream order, so the result depends only on
// (base, n, n_substreams) — never on the worker-thread schedule. The draw
// callable is invoked concurrently and must be stateless.
McEstimate mc_estimate_parallel(const RngStream& base, std::int64_t n, int n_substreams,
                                const std::function<double(RngStream&)>& draw);

// Fan-out variant for samplers that carry scratch buffers: the factory is
// called once per substream and each returned sampler runs on one thread.
using SamplerFactory = std::function<std::function<double(RngStream&)>(int substream)>;
McEstimate mc_estimate_parallel(const RngStream& base, std::int64_t n, int n_substreams,
                                const SamplerFactory& make_sampler);

// Default substream fan-out used by the estimators in this project. Fixed
// (rather than derived from the thread count) so results are reproducible
// across machines.
inline constexpr int kDefaultSubstreams = 16;

// Worker count for parallel estimators: GSGD_THREADS if set, else the
// hardware concurrency.
int worker_threads();

// Runs body(task) for task in [0, n_tasks) on worker_threads() threads.
// Tasks must write to disjoint slots; completion order is not observable.
void parallel_for(int n_tasks, const std::function<void(int)>& body);

}  // namespace gsgd::numerics
