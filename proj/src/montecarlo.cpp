// SPDX-License-Identifier: Apache-2.0

#include "gsgd/montecarlo.hpp"

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <stdexcept>
#include <thread>
#include <vector>

namespace gsgd::numerics {

void RunningMoments::add(double x) {
  ++n_;
  const double delta = x - mean_;
  mean_ += delta / static_cast<double>(n_);
  m2_ += delta * (x - mean_);
}

void RunningMoments::combine(const RunningMoments& other) {
  if (other.n_ == 0) return;
  if (n_ == 0) {
    *this = other;
    return;
  }
  const double na = static_cast<double>(n_);
  const double nb = static_cast<double>(other.n_);
  const double delta = other.mean_ - mean_;
  const double nt = na + nb;
  mean_ += delta * nb / nt;
  m2_ += other.m2_ + delta * delta * na * nb / nt;
  n_ += other.n_;
}

double RunningMoments::variance() const {
  if (n_ < 2) throw std::invalid_argument("RunningMoments: variance needs n >= 2");
  return m2_ / static_cast<double>(n_ - 1);
}

McEstimate RunningMoments::estimate() const {
  if (n_ < 2) throw std::invalid_argument("McEstimate: needs n >= 2");
  const double var = variance();
  const double se = var > 0.0 ? std::sqrt(var / static_cast<double>(n_)) : 0.0;
  return McEstimate{mean_, se, n_};
}

McEstimate mc_estimate(RngStream& rng, std::int64_t n,
                       const std::function<double(RngStream&)>& draw) {
  if (n < 2) throw std::invalid_argument("mc_estimate: n must be >= 2");
  RunningMoments moments;
  for (std::int64_t i = 0; i < n; ++i) moments.add(draw(rng));
  return moments.estimate();
}

McEstimate mc_estimate_parallel(const RngStream& base, std::int64_t n, int n_substreams,
                                const SamplerFactory& make_sampler) {
  if (n < 2) throw std::invalid_argument("mc_estimate_parallel: n must be >= 2");
  if (n_substreams < 1) throw std::invalid_argument("mc_estimate_parallel: need >= 1 substream");

  std::vector<RunningMoments> partial(static_cast<std::size_t>(n_substreams));
  parallel_for(n_substreams, [&](int k) {
    const std::int64_t share = n / n_substreams + (k < n % n_substreams ? 1 : 0);
    RngStream rng = base.substream(static_cast<std::uint64_t>(k));
    auto draw = make_sampler(k);
    RunningMoments& m = partial[static_cast<std::size_t>(k)];
    for (std::int64_t i = 0; i < share; ++i) m.add(draw(rng));
  });

  RunningMoments total;
  for (const auto& m : partial) total.combine(m);
  return total.estimate();
}

McEstimate mc_estimate_parallel(const RngStream& base, std::int64_t n, int n_substreams,
                                const std::function<double(RngStream&)>& draw) {
  return mc_estimate_parallel(base, n, n_substreams,
                              SamplerFactory([&draw](int) { return draw; }));
}

int worker_threads() {
  if (const char* env = std::getenv("GSGD_THREADS")) {
    const int v = std::atoi(env);
    if (v >= 1) return v;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

void parallel_for(int n_tasks, const std::function<void(int)>& body) {
  if (n_tasks <= 0) return;
  const int n_workers = std::min(worker_threads(), n_tasks);
  if (n_workers == 1) {
    for (int t = 0; t < n_tasks; ++t) body(t);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> workers;
  workers.reserve(static_cast<std::size_t>(n_workers));
  for (int w = 0; w < n_workers; ++w) {
    workers.emplace_back([&]() {
      for (int t = next.fetch_add(1); t < n_tasks; t = next.fetch_add(1)) body(t);
    });
  }
  for (auto& th : workers) th.join();
}

}  // namespace gsgd::numerics
