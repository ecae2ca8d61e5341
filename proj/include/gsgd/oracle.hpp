// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "gsgd/problems.hpp"
#include "gsgd/rng.hpp"
#include "gsgd/weight_vector.hpp"

namespace gsgd::oracle {

enum class NoiseMode { Exact, LogMultiplicative };
enum class ZetaDist { StandardGaussian, Rademacher };

// How approximate losses are produced from exact losses: either identical
// (argmax trivially preserved) or f~ = f * exp(mu(w) + sigma * zeta) with
// zeta mean-0 variance-1, drawn fresh per (query, sample).
struct NoiseModel {
  NoiseMode mode = NoiseMode::Exact;
  double sigma = 0.0;
  ZetaDist zeta = ZetaDist::StandardGaussian;
  problems::ScalarOfW mu;  // empty -> identically 0

  static NoiseModel exact() { return NoiseModel{}; }
  static NoiseModel log_multiplicative(double sigma, ZetaDist zeta = ZetaDist::StandardGaussian,
                                       problems::ScalarOfW mu = {});

  double mu_at(const WeightVector& w) const { return mu ? mu(w) : 0.0; }
  double draw_zeta(numerics::RngStream& rng) const;
};

// One oracle query: R i.i.d. samples with exact and approximate losses.
// The gradient slot stays empty until a selection is finalized.
struct OracleDraw {
  std::vector<problems::Sample> samples;
  std::vector<double> exact_losses;
  std::vector<double> approx_losses;
  std::optional<std::size_t> selected_index;
  std::optional<WeightVector> gradient;

  std::size_t size() const { return samples.size(); }
};

// Counts gradient evaluations; exactly one per finalized query.
struct GradEvalCounter {
  std::uint64_t count = 0;
};

// Draw R samples at w and price them under the noise model. No gradient
// work happens here.
OracleDraw query(const problems::ProblemInstance& problem, const WeightVector& w, std::size_t R,
                 const NoiseModel& noise, numerics::RngStream& rng);

// Index of the largest approximate loss; ties go to the lowest index.
std::size_t select_greedy(const OracleDraw& draw);

// Uniformly random index.
std::size_t select_uniform(const OracleDraw& draw, numerics::RngStream& rng);

// The ceil(keep_fraction * R) indices of largest approximate loss, ordered
// by descending loss with ties by lowest index.
std::vector<std::size_t> select_top_fraction(const OracleDraw& draw, double keep_fraction);

// Same rule on a bare score vector (shared with the batch-filtering trainer).
std::vector<std::size_t> top_fraction_indices(const std::vector<double>& scores,
                                              double keep_fraction);

// Evaluate the gradient of the chosen sample, stamp the draw, bump the
// counter. This is the single gradient evaluation the query is entitled to.
const WeightVector& finalize(const problems::ProblemInstance& problem, const WeightVector& w,
                             OracleDraw& draw, std::size_t index,
                             GradEvalCounter* counter = nullptr);

}  // namespace gsgd::oracle
