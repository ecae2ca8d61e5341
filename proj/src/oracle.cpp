// SPDX-License-Identifier: Apache-2.0

#include "gsgd/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "gsgd/kernels.hpp"

namespace gsgd::oracle {

NoiseModel NoiseModel::log_multiplicative(double sigma, ZetaDist zeta, problems::ScalarOfW mu) {
  if (sigma < 0.0) throw std::invalid_argument("noise: sigma must be >= 0");
  NoiseModel m;
  m.mode = NoiseMode::LogMultiplicative;
  m.sigma = sigma;
  m.zeta = zeta;
  m.mu = std::move(mu);
  return m;
}

double NoiseModel::draw_zeta(numerics::RngStream& rng) const {
  switch (zeta) {
    case ZetaDist::StandardGaussian:
      return rng.gaussian();
    case ZetaDist::Rademacher:
      return static_cast<double>(rng.rademacher());
  }
  return 0.0;
}

OracleDraw query(const problems::ProblemInstance& problem, const WeightVector& w, std::size_t R,
                 const NoiseModel& noise, numerics::RngStream& rng) {
  if (R < 1) throw std::invalid_argument("query: R must be >= 1");
  OracleDraw draw;
  draw.samples.reserve(R);
  draw.exact_losses.resize(R);
  draw.approx_losses.resize(R);
  for (std::size_t i = 0; i < R; ++i) {
    draw.samples.push_back(problem.draw_sample(rng));
    draw.exact_losses[i] = problem.loss(w, draw.samples.back());
  }
  if (noise.mode == NoiseMode::Exact) {
    draw.approx_losses = draw.exact_losses;
  } else {
    const double mu = noise.mu_at(w);
    for (std::size_t i = 0; i < R; ++i)
      draw.approx_losses[i] =
          draw.exact_losses[i] * std::exp(mu + noise.sigma * noise.draw_zeta(rng));
  }
  return draw;
}

std::size_t select_greedy(const OracleDraw& draw) {
  if (draw.approx_losses.empty()) throw std::invalid_argument("select_greedy: empty draw");
  return kernels::argmax(draw.approx_losses.data(), draw.approx_losses.size());
}

std::size_t select_uniform(const OracleDraw& draw, numerics::RngStream& rng) {
  if (draw.size() == 0) throw std::invalid_argument("select_uniform: empty draw");
  // Scale a 53-bit uniform into [0, R); the deviation from exact uniformity
  // is O(R / 2^53).
  const std::size_t idx =
      static_cast<std::size_t>(rng.next_double() * static_cast<double>(draw.size()));
  return idx < draw.size() ? idx : draw.size() - 1;
}

std::vector<std::size_t> top_fraction_indices(const std::vector<double>& scores,
                                              double keep_fraction) {
  if (!(keep_fraction > 0.0) || keep_fraction > 1.0)
    throw std::invalid_argument("top_fraction: keep_fraction must be in (0, 1]");
  if (scores.empty()) throw std::invalid_argument("top_fraction: empty score list");
  const std::size_t R = scores.size();
  const std::size_t keep =
      std::min(R, static_cast<std::size_t>(std::ceil(keep_fraction * static_cast<double>(R))));
  std::vector<std::size_t> order(R);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  order.resize(keep);
  return order;
}

std::vector<std::size_t> select_top_fraction(const OracleDraw& draw, double keep_fraction) {
  return top_fraction_indices(draw.approx_losses, keep_fraction);
}

const WeightVector& finalize(const problems::ProblemInstance& problem, const WeightVector& w,
                             OracleDraw& draw, std::size_t index, GradEvalCounter* counter) {
  if (index >= draw.size()) throw std::invalid_argument("finalize: index out of range");
  draw.selected_index = index;
  draw.gradient = problem.grad(w, draw.samples[index]);
  if (counter != nullptr) ++counter->count;
  return *draw.gradient;
}

}  // namespace gsgd::oracle
