// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>
#include <vector>

#include "gsgd/rng.hpp"
#include "gsgd/weight_vector.hpp"

namespace gsgd::problems {

enum class ProblemKind { NoisyLeastSquares, RealizableLeastSquares, GaussianErrorModel };

// One data point. Least-squares kinds use (features, label); the
// Gaussian-error-model kind uses only the latent standard-normal draw.
struct Sample {
  std::vector<double> features;
  double label = 0.0;
  double latent = 0.0;
};

using ScalarOfW = std::function<double(const WeightVector&)>;

// A per-sample loss family with exact gradients, a smoothness constant and
// analytic population quantities. Least-squares kinds draw features
// uniformly on the sphere of radius feature_radius, so every per-sample
// loss is convex, 2*feature_radius^2-smooth and has minimum value zero.
class ProblemInstance {
 public:
  static ProblemInstance noisy_least_squares(std::size_t dim, double feature_radius,
                                             double label_noise_std, WeightVector w_star);
  static ProblemInstance realizable_least_squares(std::size_t dim, double feature_radius,
                                                  WeightVector w_star);
  // Per-sample prediction error drawn directly from N(eps(w), delta(w)^2);
  // the loss is its square. Carries no gradient or feature structure.
  static ProblemInstance gaussian_error_model(std::size_t dim, ScalarOfW eps_fn,
                                              ScalarOfW delta_fn, WeightVector w_star,
                                              double smoothness = 1.0);

  ProblemKind kind() const { return kind_; }
  std::size_t dim() const { return dim_; }
  double feature_radius() const { return feature_radius_; }
  double label_noise_std() const { return label_noise_std_; }
  double smoothness() const { return smoothness_; }
  const WeightVector& w_star() const { return w_star_; }

  Sample draw_sample(numerics::RngStream& rng) const;
  void draw_sample_into(Sample& s, numerics::RngStream& rng) const;  // reuses s's storage
  double loss(const WeightVector& w, const Sample& x) const;
  WeightVector grad(const WeightVector& w, const Sample& x) const;

  double population_loss(const WeightVector& w) const;
  double minimum_value() const;          // F*
  const WeightVector& minimizer() const;  // the single element of the solution set

  double eps_at(const WeightVector& w) const;
  double delta_at(const WeightVector& w) const;

 private:
  ProblemInstance() = default;

  ProblemKind kind_ = ProblemKind::NoisyLeastSquares;
  std::size_t dim_ = 0;
  double feature_radius_ = 1.0;
  double label_noise_std_ = 0.0;
  double smoothness_ = 1.0;
  WeightVector w_star_;
  ScalarOfW eps_fn_;
  ScalarOfW delta_fn_;
};

// The instance used by the head-to-head experiments: d = 10, unit sphere
// features, unit label noise (so F* = 1), w* = 0.
ProblemInstance default_race_instance();

}  // namespace gsgd::problems
