// SPDX-License-Identifier: Apache-2.0

#include "gsgd/problems.hpp"

#include <cmath>
#include <stdexcept>

#include "gsgd/errors.hpp"
#include "gsgd/kernels.hpp"

namespace gsgd::problems {

ProblemInstance ProblemInstance::noisy_least_squares(std::size_t dim, double feature_radius,
                                                     double label_noise_std, WeightVector w_star) {
  if (dim < 1) throw std::invalid_argument("problem: dim must be >= 1");
  if (!(feature_radius > 0.0)) throw std::invalid_argument("problem: feature_radius must be > 0");
  if (label_noise_std < 0.0) throw std::invalid_argument("problem: label_noise_std must be >= 0");
  if (w_star.dim() != dim) throw std::invalid_argument("problem: w_star dimension mismatch");
  ProblemInstance p;
  p.kind_ = label_noise_std == 0.0 ? ProblemKind::RealizableLeastSquares
                                   : ProblemKind::NoisyLeastSquares;
  p.dim_ = dim;
  p.feature_radius_ = feature_radius;
  p.label_noise_std_ = label_noise_std;
  p.smoothness_ = 2.0 * feature_radius * feature_radius;
  p.w_star_ = std::move(w_star);
  return p;
}

ProblemInstance ProblemInstance::realizable_least_squares(std::size_t dim, double feature_radius,
                                                          WeightVector w_star) {
  return noisy_least_squares(dim, feature_radius, 0.0, std::move(w_star));
}

ProblemInstance ProblemInstance::gaussian_error_model(std::size_t dim, ScalarOfW eps_fn,
                                                      ScalarOfW delta_fn, WeightVector w_star,
                                                      double smoothness) {
  if (dim < 1) throw std::invalid_argument("problem: dim must be >= 1");
  if (!eps_fn || !delta_fn)
    throw std::invalid_argument("problem: gaussian error model needs eps and delta functions");
  if (w_star.dim() != dim) throw std::invalid_argument("problem: w_star dimension mismatch");
  ProblemInstance p;
  p.kind_ = ProblemKind::GaussianErrorModel;
  p.dim_ = dim;
  p.smoothness_ = smoothness;
  p.w_star_ = std::move(w_star);
  p.eps_fn_ = std::move(eps_fn);
  p.delta_fn_ = std::move(delta_fn);
  return p;
}

Sample ProblemInstance::draw_sample(numerics::RngStream& rng) const {
  Sample s;
  draw_sample_into(s, rng);
  return s;
}

void ProblemInstance::draw_sample_into(Sample& s, numerics::RngStream& rng) const {
  if (kind_ == ProblemKind::GaussianErrorModel) {
    s.features.clear();
    s.label = 0.0;
    s.latent = rng.gaussian();
    return;
  }
  // Uniform on the sphere of radius feature_radius: normalized Gaussian.
  s.features.resize(dim_);
  double nsq;
  do {
    rng.fill_gaussian(s.features.data(), dim_);
    nsq = kernels::sum_sq(s.features.data(), dim_);
  } while (nsq == 0.0);
  kernels::scale(s.features.data(), feature_radius_ / std::sqrt(nsq), dim_);
  s.label = kernels::dot(w_star_.data(), s.features.data(), dim_);
  if (label_noise_std_ > 0.0) s.label += label_noise_std_ * rng.gaussian();
}

double ProblemInstance::eps_at(const WeightVector& w) const {
  if (kind_ != ProblemKind::GaussianErrorModel)
    throw NotAvailableError("eps_at: only defined for the gaussian error model");
  return eps_fn_(w);
}

double ProblemInstance::delta_at(const WeightVector& w) const {
  if (kind_ != ProblemKind::GaussianErrorModel)
    throw NotAvailableError("delta_at: only defined for the gaussian error model");
  return delta_fn_(w);
}

double ProblemInstance::loss(const WeightVector& w, const Sample& x) const {
  if (w.dim() != dim_) throw std::invalid_argument("loss: dimension mismatch");
  if (kind_ == ProblemKind::GaussianErrorModel) {
    const double err = eps_fn_(w) + delta_fn_(w) * x.latent;
    return err * err;
  }
  const double r = kernels::dot(w.data(), x.features.data(), dim_) - x.label;
  return r * r;
}

WeightVector ProblemInstance::grad(const WeightVector& w, const Sample& x) const {
  if (w.dim() != dim_) throw std::invalid_argument("grad: dimension mismatch");
  if (kind_ == ProblemKind::GaussianErrorModel)
    throw NotAvailableError("grad: not defined for the gaussian error model");
  const double r = kernels::dot(w.data(), x.features.data(), dim_) - x.label;
  WeightVector g(dim_);
  kernels::axpy(2.0 * r, x.features.data(), g.data(), dim_);
  return g;
}

double ProblemInstance::population_loss(const WeightVector& w) const {
  if (w.dim() != dim_) throw std::invalid_argument("population_loss: dimension mismatch");
  if (kind_ == ProblemKind::GaussianErrorModel) {
    const double e = eps_fn_(w);
    const double d = delta_fn_(w);
    return e * e + d * d;
  }
  // E[a a^T] = (radius^2 / d) I for uniform sphere features.
  const double dsq = norm_sq(w - w_star_);
  return feature_radius_ * feature_radius_ / static_cast<double>(dim_) * dsq +
         label_noise_std_ * label_noise_std_;
}

double ProblemInstance::minimum_value() const {
  if (kind_ == ProblemKind::GaussianErrorModel) return population_loss(w_star_);
  return label_noise_std_ * label_noise_std_;
}

const WeightVector& ProblemInstance::minimizer() const { return w_star_; }

ProblemInstance default_race_instance() {
  return ProblemInstance::noisy_least_squares(10, 1.0, 1.0, WeightVector(10, 0.0));
}

}  // namespace gsgd::problems
