// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "gsgd/errors.hpp"
#include "gsgd/montecarlo.hpp"
#include "gsgd/problems.hpp"
#include "gsgd/special.hpp"

using gsgd::WeightVector;
using gsgd::problems::ProblemInstance;
using gsgd::problems::Sample;
using gsgd::numerics::RngStream;

namespace {

WeightVector random_w(RngStream& rng, std::size_t d, double scale) {
  WeightVector w(d);
  for (std::size_t i = 0; i < d; ++i) w[i] = scale * rng.gaussian();
  return w;
}

}  // namespace

TEST_CASE("draw_sample: sphere radius exact, realizable labels exact") {
  RngStream rng(11, 0);
  WeightVector w_star(4);
  w_star.values = {1.0, -2.0, 0.5, 3.0};
  const auto realizable = ProblemInstance::realizable_least_squares(4, 2.5, w_star);
  for (int i = 0; i < 200; ++i) {
    const Sample s = realizable.draw_sample(rng);
    double nsq = 0.0;
    for (double a : s.features) nsq += a * a;
    CHECK(std::fabs(std::sqrt(nsq) - 2.5) <= 1e-12);
    double dot = 0.0;
    for (std::size_t j = 0; j < 4; ++j) dot += w_star[j] * s.features[j];
    CHECK(s.label == doctest::Approx(dot).epsilon(1e-14));  // no label noise
    CHECK(realizable.loss(w_star, s) <= 1e-24);
  }
}

TEST_CASE("loss and grad: one-dimensional closed forms") {
  const auto p = ProblemInstance::noisy_least_squares(1, 1.0, 1.0, WeightVector(1, 0.0));
  Sample s;
  s.features = {1.0};
  s.label = 2.0;
  WeightVector w(1);
  w[0] = 0.5;
  CHECK(p.loss(w, s) == doctest::Approx(2.25).epsilon(1e-15));
  CHECK(p.grad(w, s)[0] == doctest::Approx(-3.0).epsilon(1e-15));

  WeightVector fit(1);
  fit[0] = 2.0;  // exact fit of (a=1, y=2)
  CHECK(p.loss(fit, s) == 0.0);
  CHECK(p.grad(fit, s)[0] == 0.0);

  WeightVector wrong_dim(3);
  CHECK_THROWS_AS(p.loss(wrong_dim, s), std::invalid_argument);
  CHECK_THROWS_AS(p.grad(wrong_dim, s), std::invalid_argument);
}

TEST_CASE("grad matches central finite differences on random probes") {
  RngStream rng(17, 3);
  const auto p = ProblemInstance::noisy_least_squares(5, 1.3, 0.7, random_w(rng, 5, 1.0));
  const double h = 1e-5;
  for (int probe = 0; probe < 120; ++probe) {
    const Sample s = p.draw_sample(rng);
    WeightVector w = random_w(rng, 5, 2.0);
    const WeightVector g = p.grad(w, s);
    for (std::size_t j = 0; j < 5; ++j) {
      WeightVector wp = w, wm = w;
      wp[j] += h;
      wm[j] -= h;
      const double fd = (p.loss(wp, s) - p.loss(wm, s)) / (2.0 * h);
      CHECK(std::fabs(g[j] - fd) <= 1e-6 * std::max(1.0, std::fabs(fd)));
    }
  }
}

TEST_CASE("population loss closed form and Monte-Carlo agreement") {
  const auto p = ProblemInstance::noisy_least_squares(1, 1.0, 1.0, WeightVector(1, 0.0));
  WeightVector w(1);
  w[0] = 2.0;
  CHECK(p.population_loss(w) == doctest::Approx(5.0).epsilon(1e-15));
  CHECK(p.minimum_value() == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(p.minimizer()[0] == 0.0);

  const auto p10 = gsgd::problems::default_race_instance();
  RngStream rng(23, 0);
  WeightVector w10 = random_w(rng, 10, 1.0);
  const double analytic = p10.population_loss(w10);
  gsgd::numerics::RunningMoments m;
  Sample s;
  for (int i = 0; i < 1000000; ++i) {
    p10.draw_sample_into(s, rng);
    m.add(p10.loss(w10, s));
  }
  const auto est = m.estimate();
  CHECK(std::fabs(est.mean - analytic) <= 3.0 * est.std_error);
}

TEST_CASE("gaussian error model: law, expected loss, analytic pieces") {
  WeightVector w_star(1, 0.0);
  const double eps = 0.3, delta = 0.7;
  const auto gem = ProblemInstance::gaussian_error_model(
      1, [eps](const WeightVector&) { return eps; },
      [delta](const WeightVector&) { return delta; }, w_star);

  // Kolmogorov-Smirnov against N(eps, delta^2) over 1e5 draws; 1% critical
  // value is 1.63 / sqrt(n).
  RngStream rng(37, 0);
  WeightVector w(1, 1.0);
  const int n = 100000;
  std::vector<double> errs(n);
  for (int i = 0; i < n; ++i) {
    const Sample s = gem.draw_sample(rng);
    const double loss = gem.loss(w, s);
    errs[i] = eps + delta * s.latent;
    CHECK(loss == doctest::Approx((eps + delta * s.latent) * (eps + delta * s.latent)));
  }
  std::sort(errs.begin(), errs.end());
  double ks = 0.0;
  for (int i = 0; i < n; ++i) {
    const double cdf =
        0.5 * (1.0 + gsgd::numerics::erf((errs[i] - eps) / (delta * std::sqrt(2.0))));
    ks = std::max(ks, std::fabs(cdf - (i + 1.0) / n));
    ks = std::max(ks, std::fabs(cdf - static_cast<double>(i) / n));
  }
  CHECK(ks < 1.63 / std::sqrt(static_cast<double>(n)));

  CHECK(gem.population_loss(w) == doctest::Approx(eps * eps + delta * delta).epsilon(1e-15));
  CHECK_THROWS_AS(gem.grad(w, Sample{}), gsgd::NotAvailableError);

  // delta = |w - w*|, eps = 0: E[loss] = (w - w*)^2.
  const auto gem2 = ProblemInstance::gaussian_error_model(
      1, [](const WeightVector&) { return 0.0; },
      [w_star](const WeightVector& w_) { return distance(w_, w_star); }, w_star);
  gsgd::numerics::RunningMoments m;
  for (int i = 0; i < 1000000; ++i) m.add(gem2.loss(w, gem2.draw_sample(rng)));
  const auto est = m.estimate();
  CHECK(std::fabs(est.mean - 1.0) <= 3.0 * est.std_error);
}

TEST_CASE("per-sample structure: convexity, smoothness, gradient-norm bound") {
  RngStream rng(41, 0);
  const auto p = ProblemInstance::noisy_least_squares(6, 1.7, 0.5, random_w(rng, 6, 1.0));
  const double L = p.smoothness();
  CHECK(L == doctest::Approx(2.0 * 1.7 * 1.7).epsilon(1e-15));

  for (int probe = 0; probe < 300; ++probe) {
    const Sample s = p.draw_sample(rng);
    const WeightVector w1 = random_w(rng, 6, 2.0);
    const WeightVector w2 = random_w(rng, 6, 2.0);
    const double lambda = rng.next_double();

    WeightVector mix(6);
    for (std::size_t j = 0; j < 6; ++j) mix[j] = lambda * w1[j] + (1.0 - lambda) * w2[j];
    CHECK(p.loss(mix, s) <=
          lambda * p.loss(w1, s) + (1.0 - lambda) * p.loss(w2, s) + 1e-10);

    const WeightVector g1 = p.grad(w1, s);
    const WeightVector g2 = p.grad(w2, s);
    CHECK(norm(g1 - g2) <= L * norm(w1 - w2) + 1e-10);
    CHECK(norm_sq(g1) <= 2.0 * L * p.loss(w1, s) + 1e-8);
  }
}

TEST_CASE("constructor validation") {
  CHECK_THROWS_AS(ProblemInstance::noisy_least_squares(0, 1.0, 1.0, WeightVector(0)),
                  std::invalid_argument);
  CHECK_THROWS_AS(ProblemInstance::noisy_least_squares(2, 0.0, 1.0, WeightVector(2)),
                  std::invalid_argument);
  CHECK_THROWS_AS(ProblemInstance::noisy_least_squares(2, 1.0, -0.5, WeightVector(2)),
                  std::invalid_argument);
  CHECK_THROWS_AS(ProblemInstance::noisy_least_squares(2, 1.0, 1.0, WeightVector(3)),
                  std::invalid_argument);
}
