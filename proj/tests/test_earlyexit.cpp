// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>
#include <stdexcept>
#include <vector>

#include "gsgd/earlyexit.hpp"
#include "gsgd/oracle.hpp"
#include "gsgd/special.hpp"
#include "gsgd/theory.hpp"

using gsgd::numerics::RngStream;
using namespace gsgd::earlyexit;

namespace {

LinearNet identity_net(std::size_t d, std::size_t k, std::vector<double> head) {
  LinearNet net;
  for (std::size_t i = 0; i < k; ++i) net.layers.push_back(Matrix::identity(d));
  net.head = std::move(head);
  return net;
}

// beta_j recomputed with explicit dense prefix/suffix products.
double beta_by_matrices(const LinearNet& net, std::size_t j) {
  const std::size_t d = net.dim();
  auto matmul = [d](const Matrix& lhs, const Matrix& rhs) {
    Matrix out(d, d);
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t c = 0; c < d; ++c) {
        double s = 0.0;
        for (std::size_t t = 0; t < d; ++t) s += lhs.at(i, t) * rhs.at(t, c);
        out.at(i, c) = s;
      }
    return out;
  };
  Matrix a = net.layers[0];
  for (std::size_t i = 1; i < j; ++i) a = matmul(net.layers[i], a);  // A_j = W_j ... W_1
  Matrix b = Matrix::identity(d);
  for (std::size_t i = j; i < net.depth(); ++i) b = matmul(net.layers[i], b);  // B_j

  const auto av = a.matvec_transposed(net.head);
  const auto bv = b.matvec_transposed(net.head);
  const auto abv = a.matvec_transposed(bv);
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < d; ++i) {
    dot += av[i] * abv[i];
    na += av[i] * av[i];
    nb += abv[i] * abv[i];
  }
  return dot / std::sqrt(na * nb);
}

}  // namespace

TEST_CASE("prefix_logit: identity layers, full-depth equality, hand example") {
  RngStream rng(1, 0);
  auto net = identity_net(3, 4, {0.3, -1.0, 2.0});
  const std::vector<double> x{1.0, 2.0, -0.5};
  const double logit = 0.3 * 1.0 - 1.0 * 2.0 + 2.0 * -0.5;
  for (std::size_t j = 1; j <= 4; ++j) {
    CHECK(prefix_logit(net, j, x) == doctest::Approx(logit).epsilon(1e-15));
    CHECK(early_prediction(net, j, x) ==
          doctest::Approx(gsgd::numerics::sigmoid(logit)).epsilon(1e-15));
  }

  auto deep = random_net(6, 3, rng);
  const auto z = gsgd::numerics::sample_gaussian_vector(rng, 6, 1.0);
  CHECK(prefix_logit(deep, 3, z) == prefix_logit(deep, deep.depth(), z));

  LinearNet hand;
  hand.layers.push_back(Matrix(2, 2));
  hand.layers.back().at(0, 0) = 1.0;
  hand.layers.back().at(1, 1) = 2.0;
  hand.layers.push_back(Matrix(2, 2));
  hand.layers.back().at(0, 1) = 1.0;
  hand.layers.back().at(1, 0) = 1.0;
  hand.head = {1.0, 1.0};
  const std::vector<double> ones{1.0, 1.0};
  CHECK(prefix_logit(hand, 1, ones) == doctest::Approx(3.0).epsilon(1e-15));
  CHECK(prefix_logit(hand, 2, ones) == doctest::Approx(3.0).epsilon(1e-15));

  CHECK_THROWS_AS(prefix_logit(hand, 0, ones), std::invalid_argument);
  CHECK_THROWS_AS(prefix_logit(hand, 3, ones), std::invalid_argument);
}

TEST_CASE("cross_entropy and binary_entropy") {
  CHECK(cross_entropy(1, 1.0) <= 1.1e-12);  // clamped at 1 - 1e-12
  CHECK(cross_entropy(0, 0.0) <= 1.1e-12);
  CHECK(cross_entropy(1, 0.3) == doctest::Approx(-std::log(0.3)).epsilon(1e-15));
  CHECK(binary_entropy(0.5) == doctest::Approx(std::numbers::ln2).epsilon(1e-15));
  CHECK(binary_entropy(0.9) == doctest::Approx(0.3250829733914482).epsilon(1e-12));
  CHECK(binary_entropy(0.0) >= 0.0);
  CHECK_THROWS_AS(cross_entropy(2, 0.5), std::invalid_argument);
}

TEST_CASE("beta_j: depth gives 1, constructed zero-similarity net gives 0") {
  RngStream rng(2, 0);
  auto net = random_net(8, 3, rng);
  CHECK(beta_j(net, 3) == doctest::Approx(1.0).epsilon(1e-12));

  auto zero = make_net_with_beta(4, 0.0, rng);
  CHECK(beta_j(zero, 1) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(beta_j(zero, 2) == doctest::Approx(1.0).epsilon(1e-12));

  for (double target : {0.1, 0.5, 0.9, 0.99, 1.0}) {
    auto m = make_net_with_beta(6, target, rng);
    CHECK(beta_j(m, 1) == doctest::Approx(target).epsilon(1e-10));
  }

  LinearNet degenerate = identity_net(3, 2, {0.0, 0.0, 0.0});
  CHECK_THROWS_AS(beta_j(degenerate, 1), std::domain_error);
}

TEST_CASE("beta_j matches an explicit dense-matrix recomputation") {
  RngStream rng(3, 0);
  for (int rep = 0; rep < 20; ++rep) {
    auto net = random_net(8, 3, rng);
    for (std::size_t j = 1; j <= 3; ++j)
      CHECK(beta_j(net, j) == doctest::Approx(beta_by_matrices(net, j)).epsilon(1e-12));
  }
}

TEST_CASE("sample_assumption61_z: same draws as the pj Monte-Carlo inner loop") {
  // The estimator scales standard normals by sqrt(2) inline; that must be
  // the identical arithmetic the public sampler performs.
  RngStream a(99, 4), b(99, 4);
  const auto z = sample_assumption61_z(a, 5);
  for (std::size_t i = 0; i < 5; ++i) CHECK(z[i] == std::sqrt(2.0) * b.gaussian());
}

TEST_CASE("sample_assumption61_z: variance 2 per coordinate, zero cross-covariance") {
  RngStream rng(4, 0);
  const int n = 1000000;
  double var0 = 0.0, var1 = 0.0, cross = 0.0;
  for (int i = 0; i < n; ++i) {
    const auto z = sample_assumption61_z(rng, 2);
    var0 += z[0] * z[0];
    var1 += z[1] * z[1];
    cross += z[0] * z[1];
  }
  CHECK(std::fabs(var0 / n - 2.0) <= 0.02);
  CHECK(std::fabs(var1 / n - 2.0) <= 0.02);
  CHECK(std::fabs(cross / n) <= 3.0 * 2.0 / std::sqrt(static_cast<double>(n)));
}

TEST_CASE("pj_monte_carlo: depth layer, independent construction, quadrature agreement") {
  RngStream rng(5, 0);
  auto net = random_net(8, 2, rng);
  const auto deep = pj_monte_carlo(net, 2, 100000, RngStream(6, 0));
  CHECK(std::fabs(deep.mean - 1.0) <= 3.0 * deep.std_error);

  auto zero = make_net_with_beta(8, 0.0, rng);
  const auto half = pj_monte_carlo(zero, 1, 200000, RngStream(7, 0));
  CHECK(std::fabs(half.mean - 0.5) <= 3.0 * half.std_error);

  for (double target : {0.3, 0.7, 0.95}) {
    auto m = make_net_with_beta(8, target, rng);
    const double quad = gsgd::theory::pj_exact(beta_j(m, 1), 1e-10);
    const auto mc = pj_monte_carlo(m, 1, 400000, RngStream(8, static_cast<std::uint64_t>(target * 100)));
    CHECK(std::fabs(mc.mean - quad) <= 3.0 * mc.std_error);
  }

  CHECK_THROWS_AS(pj_monte_carlo(net, 1, 100, RngStream(9, 0)), std::invalid_argument);
}

TEST_CASE("loss ordering at layer j reduces to the sign of a linear functional of z") {
  // With the increasing logistic, l_j(1) >= l_j(2) iff theta^T A_j (ybar1 x1
  // - ybar2 x2) <= 0; argmax agreement between layers j and k is sign
  // agreement of the two functionals.
  RngStream rng(10, 0);
  int checked = 0;
  while (checked < 10000) {
    auto net = random_net(5, 3, rng);
    const std::size_t j = 1 + static_cast<std::size_t>(rng.next_u64() % 2);
    LabeledPair p1, p2;
    p1.x = gsgd::numerics::sample_gaussian_vector(rng, 5, 1.0);
    p2.x = gsgd::numerics::sample_gaussian_vector(rng, 5, 1.0);
    p1.y = rng.next_u64() & 1 ? 1 : 0;
    p2.y = rng.next_u64() & 1 ? 1 : 0;
    p1.y_bar = 2 * p1.y - 1;
    p2.y_bar = 2 * p2.y - 1;

    const double logit1 = prefix_logit(net, j, p1.x);
    const double logit2 = prefix_logit(net, j, p2.x);
    if (std::fabs(logit1) > 25.0 || std::fabs(logit2) > 25.0) continue;  // clamp region

    const double l1 = cross_entropy(p1.y, gsgd::numerics::sigmoid(logit1));
    const double l2 = cross_entropy(p2.y, gsgd::numerics::sigmoid(logit2));

    std::vector<double> z(5);
    for (std::size_t i = 0; i < 5; ++i) z[i] = p1.y_bar * p1.x[i] - p2.y_bar * p2.x[i];
    std::vector<double> head_j = net.head;
    for (std::size_t i = j; i >= 1; --i) head_j = net.layers[i - 1].matvec_transposed(head_j);
    double functional = 0.0;
    for (std::size_t i = 0; i < 5; ++i) functional += head_j[i] * z[i];

    CHECK((l1 >= l2) == (functional <= 0.0));
    ++checked;
  }
}

TEST_CASE("depth-exit filtering equals exact-loss top-fraction selection") {
  RngStream rng(11, 0);
  auto net = random_net(6, 2, rng);
  const auto data = make_planted_direction_task(random_unit_direction(6, rng));
  for (int rep = 0; rep < 200; ++rep) {
    std::vector<LabeledPair> batch(10);
    std::vector<double> early_scores(10), exact_losses(10);
    for (int i = 0; i < 10; ++i) {
      batch[i] = data(rng);
      early_scores[i] = cross_entropy(batch[i].y, early_prediction(net, 2, batch[i].x));
      exact_losses[i] =
          cross_entropy(batch[i].y, early_prediction(net, net.depth(), batch[i].x));
    }
    const auto by_early = gsgd::oracle::top_fraction_indices(early_scores, 0.5);
    const auto by_exact = gsgd::oracle::top_fraction_indices(exact_losses, 0.5);
    CHECK(by_early == by_exact);
  }
}

TEST_CASE("sift_train: accounting identities") {
  RngStream rng(12, 0);
  const auto data = make_planted_direction_task(random_unit_direction(8, rng));
  auto net = identity_net(8, 2, std::vector<double>(8, 0.01));

  SiftConfig cfg;
  cfg.batch_size = 8;
  cfg.keep_fraction = 0.5;
  cfg.exit_layer = 1;
  cfg.warmup_steps = 3;
  cfg.step_size = 0.05;
  cfg.total_steps = 10;
  cfg.eval_set_size = 50;

  const auto result = sift_train(data, net, cfg, RngStream(13, 0));
  const auto& log = result.log;
  REQUIRE(log.eval_loss.size() == 10);
  for (std::size_t s = 0; s < 10; ++s) {
    CHECK(log.scored_samples[s] == 8 * (s + 1));
    const std::uint64_t expect_backprop =
        s < 3 ? 8 * (s + 1) : 8 * 3 + 4 * (s + 1 - 3);
    CHECK(log.backprop_samples[s] == expect_backprop);
  }
  // scored - backprop = (1 - keep) * batch * steps-after-warmup, exactly
  CHECK(log.scored_samples.back() - log.backprop_samples.back() == 4 * (10 - 3));
}

TEST_CASE("sift_train: keep=1 and warmup=total both reproduce the baseline bitwise") {
  RngStream rng(14, 0);
  const auto data = make_planted_direction_task(random_unit_direction(10, rng));
  auto net = identity_net(10, 2, std::vector<double>(10, 0.02));

  SiftConfig filt;
  filt.batch_size = 16;
  filt.keep_fraction = 1.0;
  filt.exit_layer = 1;
  filt.warmup_steps = 0;
  filt.step_size = 0.1;
  filt.total_steps = 40;
  filt.eval_set_size = 100;

  SiftConfig baseline = filt;
  baseline.warmup_steps = filt.total_steps;  // never filters

  SiftConfig warm_only = filt;
  warm_only.keep_fraction = 0.5;
  warm_only.warmup_steps = filt.total_steps;

  const auto a = sift_train(data, net, filt, RngStream(15, 3));
  const auto b = sift_train(data, net, baseline, RngStream(15, 3));
  const auto c = sift_train(data, net, warm_only, RngStream(15, 3));

  REQUIRE(a.log.eval_loss.size() == b.log.eval_loss.size());
  for (std::size_t i = 0; i < a.log.eval_loss.size(); ++i) {
    CHECK(a.log.eval_loss[i] == b.log.eval_loss[i]);
    CHECK(b.log.eval_loss[i] == c.log.eval_loss[i]);
  }
  for (std::size_t l = 0; l < 2; ++l)
    for (std::size_t i = 0; i < 100; ++i) {
      CHECK(a.model.layers[l].a[i] == b.model.layers[l].a[i]);
      CHECK(b.model.layers[l].a[i] == c.model.layers[l].a[i]);
    }
}

TEST_CASE("sift_train: deterministic given the stream; entropy criterion runs") {
  RngStream rng(16, 0);
  const auto data = make_planted_direction_task(random_unit_direction(6, rng));
  auto net = identity_net(6, 2, std::vector<double>(6, 0.05));

  SiftConfig cfg;
  cfg.batch_size = 8;
  cfg.keep_fraction = 0.5;
  cfg.criterion = SiftCriterion::EarlyEntropy;
  cfg.exit_layer = 1;
  cfg.warmup_steps = 2;
  cfg.step_size = 0.1;
  cfg.total_steps = 30;
  cfg.eval_set_size = 64;

  const auto a = sift_train(data, net, cfg, RngStream(17, 1));
  const auto b = sift_train(data, net, cfg, RngStream(17, 1));
  for (std::size_t i = 0; i < a.log.eval_loss.size(); ++i)
    CHECK(a.log.eval_loss[i] == b.log.eval_loss[i]);
}

TEST_CASE("sift_train: filtering reaches the loss threshold with fewer backprop samples") {
  // Small smoke version of the toy-advantage experiment.
  int sift_wins = 0;
  for (std::uint64_t rep = 0; rep < 4; ++rep) {
    RngStream dir_rng(18, rep);
    const auto data = make_planted_direction_task(random_unit_direction(10, dir_rng));
    auto net = identity_net(10, 2, std::vector<double>(10, 0.01));

    SiftConfig cfg;
    cfg.batch_size = 32;
    cfg.keep_fraction = 0.5;
    cfg.exit_layer = 1;
    cfg.warmup_steps = 5;
    cfg.step_size = 0.3;
    cfg.total_steps = 200;
    cfg.eval_set_size = 200;
    SiftConfig baseline = cfg;
    baseline.keep_fraction = 1.0;
    baseline.warmup_steps = cfg.total_steps;

    const auto s = sift_train(data, net, cfg, RngStream(19, rep));
    const auto b = sift_train(data, net, baseline, RngStream(19, rep));
    auto to_threshold = [](const TrainLog& log) -> std::uint64_t {
      for (std::size_t i = 0; i < log.eval_loss.size(); ++i)
        if (log.eval_loss[i] <= 0.3) return log.backprop_samples[i];
      return UINT64_MAX;
    };
    const auto st = to_threshold(s.log);
    const auto bt = to_threshold(b.log);
    REQUIRE(st != UINT64_MAX);
    REQUIRE(bt != UINT64_MAX);
    if (st < bt) ++sift_wins;
  }
  CHECK(sift_wins >= 3);
}

TEST_CASE("sift_train: configuration validation") {
  RngStream rng(20, 0);
  const auto data = make_planted_direction_task(random_unit_direction(4, rng));
  auto net = identity_net(4, 2, std::vector<double>(4, 0.01));
  SiftConfig cfg;
  cfg.batch_size = 4;
  cfg.total_steps = 2;

  SiftConfig bad = cfg;
  bad.keep_fraction = 0.0;
  CHECK_THROWS_AS(sift_train(data, net, bad, RngStream(1, 0)), std::invalid_argument);
  bad = cfg;
  bad.exit_layer = 3;
  CHECK_THROWS_AS(sift_train(data, net, bad, RngStream(1, 0)), std::invalid_argument);
  bad = cfg;
  bad.step_size = 0.0;
  CHECK_THROWS_AS(sift_train(data, net, bad, RngStream(1, 0)), std::invalid_argument);
}
