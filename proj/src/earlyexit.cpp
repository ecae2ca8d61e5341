// SPDX-License-Identifier: Apache-2.0

#include "gsgd/earlyexit.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "gsgd/errors.hpp"
#include "gsgd/kernels.hpp"
#include "gsgd/oracle.hpp"
#include "gsgd/special.hpp"

namespace gsgd::earlyexit {

namespace {
constexpr double kProbClamp = 1e-12;

double clamp_prob(double p) { return std::min(1.0 - kProbClamp, std::max(kProbClamp, p)); }

void check_layer(const LinearNet& net, std::size_t j, const char* where) {
  if (j < 1 || j > net.depth())
    throw std::invalid_argument(std::string(where) + ": layer index out of range");
}
}  // namespace

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m.at(i, i) = 1.0;
  return m;
}

std::vector<double> Matrix::matvec(const std::vector<double>& x) const {
  if (x.size() != cols) throw std::invalid_argument("matvec: dimension mismatch");
  std::vector<double> y(rows);
  for (std::size_t i = 0; i < rows; ++i) y[i] = kernels::dot(&a[i * cols], x.data(), cols);
  return y;
}

std::vector<double> Matrix::matvec_transposed(const std::vector<double>& x) const {
  if (x.size() != rows) throw std::invalid_argument("matvec_transposed: dimension mismatch");
  std::vector<double> y(cols, 0.0);
  for (std::size_t i = 0; i < rows; ++i) kernels::axpy(x[i], &a[i * cols], y.data(), cols);
  return y;
}

double prefix_logit(const LinearNet& net, std::size_t j, const std::vector<double>& x) {
  check_layer(net, j, "prefix_logit");
  if (x.size() != net.dim()) throw std::invalid_argument("prefix_logit: dimension mismatch");
  std::vector<double> h = net.layers[0].matvec(x);
  for (std::size_t i = 1; i < j; ++i) h = net.layers[i].matvec(h);
  return kernels::dot(net.head.data(), h.data(), h.size());
}

double early_prediction(const LinearNet& net, std::size_t j, const std::vector<double>& x) {
  return numerics::sigmoid(prefix_logit(net, j, x));
}

double cross_entropy(int y, double p) {
  if (y != 0 && y != 1) throw std::invalid_argument("cross_entropy: label must be 0 or 1");
  const double q = clamp_prob(p);
  return y == 1 ? -std::log(q) : -std::log(1.0 - q);
}

double binary_entropy(double p) {
  const double q = clamp_prob(p);
  return -q * std::log(q) - (1.0 - q) * std::log(1.0 - q);
}

double beta_j(const LinearNet& net, std::size_t j) {
  check_layer(net, j, "beta_j");
  // a = A_j^T theta = W_1^T ... W_j^T theta
  std::vector<double> a = net.head;
  for (std::size_t i = j; i >= 1; --i) a = net.layers[i - 1].matvec_transposed(a);
  // u = B_j^T theta = W_{j+1}^T ... W_k^T theta, then A_j^T u
  std::vector<double> u = net.head;
  for (std::size_t i = net.depth(); i > j; --i) u = net.layers[i - 1].matvec_transposed(u);
  for (std::size_t i = j; i >= 1; --i) u = net.layers[i - 1].matvec_transposed(u);

  const double na = std::sqrt(kernels::sum_sq(a.data(), a.size()));
  const double nu = std::sqrt(kernels::sum_sq(u.data(), u.size()));
  if (na == 0.0 || nu == 0.0)
    throw std::domain_error("beta_j: degenerate configuration (zero projected head)");
  return kernels::dot(a.data(), u.data(), a.size()) / (na * nu);
}

std::vector<double> sample_assumption61_z(RngStream& rng, std::size_t d) {
  if (d < 1) throw std::invalid_argument("sample_assumption61_z: d must be >= 1");
  return numerics::sample_gaussian_vector(rng, d, 2.0);
}

McEstimate pj_monte_carlo(const LinearNet& net, std::size_t j, std::int64_t n,
                          const RngStream& rng) {
  check_layer(net, j, "pj_monte_carlo");
  if (n < 10000) throw std::invalid_argument("pj_monte_carlo: n must be >= 1e4");

  // Both events are signs of fixed linear functionals of z.
  std::vector<double> early = net.head;
  for (std::size_t i = j; i >= 1; --i) early = net.layers[i - 1].matvec_transposed(early);
  std::vector<double> full = net.head;
  for (std::size_t i = net.depth(); i >= 1; --i) full = net.layers[i - 1].matvec_transposed(full);

  const std::size_t d = net.dim();
  const double sqrt2 = std::sqrt(2.0);
  auto factory = [&](int) {
    std::vector<double> z(d);
    return [&early, &full, d, sqrt2, z](RngStream& r) mutable {
      for (std::size_t i = 0; i < d; ++i) z[i] = sqrt2 * r.gaussian();
      const bool both = kernels::dot(early.data(), z.data(), d) >= 0.0 &&
                        kernels::dot(full.data(), z.data(), d) >= 0.0;
      return both ? 2.0 : 0.0;
    };
  };
  return numerics::mc_estimate_parallel(rng, n, numerics::kDefaultSubstreams,
                                        numerics::SamplerFactory(factory));
}

LinearNet random_net(std::size_t dim, std::size_t depth, RngStream& rng) {
  if (dim < 1 || depth < 1) throw std::invalid_argument("random_net: dim and depth must be >= 1");
  LinearNet net;
  net.layers.reserve(depth);
  const double scale = 1.0 / std::sqrt(static_cast<double>(dim));
  for (std::size_t l = 0; l < depth; ++l) {
    Matrix w(dim, dim);
    for (auto& v : w.a) v = scale * rng.gaussian();
    net.layers.push_back(std::move(w));
  }
  net.head.resize(dim);
  for (auto& v : net.head) v = rng.gaussian();
  return net;
}

LinearNet make_net_with_beta(std::size_t dim, double beta, RngStream& rng) {
  if (dim < 2) throw std::invalid_argument("make_net_with_beta: dim must be >= 2");
  if (beta < 0.0 || beta > 1.0)
    throw std::invalid_argument("make_net_with_beta: beta must be in [0, 1]");

  // Random head direction.
  std::vector<double> theta(dim);
  double nt = 0.0;
  do {
    for (auto& v : theta) v = rng.gaussian();
    nt = std::sqrt(kernels::sum_sq(theta.data(), dim));
  } while (nt < 1e-12);
  std::vector<double> theta_hat = theta;
  kernels::scale(theta_hat.data(), 1.0 / nt, dim);

  // Random unit direction orthogonal to theta.
  std::vector<double> v(dim);
  double nv = 0.0;
  do {
    for (auto& x : v) x = rng.gaussian();
    kernels::axpy(-kernels::dot(v.data(), theta_hat.data(), dim), theta_hat.data(), v.data(), dim);
    nv = std::sqrt(kernels::sum_sq(v.data(), dim));
  } while (nv < 1e-9);
  kernels::scale(v.data(), 1.0 / nv, dim);

  // W_1: random orthogonal (QR of a Gaussian matrix by Gram-Schmidt), scaled.
  Matrix q(dim, dim);
  for (std::size_t r = 0; r < dim; ++r) {
    std::vector<double> row(dim);
    double nr = 0.0;
    do {
      for (auto& x : row) x = rng.gaussian();
      for (std::size_t p = 0; p < r; ++p)
        kernels::axpy(-kernels::dot(row.data(), &q.a[p * dim], dim), &q.a[p * dim], row.data(),
                      dim);
      nr = std::sqrt(kernels::sum_sq(row.data(), dim));
    } while (nr < 1e-9);
    kernels::scale(row.data(), 1.0 / nr, dim);
    std::copy(row.begin(), row.end(), q.a.begin() + static_cast<std::ptrdiff_t>(r * dim));
  }
  const double s1 = 0.5 + rng.next_double();  // random positive scale
  for (auto& x : q.a) x *= s1;

  // W_2^T rotates theta_hat toward cos(alpha) theta_hat + sin(alpha) v in the
  // {theta_hat, v} plane:
  //   R = I + (cos a - 1)(tt^T + vv^T) + sin a (v t^T - t v^T).
  const double ca = beta;
  const double sa = std::sqrt(std::max(0.0, 1.0 - beta * beta));
  const double s2 = 0.5 + rng.next_double();
  Matrix w2(dim, dim);
  for (std::size_t i = 0; i < dim; ++i) {
    for (std::size_t k = 0; k < dim; ++k) {
      double r_ik = (i == k ? 1.0 : 0.0) +
                    (ca - 1.0) * (theta_hat[i] * theta_hat[k] + v[i] * v[k]) +
                    sa * (v[i] * theta_hat[k] - theta_hat[i] * v[k]);
      w2.at(k, i) = s2 * r_ik;  // W_2 = s2 * R^T
    }
  }

  LinearNet net;
  net.layers.push_back(std::move(q));
  net.layers.push_back(std::move(w2));
  net.head = std::move(theta);
  return net;
}

DataSource make_planted_direction_task(std::vector<double> direction) {
  const double n = std::sqrt(kernels::sum_sq(direction.data(), direction.size()));
  if (!(n > 0.0)) throw std::invalid_argument("planted task: direction must be nonzero");
  kernels::scale(direction.data(), 1.0 / n, direction.size());
  return [dir = std::move(direction)](RngStream& rng) {
    LabeledPair p;
    p.x.resize(dir.size());
    rng.fill_gaussian(p.x.data(), dir.size());
    p.y = kernels::dot(dir.data(), p.x.data(), dir.size()) >= 0.0 ? 1 : 0;
    p.y_bar = 2 * p.y - 1;
    return p;
  };
}

std::vector<double> random_unit_direction(std::size_t d, RngStream& rng) {
  std::vector<double> v(d);
  double n = 0.0;
  do {
    rng.fill_gaussian(v.data(), d);
    n = std::sqrt(kernels::sum_sq(v.data(), d));
  } while (n < 1e-12);
  kernels::scale(v.data(), 1.0 / n, d);
  return v;
}

namespace {

struct Workspace {
  std::vector<std::vector<double>> activations;  // h_0 .. h_k
  std::vector<double> delta;
  std::vector<Matrix> grad_layers;
  std::vector<double> grad_head;

  explicit Workspace(const LinearNet& net) {
    activations.assign(net.depth() + 1, std::vector<double>(net.dim(), 0.0));
    delta.assign(net.dim(), 0.0);
    grad_layers.assign(net.depth(), Matrix(net.dim(), net.dim()));
    grad_head.assign(net.dim(), 0.0);
  }

  void zero_grads() {
    for (auto& g : grad_layers) std::fill(g.a.begin(), g.a.end(), 0.0);
    std::fill(grad_head.begin(), grad_head.end(), 0.0);
  }
};

// Full forward pass recording activations; returns the output probability.
double forward(const LinearNet& net, const std::vector<double>& x, Workspace& ws) {
  ws.activations[0] = x;
  for (std::size_t l = 0; l < net.depth(); ++l)
    ws.activations[l + 1] = net.layers[l].matvec(ws.activations[l]);
  return numerics::sigmoid(
      kernels::dot(net.head.data(), ws.activations.back().data(), net.dim()));
}

// Accumulate the cross-entropy gradient of one sample into ws grads.
void accumulate_gradient(const LinearNet& net, const LabeledPair& sample, Workspace& ws) {
  const double p = forward(net, sample.x, ws);
  const double e = p - static_cast<double>(sample.y);  // dL/dlogit
  const std::size_t d = net.dim();

  kernels::axpy(e, ws.activations.back().data(), ws.grad_head.data(), d);
  // delta_l = dL/dh_l, starting at the top layer.
  ws.delta = net.head;
  kernels::scale(ws.delta.data(), e, d);
  for (std::size_t l = net.depth(); l >= 1; --l) {
    Matrix& g = ws.grad_layers[l - 1];
    const std::vector<double>& below = ws.activations[l - 1];
    for (std::size_t r = 0; r < d; ++r)
      kernels::axpy(ws.delta[r], below.data(), &g.a[r * d], d);
    if (l > 1) ws.delta = net.layers[l - 1].matvec_transposed(ws.delta);
  }
}

double evaluate(const LinearNet& net, const std::vector<LabeledPair>& eval_set, Workspace& ws) {
  double total = 0.0;
  for (const auto& s : eval_set) total += cross_entropy(s.y, forward(net, s.x, ws));
  return total / static_cast<double>(eval_set.size());
}

}  // namespace

SiftResult sift_train(const DataSource& data, LinearNet net, const SiftConfig& cfg,
                      RngStream rng) {
  if (cfg.batch_size < 1) throw std::invalid_argument("sift_train: batch_size must be >= 1");
  if (!(cfg.keep_fraction > 0.0) || cfg.keep_fraction > 1.0)
    throw std::invalid_argument("sift_train: keep_fraction must be in (0, 1]");
  if (static_cast<std::size_t>(std::ceil(cfg.keep_fraction *
                                         static_cast<double>(cfg.batch_size))) < 1)
    throw std::invalid_argument("sift_train: keep_fraction * batch_size rounds to zero");
  if (cfg.exit_layer < 1 || cfg.exit_layer > net.depth())
    throw std::invalid_argument("sift_train: exit_layer out of range");
  if (!(cfg.step_size > 0.0)) throw std::invalid_argument("sift_train: step_size must be > 0");
  if (cfg.total_steps < 1) throw std::invalid_argument("sift_train: total_steps must be >= 1");
  if (cfg.eval_set_size < 1) throw std::invalid_argument("sift_train: eval set must be nonempty");

  const std::size_t d = net.dim();
  Workspace ws(net);

  std::vector<LabeledPair> eval_set(cfg.eval_set_size);
  for (auto& s : eval_set) s = data(rng);

  TrainLog log;
  log.eval_loss.reserve(cfg.total_steps);
  log.backprop_samples.reserve(cfg.total_steps);
  log.scored_samples.reserve(cfg.total_steps);

  std::vector<LabeledPair> batch(cfg.batch_size);
  std::vector<double> scores(cfg.batch_size);
  std::vector<std::size_t> selected;
  std::uint64_t backprop_total = 0;
  std::uint64_t scored_total = 0;
  const double param_guard = 1e8;

  for (std::uint64_t step = 0; step < cfg.total_steps; ++step) {
    for (auto& s : batch) s = data(rng);

    if (step < cfg.warmup_steps) {
      selected.resize(cfg.batch_size);
      for (std::size_t i = 0; i < cfg.batch_size; ++i) selected[i] = i;
    } else {
      for (std::size_t i = 0; i < cfg.batch_size; ++i) {
        const double p = early_prediction(net, cfg.exit_layer, batch[i].x);
        scores[i] = cfg.criterion == SiftCriterion::EarlyLoss ? cross_entropy(batch[i].y, p)
                                                              : binary_entropy(p);
      }
      selected = oracle::top_fraction_indices(scores, cfg.keep_fraction);
      std::sort(selected.begin(), selected.end());  // update in batch order
    }

    ws.zero_grads();
    for (std::size_t idx : selected) accumulate_gradient(net, batch[idx], ws);
    const double scale = -cfg.step_size / static_cast<double>(selected.size());
    for (std::size_t l = 0; l < net.depth(); ++l)
      kernels::axpy(scale, ws.grad_layers[l].a.data(), net.layers[l].a.data(), d * d);
    kernels::axpy(scale, ws.grad_head.data(), net.head.data(), d);

    scored_total += cfg.batch_size;
    backprop_total += selected.size();

    const double eval = evaluate(net, eval_set, ws);
    if (!std::isfinite(eval) || kernels::sum_sq(net.head.data(), d) > param_guard)
      throw DivergenceError("sift_train: model diverged", static_cast<std::size_t>(step));
    log.eval_loss.push_back(eval);
    log.backprop_samples.push_back(backprop_total);
    log.scored_samples.push_back(scored_total);
  }

  return SiftResult{std::move(log), std::move(net)};
}

}  // namespace gsgd::earlyexit
