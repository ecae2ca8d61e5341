// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "gsgd/montecarlo.hpp"
#include "gsgd/rng.hpp"

namespace gsgd::earlyexit {

using numerics::McEstimate;
using numerics::RngStream;

struct Matrix {
  std::size_t rows = 0, cols = 0;
  std::vector<double> a;  // row-major

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), a(r * c, 0.0) {}
  static Matrix identity(std::size_t n);

  double& at(std::size_t i, std::size_t j) { return a[i * cols + j]; }
  double at(std::size_t i, std::size_t j) const { return a[i * cols + j]; }

  std::vector<double> matvec(const std::vector<double>& x) const;        // M x
  std::vector<double> matvec_transposed(const std::vector<double>& x) const;  // M^T x
};

// k-layer linear feedforward binary classifier: d x d layer matrices
// W_1..W_k applied in order, then a linear head theta and a logistic output.
struct LinearNet {
  std::vector<Matrix> layers;
  std::vector<double> head;

  std::size_t dim() const { return head.size(); }
  std::size_t depth() const { return layers.size(); }
};

struct LabeledPair {
  std::vector<double> x;
  int y = 0;      // {0, 1}
  int y_bar = -1;  // 2y - 1
};

// Logit of the prediction obtained by applying the head to the layer-j
// representation: theta^T (W_j ... W_1) x. j = depth is the full forward pass.
double prefix_logit(const LinearNet& net, std::size_t j, const std::vector<double>& x);
double early_prediction(const LinearNet& net, std::size_t j, const std::vector<double>& x);

// Binary cross-entropy with probabilities clamped to [1e-12, 1 - 1e-12];
// natural logs throughout.
double cross_entropy(int y, double p);
double binary_entropy(double p);  // in [0, ln 2]

// Cosine similarity between A_j^T theta and A_j^T B_j^T theta, where A_j is
// the layer-prefix product W_j...W_1 and B_j the suffix W_k...W_{j+1}. This
// is the statistic that governs whether exiting at layer j preserves the
// two-sample argmax.
double beta_j(const LinearNet& net, std::size_t j);

// Draw of z ~ N(0, 2 I_d), the distribution of the centered-label sample
// difference that the argmax events reduce to.
std::vector<double> sample_assumption61_z(RngStream& rng, std::size_t d);

// Monte-Carlo estimate of the argmax-preservation probability at layer j:
// twice the empirical frequency of {theta^T A_j z >= 0, theta^T B_j A_j z >= 0}
// over n draws of z ~ N(0, 2 I_d). n >= 1e4.
McEstimate pj_monte_carlo(const LinearNet& net, std::size_t j, std::int64_t n,
                          const RngStream& rng);

// Random two-layer net whose exit-layer-1 similarity beta_1 equals `beta`
// exactly (random orthogonal first layer, rotation-by-arccos(beta) second).
LinearNet make_net_with_beta(std::size_t dim, double beta, RngStream& rng);

// Net with independent N(0, 1/dim) layer entries and N(0, 1) head entries.
LinearNet random_net(std::size_t dim, std::size_t depth, RngStream& rng);

// ---------------------------------------------------------------------------
// SIFT: top-fraction batch filtering by early-exit score
// ---------------------------------------------------------------------------

enum class SiftCriterion { EarlyLoss, EarlyEntropy };

struct SiftConfig {
  std::size_t batch_size = 64;
  double keep_fraction = 0.5;
  SiftCriterion criterion = SiftCriterion::EarlyLoss;
  std::size_t exit_layer = 1;
  std::uint64_t warmup_steps = 0;
  double step_size = 0.1;
  std::uint64_t total_steps = 100;
  std::size_t eval_set_size = 500;
};

struct TrainLog {
  std::vector<double> eval_loss;                 // after each step's update
  std::vector<std::uint64_t> backprop_samples;   // cumulative
  std::vector<std::uint64_t> scored_samples;     // cumulative
};

struct SiftResult {
  TrainLog log;
  LinearNet model;
};

using DataSource = std::function<LabeledPair(RngStream&)>;

// Synthetic binary task: x ~ N(0, I_d), label = 1{<v, x> >= 0} for the
// planted unit direction v (a deterministic function of x).
DataSource make_planted_direction_task(std::vector<double> direction);
std::vector<double> random_unit_direction(std::size_t d, RngStream& rng);

// Train `net` with plain averaged-gradient steps on the full-model
// cross-entropy. During warm-up every batch sample is used; afterwards each
// batch is scored at exit_layer by the criterion and only the top
// keep_fraction (ties to the lower index) enter the update, in batch order.
SiftResult sift_train(const DataSource& data, LinearNet net, const SiftConfig& cfg,
                      RngStream rng);

}  // namespace gsgd::earlyexit
