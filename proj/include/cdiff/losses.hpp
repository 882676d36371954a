#pragma once

#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "cdiff/ctmc.hpp"
#include "cdiff/models.hpp"
#include "cdiff/tabular.hpp"

namespace cdiff {

enum class LossKind {
  ce_simplified,
  ce_original_tabular,
  l2_ratio,
  l2_ratio_simplified,
  x0_ce,
  ordinal_score,
  path_kl_tabular,
};

LossKind parse_loss_kind(std::string_view s);
std::string_view loss_kind_name(LossKind k);
// Losses that need the data distribution as an exact table.
bool loss_needs_table(LossKind k);

struct TrainingTuple {
  State x0;
  double t = 0.0;
  State xt;
  double weight = 1.0;  // lambda(t)
};

struct LossValue {
  double value = 0.0;
  std::vector<double> grad;  // empty unless requested
  // Conditionals floored at 1e-12 (path objective only).
  long clamped = 0;
};

// ---------------------------------------------------------------------------
// Sampled losses: weighted means over a batch of (x0, t, x_t).

// sum_d -log p(x_t^d | x_t^{\d}); noisy-marginal models.
LossValue loss_ce_simplified(const Model& model, std::span<const TrainingTuple> batch, bool want_grad);
// sum_d [sum_c p_c^2 - 2 p(x_t^d | x_t^{\d})]; noisy-marginal models.
LossValue loss_l2_ratio_simplified(const Model& model, std::span<const TrainingTuple> batch, bool want_grad);
// Cross-entropy of the noisy conditional implied by an x0-denoising model.
LossValue loss_x0_ce(const Model& model, std::span<const TrainingTuple> batch, const ForwardProcess& process,
                     bool want_grad);

// ---------------------------------------------------------------------------
// Exact expectations over x ~ q_t at a fixed time (enumerable spaces).

// sum_x q(x) sum_d H(q(.|x^{\d}), p(.|x^{\d})).
LossValue loss_ce_original_tabular(const Model& model, const TabularDistribution& q_t, double t, bool want_grad);
// sum_x q(x) sum_d -log p(x^d | x^{\d}).
LossValue loss_ce_simplified_exact(const Model& model, const TabularDistribution& q_t, double t, bool want_grad);
// sum_x q(x) sum_d ||p(.|x^{\d}) - q(.|x^{\d})||^2.
LossValue loss_l2_ratio_tabular(const Model& model, const TabularDistribution& q_t, double t, bool want_grad);
// sum_x q(x) sum_d [sum_c p_c^2 - 2 p(x^d | x^{\d})].
LossValue loss_l2_ratio_simplified_exact(const Model& model, const TabularDistribution& q_t, double t, bool want_grad);
// sum_x q(x) sum_d -log q(x^d | x^{\d}): the floor of both cross-entropy losses.
double conditional_entropy(const TabularDistribution& q_t);
// sum_x q(x) sum_d KL(q(.|x^{\d}) || p(.|x^{\d})).
double conditional_kl(const Model& model, const TabularDistribution& q_t, double t);

// Per-dimension simplified l2 term for probabilities p at observed value x.
double l2_simplified_term(std::span<const double> p, int x);

// p_t(X_t^d = c) = sum_c0 softmax(logits)[c0] * K(c0, c).
Eigen::VectorXd x0_marginal_transform(const Eigen::VectorXd& x0_logits, const Eigen::MatrixXd& kernel);

// ---------------------------------------------------------------------------
// Path-space objective

struct PathKlOptions {
  int grid_points = 64;
  double t_min = 1e-3;
};

// Trapezoid integral over a uniform grid on [t_min, T] of
//   sum_x q_t(x) [ sum_{d, z != x^d} r_z Q_t(x^d, z) - sum_{d, z != x^d} Q_t(z, x^d) log(1 / r_z) ]
// with r_z = p(z | x^{\d}) / p(x^d | x^{\d}) from the model.
LossValue loss_path_kl_tabular(const Model& model, const TabularDistribution& pi_data, const ForwardProcess& process,
                               const PathKlOptions& opt, bool want_grad);
// Same functional with the exact ratios q_t(x^{d=z}) / q_t(x).
double path_kl_exact_ratios(const TabularDistribution& pi_data, const ForwardProcess& process, const PathKlOptions& opt);

// ---------------------------------------------------------------------------
// Ordinal score matching

// Discretized kernel q_{t|0}(y | x0) proportional to exp(-(y - x0)^2 / (C_r t))
// on the support {0, ..., vocab - 1}.
struct OrdinalKernelSpec {
  double corrupt_rate = 1.0;
  int vocab = 2;

  std::vector<double> row(int x0, double t) const;
  int sample(int x0, double t, Rng& rng) const;
};

// Regression target at x_t: half the log ratio of the two neighbour kernel
// values; one-sided log ratio (no half) at a support boundary.
double ordinal_score_target(const OrdinalKernelSpec& kernel, int x0, double t, int xt);

LossValue loss_ordinal_score(const Model& model, std::span<const TrainingTuple> batch, const OrdinalKernelSpec& kernel,
                             bool want_grad);

}  // namespace cdiff
