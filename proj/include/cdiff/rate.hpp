#pragma once

#include <Eigen/Dense>

namespace cdiff {

// Base rate matrix Q of one dimension; the forward generator is beta(t) * Q.
class RateSpec {
 public:
  RateSpec() : RateSpec(uniform(2)) {}

  // Q = 11^T - C I; stationary law is uniform.
  static RateSpec uniform(int vocab);
  // General generator: rows sum to 0 (1e-12), off-diagonals >= 0.
  static RateSpec from_matrix(const Eigen::MatrixXd& q);

  int vocab() const { return static_cast<int>(q_.rows()); }
  bool is_uniform() const { return uniform_; }
  const Eigen::MatrixXd& matrix() const { return q_; }
  double operator()(int from, int to) const { return q_(from, to); }
  double exit_rate(int v) const { return -q_(v, v); }
  double max_exit_rate() const;

  // exp(Q tau): closed form for uniform Q, truncated series otherwise.
  Eigen::MatrixXd transition(double tau) const;

 private:
  RateSpec(Eigen::MatrixXd q, bool uniform) : q_(std::move(q)), uniform_(uniform) {}

  Eigen::MatrixXd q_;
  bool uniform_ = true;
};

struct UniformRow {
  double stay;
  double move;  // probability of each of the C-1 other values
};

UniformRow uniform_transition_row(int vocab, double tau);

// exp(A) by scaling and squaring with an order-12 Taylor polynomial; the
// scaling keeps ||A / 2^k||_1 <= 0.5.
Eigen::MatrixXd expm_taylor(const Eigen::MatrixXd& a);

// exp(Q tau) through the series path regardless of structure; rows sum to 1.
Eigen::MatrixXd transition_matrix_general(const RateSpec& rate, double tau);

}  // namespace cdiff
