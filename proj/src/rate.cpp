#include "cdiff/rate.hpp"

#include <cmath>
#include <string>

#include "cdiff/error.hpp"

namespace cdiff {

RateSpec RateSpec::uniform(int vocab) {
  if (vocab < 2) throw DomainError("rate matrix needs vocab >= 2");
  Eigen::MatrixXd q = Eigen::MatrixXd::Ones(vocab, vocab);
  q.diagonal().array() -= vocab;
  return RateSpec(std::move(q), true);
}

RateSpec RateSpec::from_matrix(const Eigen::MatrixXd& q) {
  if (q.rows() != q.cols() || q.rows() < 2) throw DomainError("rate matrix must be square with size >= 2");
  for (Eigen::Index i = 0; i < q.rows(); ++i) {
    if (std::abs(q.row(i).sum()) > 1e-12)
      throw DomainError("rate matrix row " + std::to_string(i) + " does not sum to zero");
    for (Eigen::Index j = 0; j < q.cols(); ++j)
      if (i != j && q(i, j) < 0.0) throw DomainError("rate matrix has a negative off-diagonal entry");
  }
  return RateSpec(q, false);
}

double RateSpec::max_exit_rate() const { return (-q_.diagonal()).maxCoeff(); }

Eigen::MatrixXd RateSpec::transition(double tau) const {
  if (tau < 0.0) throw DomainError("transition needs tau >= 0");
  if (!uniform_) return expm_taylor(q_ * tau);
  const UniformRow row = uniform_transition_row(vocab(), tau);
  Eigen::MatrixXd p = Eigen::MatrixXd::Constant(vocab(), vocab(), row.move);
  p.diagonal().setConstant(row.stay);
  return p;
}

UniformRow uniform_transition_row(int vocab, double tau) {
  if (vocab < 2) throw DomainError("uniform_transition_row needs vocab >= 2");
  if (tau < 0.0) throw DomainError("uniform_transition_row needs tau >= 0");
  const double c = vocab;
  const double decay = std::exp(-c * tau);
  // -expm1 keeps the small-tau move probability accurate.
  return {1.0 / c + (1.0 - 1.0 / c) * decay, -std::expm1(-c * tau) / c};
}

Eigen::MatrixXd expm_taylor(const Eigen::MatrixXd& a) {
  constexpr int kOrder = 12;
  if (!a.allFinite()) throw NumericError("matrix exponential of a non-finite matrix");
  const double norm = a.cwiseAbs().colwise().sum().maxCoeff();
  int squarings = 0;
  if (norm > 0.5) squarings = static_cast<int>(std::ceil(std::log2(norm / 0.5)));
  if (squarings > 1000) throw NumericError("matrix exponential: norm too large for scaling and squaring");
  const Eigen::MatrixXd scaled = a / std::ldexp(1.0, squarings);

  const auto n = a.rows();
  Eigen::MatrixXd result = Eigen::MatrixXd::Identity(n, n);
  Eigen::MatrixXd term = Eigen::MatrixXd::Identity(n, n);
  for (int k = 1; k <= kOrder; ++k) {
    term = (term * scaled) / static_cast<double>(k);
    result += term;
  }
  for (int i = 0; i < squarings; ++i) result = (result * result).eval();
  return result;
}

Eigen::MatrixXd transition_matrix_general(const RateSpec& rate, double tau) {
  if (tau < 0.0) throw DomainError("transition needs tau >= 0");
  return expm_taylor(rate.matrix() * tau);
}

}  // namespace cdiff
