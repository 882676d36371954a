#pragma once

// Data-parallel inner loops. Each kernel has an OpenMP implementation (the one
// the library uses) and a straightforward serial reference kept for tests and
// the benchmark. OpenMP versions reduce in a fixed order, so their results do
// not depend on the thread count.

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "cdiff/state_space.hpp"

namespace cdiff::kernels {

// States packed for fast Hamming distances: binary spaces use one bit per
// dimension, other vocabularies one byte per dimension (vocab <= 256).
class PackedStates {
 public:
  PackedStates(const StateSpace& space, std::span<const State> states);

  std::size_t size() const { return count_; }
  int dims() const { return dims_; }
  int words_per_state() const { return words_; }
  bool binary() const { return binary_; }
  const std::uint64_t* row(std::size_t i) const { return data_.data() + i * static_cast<std::size_t>(words_); }

 private:
  std::size_t count_ = 0;
  int dims_ = 0;
  int words_ = 0;
  bool binary_ = true;
  std::vector<std::uint64_t> data_;
};

int packed_hamming(const PackedStates& a, std::size_t i, const PackedStates& b, std::size_t j);

// Sum over pairs (i, j) of table[hamming(a_i, b_j)]. With skip_diagonal the
// i == j terms are left out (a and b must then be the same set).
double gram_sum(const PackedStates& a, const PackedStates& b, std::span<const double> table, bool skip_diagonal);

// out[y] = sum_x p[x] * prod_d K(x_d, y_d): the forward marginal under a
// per-dimension kernel, by one mode product per dimension.
std::vector<double> propagate(const StateSpace& space, std::span<const double> p, const Eigen::MatrixXd& kernel);
// Mode product along a single dimension.
std::vector<double> apply_dim_kernel(const StateSpace& space, std::span<const double> p, int dim,
                                     const Eigen::MatrixXd& kernel);

namespace serial {

double gram_sum(const PackedStates& a, const PackedStates& b, std::span<const double> table, bool skip_diagonal);
// Brute-force double sum over (x, y): O(|X|^2 D). Oracle for small spaces.
std::vector<double> propagate(const StateSpace& space, std::span<const double> p, const Eigen::MatrixXd& kernel);

}  // namespace serial

}  // namespace cdiff::kernels
