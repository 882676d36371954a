#include "cdiff/error.hpp"
#include "cdiff/kernels.hpp"

namespace cdiff::kernels::serial {

double gram_sum(const PackedStates& a, const PackedStates& b, std::span<const double> table, bool skip_diagonal) {
  double total = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j) {
      if (skip_diagonal && i == j) continue;
      total += table[static_cast<std::size_t>(packed_hamming(a, i, b, j))];
    }
  return total;
}

std::vector<double> propagate(const StateSpace& space, std::span<const double> p, const Eigen::MatrixXd& kernel) {
  space.require_enumerable();
  if (p.size() != space.state_count()) throw DomainError("table size does not match the state space");
  std::vector<double> out(p.size(), 0.0);
  for (std::uint64_t xi = 0; xi < p.size(); ++xi) {
    if (p[xi] == 0.0) continue;
    const State x = space.state_at(xi);
    for (std::uint64_t yi = 0; yi < p.size(); ++yi) {
      const State y = space.state_at(yi);
      double k = p[xi];
      for (int d = 0; d < space.dims() && k != 0.0; ++d) k *= kernel(x[d], y[d]);
      out[yi] += k;
    }
  }
  return out;
}

}  // namespace cdiff::kernels::serial
