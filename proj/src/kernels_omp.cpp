#include <bit>

#include "cdiff/error.hpp"
#include "cdiff/kernels.hpp"

namespace cdiff::kernels {

PackedStates::PackedStates(const StateSpace& space, std::span<const State> states)
    : count_(states.size()), dims_(space.dims()), binary_(space.vocab() == 2) {
  if (space.vocab() > 256) throw DomainError("PackedStates supports vocab <= 256");
  const int per_word = binary_ ? 64 : 8;
  words_ = (dims_ + per_word - 1) / per_word;
  data_.assign(count_ * static_cast<std::size_t>(words_), 0);
  for (std::size_t i = 0; i < count_; ++i) {
    const State& x = states[i];
    space.validate(x);
    std::uint64_t* r = data_.data() + i * static_cast<std::size_t>(words_);
    for (int d = 0; d < dims_; ++d) {
      const int w = d / per_word;
      const int slot = d % per_word;
      if (binary_)
        r[w] |= static_cast<std::uint64_t>(x[d]) << slot;
      else
        r[w] |= static_cast<std::uint64_t>(x[d]) << (8 * slot);
    }
  }
}

namespace {

inline int word_distance(std::uint64_t x, std::uint64_t y, bool binary) {
  std::uint64_t t = x ^ y;
  if (!binary) {
    // Collapse each byte to its lowest bit: non-zero byte -> 1.
    t |= t >> 4;
    t |= t >> 2;
    t |= t >> 1;
    t &= 0x0101010101010101ULL;
  }
  return std::popcount(t);
}

inline int row_distance(const std::uint64_t* a, const std::uint64_t* b, int words, bool binary) {
  int h = 0;
  for (int w = 0; w < words; ++w) h += word_distance(a[w], b[w], binary);
  return h;
}

void check_compatible(const PackedStates& a, const PackedStates& b) {
  if (a.dims() != b.dims() || a.binary() != b.binary()) throw DomainError("packed state sets have different layouts");
}

}  // namespace

int packed_hamming(const PackedStates& a, std::size_t i, const PackedStates& b, std::size_t j) {
  check_compatible(a, b);
  return row_distance(a.row(i), b.row(j), a.words_per_state(), a.binary());
}

double gram_sum(const PackedStates& a, const PackedStates& b, std::span<const double> table, bool skip_diagonal) {
  check_compatible(a, b);
  if (static_cast<int>(table.size()) <= a.dims()) throw DomainError("kernel table must cover distances 0..D");
  const auto n = static_cast<std::int64_t>(a.size());
  const std::size_t m = b.size();
  const int words = a.words_per_state();
  const bool binary = a.binary();
  std::vector<double> row_sums(a.size(), 0.0);
#pragma omp parallel for schedule(dynamic, 16)
  for (std::int64_t i = 0; i < n; ++i) {
    const std::uint64_t* ri = a.row(static_cast<std::size_t>(i));
    double s = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      if (skip_diagonal && static_cast<std::size_t>(i) == j) continue;
      s += table[static_cast<std::size_t>(row_distance(ri, b.row(j), words, binary))];
    }
    row_sums[static_cast<std::size_t>(i)] = s;
  }
  double total = 0.0;
  for (double s : row_sums) total += s;
  return total;
}

std::vector<double> apply_dim_kernel(const StateSpace& space, std::span<const double> p, int dim,
                                     const Eigen::MatrixXd& kernel) {
  const int c = space.vocab();
  if (kernel.rows() != c || kernel.cols() != c) throw DomainError("dimension kernel must be vocab x vocab");
  if (p.size() != space.state_count()) throw DomainError("table size does not match the state space");
  const std::uint64_t stride = space.stride(dim);
  const std::uint64_t block = stride * static_cast<std::uint64_t>(c);
  const auto outer = static_cast<std::int64_t>(p.size() / block);
  std::vector<double> out(p.size(), 0.0);
#pragma omp parallel for schedule(static)
  for (std::int64_t o = 0; o < outer; ++o) {
    const std::uint64_t base = static_cast<std::uint64_t>(o) * block;
    for (std::uint64_t inner = 0; inner < stride; ++inner) {
      for (int to = 0; to < c; ++to) {
        double s = 0.0;
        for (int from = 0; from < c; ++from) s += p[base + static_cast<std::uint64_t>(from) * stride + inner] * kernel(from, to);
        out[base + static_cast<std::uint64_t>(to) * stride + inner] = s;
      }
    }
  }
  return out;
}

std::vector<double> propagate(const StateSpace& space, std::span<const double> p, const Eigen::MatrixXd& kernel) {
  std::vector<double> cur(p.begin(), p.end());
  for (int d = 0; d < space.dims(); ++d) cur = apply_dim_kernel(space, cur, d, kernel);
  return cur;
}

}  // namespace cdiff::kernels
