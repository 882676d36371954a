#include "doctest.h"

#include <omp.h>

#include "cdiff/kernels.hpp"
#include "cdiff/random.hpp"
#include "cdiff/rate.hpp"
#include "cdiff/tabular.hpp"

using namespace cdiff;

namespace {

std::vector<State> random_states(const StateSpace& space, std::size_t n, Rng& rng) {
  std::vector<State> xs(n, State(space.dims()));
  for (auto& x : xs)
    for (auto& v : x) v = rng.uniform_int(0, space.vocab() - 1);
  return xs;
}

}  // namespace

TEST_CASE("packed hamming matches the plain distance") {
  Rng rng(1);
  for (auto space : {StateSpace(70, 2), StateSpace(13, 5)}) {
    auto xs = random_states(space, 40, rng);
    kernels::PackedStates packed(space, xs);
    CHECK(packed.binary() == (space.vocab() == 2));
    for (std::size_t i = 0; i < xs.size(); ++i)
      for (std::size_t j = 0; j < xs.size(); ++j)
        CHECK(kernels::packed_hamming(packed, i, packed, j) == hamming(xs[i], xs[j]));
  }
}

TEST_CASE("gram sum: OpenMP equals serial") {
  Rng rng(2);
  StateSpace space(32, 2);
  auto a = random_states(space, 700, rng);
  auto b = random_states(space, 500, rng);
  kernels::PackedStates pa(space, a), pb(space, b);
  std::vector<double> table(33);
  for (int h = 0; h <= 32; ++h) table[h] = std::exp(-h / 3.2);
  for (int threads : {1, 2, 4}) {
    omp_set_num_threads(threads);
    CHECK(kernels::gram_sum(pa, pb, table, false) ==
          doctest::Approx(kernels::serial::gram_sum(pa, pb, table, false)).epsilon(1e-10));
    CHECK(kernels::gram_sum(pa, pa, table, true) ==
          doctest::Approx(kernels::serial::gram_sum(pa, pa, table, true)).epsilon(1e-10));
  }
  omp_set_num_threads(1);
  double first = kernels::gram_sum(pa, pb, table, false);
  omp_set_num_threads(3);
  CHECK(kernels::gram_sum(pa, pb, table, false) == first);
}

TEST_CASE("propagate: mode products equal the brute force sum") {
  Rng rng(3);
  StateSpace space(4, 3);
  auto p = TabularDistribution::random(space, rng);
  auto k = RateSpec::uniform(3).transition(0.4);
  auto fast = kernels::propagate(space, p.probs(), k);
  auto slow = kernels::serial::propagate(space, p.probs(), k);
  for (std::size_t i = 0; i < fast.size(); ++i) CHECK(fast[i] == doctest::Approx(slow[i]).epsilon(1e-13));

  auto one = kernels::apply_dim_kernel(space, p.probs(), 2, Eigen::MatrixXd::Identity(3, 3));
  for (std::size_t i = 0; i < one.size(); ++i) CHECK(one[i] == doctest::Approx(p[i]));
}
