#include "doctest.h"

#include "cdiff/ctmc.hpp"
#include "cdiff/error.hpp"
#include "cdiff/random.hpp"

using namespace cdiff;

namespace {

ForwardProcess make(int dims, int vocab, NoiseSchedule schedule) {
  return ForwardProcess{StateSpace(dims, vocab), schedule, RateSpec::uniform(vocab)};
}

}  // namespace

TEST_CASE("state rate is nonzero only for single-coordinate moves") {
  auto p = make(3, 3, NoiseSchedule::constant(2.0));
  CHECK(p.state_rate(0.3, State{0, 1, 2}, State{0, 2, 2}) == doctest::Approx(2.0));
  CHECK(p.state_rate(0.3, State{0, 1, 2}, State{1, 2, 2}) == 0.0);
}

TEST_CASE("exact marginal matches dense propagation") {
  Rng rng(2);
  auto p = make(3, 3, NoiseSchedule::cosine());
  auto pi0 = TabularDistribution::random(p.space, rng);
  auto qt = exact_marginal(pi0, 0.6, p);
  Eigen::MatrixXd big = full_transition(p.space, p.kernel(0.0, 0.6));
  Eigen::VectorXd v = Eigen::Map<const Eigen::VectorXd>(pi0.probs().data(), pi0.size());
  Eigen::VectorXd w = big.transpose() * v;
  for (std::size_t i = 0; i < qt.size(); ++i) CHECK(qt[i] == doctest::Approx(w[i]).epsilon(1e-12));

  auto qs = exact_marginal(pi0, 0.2, p);
  CHECK(tv_distance(propagate_marginal(qs, 0.2, 0.6, p), qt) < 1e-13);
}

TEST_CASE("dense generator exponentiates to the dense kernel") {
  auto p = make(2, 3, NoiseSchedule::constant(1.0));
  Eigen::MatrixXd gen = full_generator(p.space, p.rate);
  Eigen::MatrixXd k = expm_taylor(gen * 0.4);
  CHECK((k - full_transition(p.space, p.kernel(0.0, 0.4))).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("gillespie paths and forward sampling agree in law") {
  auto p = make(2, 3, NoiseSchedule::cosine());
  State x0{0, 2};
  Rng rng(9);
  const int n = 60000;
  std::vector<double> a(9, 0.0), b(9, 0.0);
  for (int i = 0; i < n; ++i) {
    auto path = gillespie_forward(x0, p, 0.7, rng);
    for (std::size_t k = 1; k < path.events.size(); ++k) CHECK(path.events[k].time >= path.events[k - 1].time);
    a[p.space.index(path.state_at_end())] += 1.0 / n;
    b[p.space.index(forward_sample(x0, 0.0, 0.7, p, rng))] += 1.0 / n;
  }
  auto exact = exact_marginal(TabularDistribution::point_mass(p.space, x0), 0.7, p);
  CHECK(tv_distance(TabularDistribution(p.space, a), exact) < 0.015);
  CHECK(tv_distance(TabularDistribution(p.space, b), exact) < 0.015);
}

TEST_CASE("reverse rate and reverse kernel") {
  Rng rng(4);
  auto p = make(2, 3, NoiseSchedule::constant(1.0));
  auto pi0 = TabularDistribution::random(p.space, rng);
  auto qt = exact_marginal(pi0, 0.5, p);
  State x{0, 1}, y{2, 1};
  CHECK(reverse_rate(qt, p, 0.5, x, y) == doctest::Approx(qt.prob(y) / qt.prob(x) * p.state_rate(0.5, y, x)));
  CHECK(reverse_rate(qt, p, 0.5, x, State{2, 2}) == 0.0);

  auto rk = reverse_transition_exact(pi0, 0.2, 0.5, p);
  for (Eigen::Index r = 0; r < rk.table.rows(); ++r) {
    CHECK(rk.reachable[r]);
    CHECK(rk.table.row(r).sum() == doctest::Approx(1.0).epsilon(1e-12));
  }
  auto qs = exact_marginal(pi0, 0.2, p);
  Eigen::VectorXd qtv = Eigen::Map<const Eigen::VectorXd>(qt.probs().data(), qt.size());
  Eigen::VectorXd back = rk.table.transpose() * qtv;
  for (std::size_t i = 0; i < qs.size(); ++i) CHECK(back[i] == doctest::Approx(qs[i]).epsilon(1e-12));
}

TEST_CASE("reverse rate at an unreachable state throws") {
  auto p = make(1, 2, NoiseSchedule::constant(1.0));
  TabularDistribution q(p.space, {1.0, 0.0});
  CHECK_THROWS_AS(reverse_rate(q, p, 0.5, State{1}, State{0}), NumericError);
}
