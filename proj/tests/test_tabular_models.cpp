#include "doctest.h"

#include "cdiff/ctmc.hpp"
#include "cdiff/error.hpp"
#include "cdiff/random.hpp"
#include "cdiff/tabular_models.hpp"

using namespace cdiff;

TEST_CASE("conditionals of a table") {
  StateSpace space(2, 2);
  TabularDistribution q(space, {0.1, 0.2, 0.3, 0.4});
  auto cond = tabular_conditionals(q);
  CHECK(cond(State{0, 0}, 0, 1) == doctest::Approx(0.75));
  CHECK(cond(State{1, 1}, 1, 0) == doctest::Approx(3.0 / 7.0));
  CHECK(cond(State{1, 0}, 0, 1) == doctest::Approx(cond(State{0, 0}, 0, 1)));
}

TEST_CASE("chain ratio and reconstruction") {
  Rng rng(6);
  StateSpace space(3, 3);
  auto q = TabularDistribution::random(space, rng);
  auto cond = tabular_conditionals(q);
  State x{0, 1, 2}, y{2, 0, 1};
  CHECK(ratio_via_conditional_chain(cond, x, y) == doctest::Approx(q.prob(y) / q.prob(x)).epsilon(1e-12));
  CHECK(tv_distance(reconstruct_from_conditionals(cond), q) < 1e-12);
}

TEST_CASE("zero conditionals make the chain ratio throw") {
  StateSpace space(2, 2);
  TabularDistribution q(space, {0.5, 0.0, 0.0, 0.5});
  auto cond = tabular_conditionals(q);
  CHECK_THROWS_AS(ratio_via_conditional_chain(cond, State{0, 0}, State{1, 1}), NumericError);
}

TEST_CASE("x0 posterior marginalizes the clean context") {
  Rng rng(7);
  ForwardProcess p{StateSpace(2, 3), NoiseSchedule::constant(1.0), RateSpec::uniform(3)};
  auto pi0 = TabularDistribution::random(p.space, rng);
  auto post = x0_posterior_table(pi0, 0.4, p);
  auto k = p.kernel(0.0, 0.4);
  State x{1, 2};
  double z = 0;
  std::vector<double> w(3, 0.0);
  for (int c0 = 0; c0 < 3; ++c0) {
    for (int c1 = 0; c1 < 3; ++c1) w[c0] += pi0.prob(State{c0, c1}) * k(c1, 2);
    z += w[c0];
  }
  for (int c0 = 0; c0 < 3; ++c0) CHECK(post(x, 0, c0) == doctest::Approx(w[c0] / z).epsilon(1e-12));
}

TEST_CASE("oracle logits reproduce q_t conditionals") {
  Rng rng(8);
  ForwardProcess p{StateSpace(3, 2), NoiseSchedule::cosine(), RateSpec::uniform(2)};
  auto pi0 = TabularDistribution::random(p.space, rng);
  auto oracle = make_oracle_model(pi0, p, ModelMode::noisy_marginal);
  auto cond = tabular_conditionals(exact_marginal(pi0, 0.5, p));
  std::vector<State> xs{State{0, 1, 1}};
  auto lg = oracle->logits(xs, 0.5);
  for (int d = 0; d < 3; ++d) {
    Eigen::VectorXd pr = (lg.row(d).array() - lg.row(d).maxCoeff()).exp();
    pr /= pr.sum();
    for (int c = 0; c < 2; ++c) CHECK(pr[c] == doctest::Approx(cond(xs[0], d, c)).epsilon(1e-10));
  }
  auto lk = leak_check(*oracle, 50, rng);
  CHECK(lk.violations == 0);
}

TEST_CASE("tabular logit model is leak free and time binned") {
  StateSpace space(3, 3);
  auto m = make_tabular_logit_model(space, ModelMode::noisy_marginal, 1.0, 4);
  Rng rng(9);
  m->initialize(rng, true);
  CHECK(leak_check(*m, 200, rng).violations == 0);
  std::vector<State> xs{State{0, 1, 2}};
  CHECK((m->logits(xs, 0.05) - m->logits(xs, 0.2)).cwiseAbs().maxCoeff() == 0.0);
  CHECK((m->logits(xs, 0.05) - m->logits(xs, 0.3)).cwiseAbs().maxCoeff() > 0.0);
}
