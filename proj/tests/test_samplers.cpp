#include "doctest.h"

#include "cdiff/ctmc.hpp"
#include "cdiff/error.hpp"
#include "cdiff/eval.hpp"
#include "cdiff/models.hpp"
#include "cdiff/random.hpp"
#include "cdiff/samplers.hpp"
#include "cdiff/tabular_models.hpp"

using namespace cdiff;

namespace {

ForwardProcess small_process() {
  return ForwardProcess{StateSpace(3, 3), NoiseSchedule::constant(1.0, 2.0), RateSpec::uniform(3)};
}

}  // namespace

TEST_CASE("time grids") {
  SamplerConfig cfg;
  cfg.steps = 10;
  cfg.t_min = 0.01;
  for (auto g : {StepGrid::uniform, StepGrid::geometric}) {
    cfg.grid = g;
    auto ts = time_grid(cfg, 2.0);
    CHECK(ts.size() == 11);
    CHECK(ts.front() == doctest::Approx(2.0));
    CHECK(ts.back() == doctest::Approx(0.01));
    for (std::size_t i = 1; i < ts.size(); ++i) CHECK(ts[i] < ts[i - 1]);
  }
  cfg.grid = StepGrid::uniform;
  auto ts = time_grid(cfg, 2.0);
  CHECK(ts[0] - ts[1] == doctest::Approx(ts[9] - ts[10]));
}

TEST_CASE("balance functions") {
  CHECK(balance(BalanceFn::sqrt, 4.0) == doctest::Approx(2.0));
  CHECK(balance(BalanceFn::t_over_1pt, 3.0) == doctest::Approx(0.75));
  for (double u : {0.3, 2.0}) CHECK(u * balance(BalanceFn::sqrt, 1.0 / u) == doctest::Approx(balance(BalanceFn::sqrt, u)));
  CHECK(parse_balance_fn(balance_fn_name(BalanceFn::t_over_1pt)) == BalanceFn::t_over_1pt);
}

TEST_CASE("step probabilities are distributions") {
  auto p = small_process();
  Rng rng(1);
  auto pi0 = TabularDistribution::random(p.space, rng);
  auto noisy = make_oracle_model(pi0, p, ModelMode::noisy_marginal);
  auto x0 = make_oracle_model(pi0, p, ModelMode::x0_denoising);
  std::vector<State> xs{State{0, 1, 2}, State{2, 2, 0}};
  for (const auto& probs : {euler_step_probs(*noisy, xs, 0.8, 0.05, p), analytical_step_probs(*x0, xs, 0.8, 0.05, p),
                            lb_corrector_probs(*noisy, xs, 0.8, 0.05, BalanceFn::sqrt, p)}) {
    CHECK(probs.rows() == 6);
    CHECK(probs.minCoeff() >= 0.0);
    for (Eigen::Index r = 0; r < probs.rows(); ++r) CHECK(probs.row(r).sum() == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("x0 conditionals map to the noisy conditionals") {
  auto p = small_process();
  Rng rng(2);
  auto pi0 = TabularDistribution::random(p.space, rng);
  auto noisy = make_oracle_model(pi0, p, ModelMode::noisy_marginal);
  auto x0 = make_oracle_model(pi0, p, ModelMode::x0_denoising);
  std::vector<State> xs{State{1, 0, 2}};
  auto a = model_conditionals(*noisy, xs, 0.7, p);
  auto b = model_conditionals(*x0, xs, 0.7, p);
  CHECK((a - b).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("analytical steps need an x0 model") {
  auto p = small_process();
  auto m = make_tabular_logit_model(p.space, ModelMode::noisy_marginal, 2.0, 1);
  std::vector<State> xs{State{0, 0, 0}};
  CHECK_THROWS_AS(analytical_step_probs(*m, xs, 0.5, 0.1, p), ConfigError);
}

TEST_CASE("sampling is deterministic in the seed") {
  auto p = small_process();
  Rng rng(3);
  auto pi0 = TabularDistribution::random(p.space, rng);
  auto m = make_oracle_model(pi0, p, ModelMode::noisy_marginal);
  SamplerConfig cfg;
  cfg.steps = 20;
  cfg.seed = 5;
  auto a = sample_reverse(*m, 300, cfg, p);
  auto b = sample_reverse(*m, 300, cfg, p);
  cfg.seed = 6;
  auto c = sample_reverse(*m, 300, cfg, p);
  CHECK(a == b);
  CHECK(a != c);
}

TEST_CASE("euler and analytical samplers recover the data law with an exact model") {
  auto p = small_process();
  Rng rng(4);
  auto pi0 = TabularDistribution::random(p.space, rng, 0.7);
  SamplerConfig cfg;
  cfg.steps = 200;
  cfg.seed = 9;
  auto euler = sample_reverse(*make_oracle_model(pi0, p, ModelMode::noisy_marginal), 40000, cfg, p);
  cfg.kind = SamplerKind::analytical;
  auto analytical = sample_reverse(*make_oracle_model(pi0, p, ModelMode::x0_denoising), 40000, cfg, p);
  CHECK(tv_distance(empirical_distribution(euler, p.space), pi0) < 0.04);
  CHECK(tv_distance(empirical_distribution(analytical, p.space), pi0) < 0.04);
}

TEST_CASE("corrector keeps a stationary law") {
  StateSpace space(2, 3);
  Rng rng(5);
  auto q = TabularDistribution::random(space, rng);
  auto m = make_fixed_oracle_model(q, 1.0);
  ForwardProcess p{space, NoiseSchedule::constant(1.0), RateSpec::uniform(3)};
  std::vector<State> xs;
  std::vector<Rng> rngs;
  for (int i = 0; i < 30000; ++i) {
    xs.push_back(q.sample(rng));
    rngs.emplace_back(derive_seed(1, {static_cast<std::uint64_t>(i)}));
  }
  for (int s = 0; s < 20; ++s) lb_corrector_step(*m, xs, 0.5, 0.05, BalanceFn::t_over_1pt, p, rngs);
  CHECK(tv_distance(empirical_distribution(xs, space), q) < 0.03);
}

TEST_CASE("ordinal birth/death moves stay in the support") {
  StateSpace space(2, 5, true);
  Rng rng(6);
  auto q = TabularDistribution::random(space, rng);
  std::vector<State> xs(6000, State{0, 4});
  std::vector<Rng> rngs;
  for (int i = 0; i < 6000; ++i) rngs.emplace_back(derive_seed(2, {static_cast<std::uint64_t>(i)}));
  for (int s = 0; s < 300; ++s) ordinal_birth_death_step(xs, ordinal_ratios_exact(q, xs), 0.1, BalanceFn::sqrt, 5, rngs);
  for (const auto& x : xs) CHECK(space.contains(x));
  CHECK(tv_distance(empirical_distribution(xs, space), q) < 0.08);
}

TEST_CASE("exact reverse simulation matches the data law") {
  auto p = small_process();
  Rng rng(7);
  auto pi0 = TabularDistribution::random(p.space, rng, 0.7);
  ExactReverseOptions opt;
  opt.grid = 2e-3;
  auto xs = exact_reverse_simulate(pi0, p, 30000, 3, opt);
  CHECK(tv_distance(empirical_distribution(xs, p.space), pi0) < 0.03);
}
