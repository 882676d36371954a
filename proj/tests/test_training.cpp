#include "doctest.h"

#include "cdiff/ctmc.hpp"
#include "cdiff/error.hpp"
#include "cdiff/losses.hpp"
#include "cdiff/random.hpp"
#include "cdiff/tabular_models.hpp"
#include "cdiff/training.hpp"

using namespace cdiff;

namespace {

struct Fixture {
  ForwardProcess process{StateSpace(3, 2), NoiseSchedule::constant(1.0), RateSpec::uniform(2)};
  std::unique_ptr<TabularDataSource> data;
  Fixture() {
    Rng rng(11);
    data = std::make_unique<TabularDataSource>(TabularDistribution::random(process.space, rng, 0.5));
  }
};

TrainConfig small_config(LossKind loss, long steps) {
  TrainConfig cfg;
  cfg.loss = loss;
  cfg.steps = steps;
  cfg.batch_size = 64;
  cfg.learning_rate = 0.05;
  cfg.eval_every = 50;
  cfg.seed = 3;
  return cfg;
}

}  // namespace

TEST_CASE("training tuples respect the time range") {
  Fixture f;
  Rng rng(1);
  for (int i = 0; i < 200; ++i) {
    auto tt = sample_training_tuple(State{0, 1, 1}, f.process, 0.2, 0.5, 2.0, rng);
    CHECK(tt.t >= 0.2);
    CHECK(tt.t <= 0.5);
    CHECK(tt.weight == 2.0);
    CHECK(f.process.space.contains(tt.xt));
  }
}

TEST_CASE("batches are reproducible per step") {
  Fixture f;
  auto cfg = small_config(LossKind::ce_simplified, 1);
  auto a = sample_training_batch(*f.data, f.process, cfg, 5);
  auto b = sample_training_batch(*f.data, f.process, cfg, 5);
  auto c = sample_training_batch(*f.data, f.process, cfg, 6);
  CHECK(a.size() == 64);
  bool same = true, differ = false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    same = same && a[i].xt == b[i].xt && a[i].t == b[i].t;
    differ = differ || a[i].t != c[i].t;
  }
  CHECK(same);
  CHECK(differ);
}

TEST_CASE("training is deterministic") {
  Fixture f;
  auto cfg = small_config(LossKind::ce_simplified, 100);
  auto m1 = make_tabular_logit_model(f.process.space, ModelMode::noisy_marginal, 1.0, 2);
  auto m2 = make_tabular_logit_model(f.process.space, ModelMode::noisy_marginal, 1.0, 2);
  auto r1 = train(*m1, *f.data, f.process, cfg);
  auto r2 = train(*m2, *f.data, f.process, cfg);
  CHECK(r1.metrics.size() == 2);
  CHECK(r1.metrics[1].step == 100);
  CHECK(r1.metrics[1].loss == r2.metrics[1].loss);
  CHECK(r1.metrics[1].wall_ms == 0.0);
  CHECK(std::equal(m1->params().values().begin(), m1->params().values().end(), m2->params().values().begin()));
  CHECK(r1.optimizer.step == 100);
}

TEST_CASE("zero steps leave the parameters unchanged") {
  Fixture f;
  auto m = make_tabular_logit_model(f.process.space, ModelMode::noisy_marginal, 1.0, 2);
  std::vector<double> before(m->params().values().begin(), m->params().values().end());
  auto r = train(*m, *f.data, f.process, small_config(LossKind::ce_simplified, 0));
  CHECK(r.metrics.empty());
  CHECK(std::equal(before.begin(), before.end(), m->params().values().begin()));
}

TEST_CASE("tabular model converges to the exact conditionals") {
  Fixture f;
  auto cfg = small_config(LossKind::ce_original_tabular, 1500);
  cfg.t_min = 0.3;
  cfg.t_max = 0.3;
  auto m = make_tabular_logit_model(f.process.space, ModelMode::noisy_marginal, 1.0, 1);
  train(*m, *f.data, f.process, cfg);
  auto qt = exact_marginal(*f.data->table(), 0.3, f.process);
  CHECK(conditional_kl(*m, qt, 0.3) < 1e-3);
}

TEST_CASE("config validation") {
  auto cfg = small_config(LossKind::ce_simplified, 10);
  cfg.batch_size = 0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = small_config(LossKind::ce_simplified, 10);
  cfg.learning_rate = -1;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = small_config(LossKind::ordinal_score, 10);
  cfg.ordinal_corrupt_rate = 0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
}

TEST_CASE("tabular losses need a table") {
  ToyDatasetSpec spec;
  spec.bits_per_axis = 2;
  ToyDataSource toy(spec);
  ForwardProcess p{toy.space(), NoiseSchedule::constant(1.0), RateSpec::uniform(2)};
  auto m = make_tabular_logit_model(toy.space(), ModelMode::noisy_marginal, 1.0, 1);
  CHECK_THROWS_AS(train(*m, toy, p, small_config(LossKind::ce_original_tabular, 1)), ConfigError);
}
