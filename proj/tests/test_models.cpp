#include "doctest.h"

#include "cdiff/error.hpp"
#include "cdiff/models.hpp"
#include "cdiff/random.hpp"

using namespace cdiff;

namespace {

std::unique_ptr<Model> build(ModelKind kind, const StateSpace& space, Precision prec) {
  NetworkOptions opt;
  opt.hidden = 16;
  opt.layers = 2;
  opt.stream_width = 4;
  opt.precision = prec;
  switch (kind) {
    case ModelKind::ebm:
      return make_ebm_model(space, ModelMode::noisy_marginal, 1.0, opt);
    case ModelKind::masked:
      return make_masked_model(space, ModelMode::x0_denoising, 1.0, opt);
    case ModelKind::hollow:
      return make_hollow_model(space, ModelMode::noisy_marginal, 1.0, opt);
    default:
      return make_ordinal_score_model(space, 1.0, opt);
  }
}

}  // namespace

TEST_CASE("names round trip") {
  for (auto k : {ModelKind::tabular_oracle, ModelKind::tabular, ModelKind::ebm, ModelKind::masked, ModelKind::hollow,
                 ModelKind::ordinal_score})
    CHECK(parse_model_kind(model_kind_name(k)) == k);
  CHECK(parse_model_mode(model_mode_name(ModelMode::x0_denoising)) == ModelMode::x0_denoising);
  CHECK(parse_precision("float64") == Precision::float64);
  CHECK_THROWS_AS(parse_model_kind("transformer"), ConfigError);
}

TEST_CASE("output shapes and descriptors") {
  StateSpace space(5, 3);
  Rng rng(1);
  std::vector<State> xs{State{0, 1, 2, 0, 1}, State{2, 2, 2, 2, 2}};
  std::vector<double> ts{0.2, 0.9};
  for (auto kind : {ModelKind::ebm, ModelKind::masked, ModelKind::hollow}) {
    auto m = build(kind, space, Precision::float64);
    m->initialize(rng, true);
    auto lg = m->logits(xs, ts);
    CHECK(lg.rows() == 10);
    CHECK(lg.cols() == 3);
    CHECK(lg.allFinite());

    auto copy = make_model(m->descriptor());
    CHECK(copy->descriptor() == m->descriptor());
    CHECK(copy->params().size() == m->params().size());
    std::copy(m->params().values().begin(), m->params().values().end(), copy->params().values().begin());
    CHECK((copy->logits(xs, ts) - lg).cwiseAbs().maxCoeff() == 0.0);
  }
  auto score = build(ModelKind::ordinal_score, StateSpace(3, 6, true), Precision::float64);
  CHECK(score->output_width() == 1);
  CHECK(score->logits(std::vector<State>{State{0, 3, 5}}, 0.5).rows() == 3);
}

TEST_CASE("zero readout gives uniform conditionals") {
  StateSpace space(4, 3);
  auto m = build(ModelKind::hollow, space, Precision::float32);
  Rng rng(2);
  m->initialize(rng, false);
  auto lg = m->logits(std::vector<State>{State{0, 1, 2, 0}}, 0.5);
  for (Eigen::Index r = 0; r < lg.rows(); ++r) CHECK(lg.row(r).maxCoeff() - lg.row(r).minCoeff() < 1e-6);
}

TEST_CASE("float32 and float64 agree") {
  StateSpace space(4, 2);
  Rng rng(3);
  auto a = build(ModelKind::ebm, space, Precision::float32);
  auto b = build(ModelKind::ebm, space, Precision::float64);
  a->initialize(rng, true);
  std::copy(a->params().values().begin(), a->params().values().end(), b->params().values().begin());
  std::vector<State> xs{State{0, 1, 1, 0}};
  CHECK((a->logits(xs, 0.3) - b->logits(xs, 0.3)).cwiseAbs().maxCoeff() < 1e-4);
}

TEST_CASE("neural conditionals do not leak") {
  StateSpace space(6, 3);
  Rng rng(4);
  for (auto kind : {ModelKind::ebm, ModelKind::masked, ModelKind::hollow}) {
    auto m = build(kind, space, Precision::float64);
    m->initialize(rng, true);
    auto rep = leak_check(*m, 300, rng);
    CHECK(rep.trials == 300);
    CHECK(rep.violations == 0);
    CHECK(rep.max_deviation == 0.0);
  }
}

TEST_CASE("batch validation") {
  auto m = build(ModelKind::ebm, StateSpace(3, 2), Precision::float32);
  std::vector<State> bad{State{0, 2, 1}};
  CHECK_THROWS(m->logits(bad, 0.5));
  std::vector<State> ok{State{0, 1, 1}};
  std::vector<double> ts{0.1, 0.2};
  CHECK_THROWS(m->logits(ok, ts));
}
