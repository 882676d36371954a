#include "doctest.h"

#include <cmath>

#include "cdiff/ctmc.hpp"
#include "cdiff/losses.hpp"
#include "cdiff/random.hpp"
#include "cdiff/tabular_models.hpp"
#include "cdiff/training.hpp"

using namespace cdiff;

namespace {

struct Setup {
  ForwardProcess process{StateSpace(3, 3), NoiseSchedule::constant(1.0), RateSpec::uniform(3)};
  TabularDistribution pi0;
  TabularDistribution qt;
  double t = 0.4;
  explicit Setup(std::uint64_t seed) {
    Rng rng(seed);
    pi0 = TabularDistribution::random(process.space, rng);
    qt = exact_marginal(pi0, t, process);
  }
};

}  // namespace

TEST_CASE("loss names") {
  CHECK(parse_loss_kind("ce_simplified") == LossKind::ce_simplified);
  CHECK_THROWS(parse_loss_kind("ce"));
  CHECK(parse_loss_kind(loss_kind_name(LossKind::path_kl_tabular)) == LossKind::path_kl_tabular);
  CHECK(loss_needs_table(LossKind::ce_original_tabular));
  CHECK_FALSE(loss_needs_table(LossKind::ce_simplified));
}

TEST_CASE("oracle attains the cross-entropy floor and zero l2") {
  Setup s(1);
  auto oracle = make_oracle_model(s.pi0, s.process, ModelMode::noisy_marginal);
  double h = conditional_entropy(s.qt);
  CHECK(loss_ce_original_tabular(*oracle, s.qt, s.t, false).value == doctest::Approx(h).epsilon(1e-10));
  CHECK(loss_ce_simplified_exact(*oracle, s.qt, s.t, false).value == doctest::Approx(h).epsilon(1e-10));
  CHECK(conditional_kl(*oracle, s.qt, s.t) < 1e-12);
  CHECK(loss_l2_ratio_tabular(*oracle, s.qt, s.t, false).value < 1e-20);
}

TEST_CASE("simplified losses differ from the originals by constants") {
  Setup s(2);
  auto m = make_tabular_logit_model(s.process.space, ModelMode::noisy_marginal, 1.0, 1);
  Rng rng(3);
  std::vector<double> gaps_ce, gaps_l2;
  for (int k = 0; k < 3; ++k) {
    m->initialize(rng, true);
    gaps_ce.push_back(loss_ce_original_tabular(*m, s.qt, s.t, false).value -
                      loss_ce_simplified_exact(*m, s.qt, s.t, false).value);
    gaps_l2.push_back(loss_l2_ratio_tabular(*m, s.qt, s.t, false).value -
                      loss_l2_ratio_simplified_exact(*m, s.qt, s.t, false).value);
    CHECK(loss_ce_original_tabular(*m, s.qt, s.t, false).value - conditional_entropy(s.qt) ==
          doctest::Approx(conditional_kl(*m, s.qt, s.t)).epsilon(1e-10));
  }
  CHECK(gaps_ce[0] == doctest::Approx(gaps_ce[1]).epsilon(1e-12));
  CHECK(gaps_ce[1] == doctest::Approx(gaps_ce[2]).epsilon(1e-12));
  CHECK(gaps_l2[0] == doctest::Approx(gaps_l2[1]).epsilon(1e-12));
  CHECK(gaps_l2[1] == doctest::Approx(gaps_l2[2]).epsilon(1e-12));
}

TEST_CASE("sampled ce averages to the exact expectation") {
  Setup s(4);
  auto m = make_tabular_logit_model(s.process.space, ModelMode::noisy_marginal, 1.0, 1);
  Rng rng(5);
  m->initialize(rng, true);
  std::vector<TrainingTuple> batch;
  for (std::size_t i = 0; i < s.qt.size(); ++i) {
    TrainingTuple tt;
    tt.xt = s.process.space.state_at(i);
    tt.x0 = tt.xt;
    tt.t = s.t;
    tt.weight = s.qt[i] * static_cast<double>(s.qt.size());
    batch.push_back(tt);
  }
  CHECK(loss_ce_simplified(*m, batch, false).value ==
        doctest::Approx(loss_ce_simplified_exact(*m, s.qt, s.t, false).value).epsilon(1e-10));
  CHECK(loss_l2_ratio_simplified(*m, batch, false).value ==
        doctest::Approx(loss_l2_ratio_simplified_exact(*m, s.qt, s.t, false).value).epsilon(1e-10));
}

TEST_CASE("l2 simplified term") {
  std::vector<double> p{0.2, 0.5, 0.3};
  CHECK(l2_simplified_term(p, 1) == doctest::Approx(0.04 + 0.25 + 0.09 - 1.0));
}

TEST_CASE("x0 marginal transform") {
  Eigen::VectorXd logits(2);
  logits << 0.0, std::log(3.0);
  Eigen::MatrixXd k(2, 2);
  k << 0.9, 0.1, 0.2, 0.8;
  auto p = x0_marginal_transform(logits, k);
  CHECK(p[0] == doctest::Approx(0.25 * 0.9 + 0.75 * 0.2));
  CHECK(p.sum() == doctest::Approx(1.0));
}

TEST_CASE("path objective is minimized by the exact ratios") {
  ForwardProcess p{StateSpace(2, 2), NoiseSchedule::constant(1.0), RateSpec::uniform(2)};
  Rng rng(6);
  auto pi0 = TabularDistribution::random(p.space, rng);
  PathKlOptions opt;
  opt.grid_points = 16;
  auto oracle = make_oracle_model(pi0, p, ModelMode::noisy_marginal);
  double best = path_kl_exact_ratios(pi0, p, opt);
  CHECK(loss_path_kl_tabular(*oracle, pi0, p, opt, false).value == doctest::Approx(best).epsilon(1e-9));
  auto m = make_tabular_logit_model(p.space, ModelMode::noisy_marginal, 1.0, 4);
  for (int k = 0; k < 3; ++k) {
    m->initialize(rng, true);
    CHECK(loss_path_kl_tabular(*m, pi0, p, opt, false).value > best);
  }
}

TEST_CASE("ordinal kernel and score target") {
  OrdinalKernelSpec k{0.7, 6};
  auto row = k.row(2, 0.5);
  double sum = 0;
  for (double v : row) sum += v;
  CHECK(sum == doctest::Approx(1.0));
  CHECK(row[2] > row[1]);
  CHECK(row[1] == doctest::Approx(row[3]));
  CHECK(ordinal_score_target(k, 2, 0.5, 2) == doctest::Approx(0.0).epsilon(1e-12));
  double inner = ordinal_score_target(k, 2, 0.5, 3);
  CHECK(inner == doctest::Approx(0.5 * std::log(row[4] / row[2])));
  double edge = ordinal_score_target(k, 2, 0.5, 5);
  CHECK(edge == doctest::Approx(std::log(row[5] / row[4])));
  Rng rng(1);
  for (int i = 0; i < 100; ++i) {
    int v = k.sample(2, 0.5, rng);
    CHECK(v >= 0);
    CHECK(v < 6);
  }
}
