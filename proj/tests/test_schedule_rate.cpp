#include "doctest.h"

#include <cmath>
#include <numbers>

#include "cdiff/error.hpp"
#include "cdiff/rate.hpp"
#include "cdiff/schedule.hpp"

using namespace cdiff;

TEST_CASE("constant schedule") {
  auto s = NoiseSchedule::constant(2.0, 3.0);
  CHECK(s.beta(0.7) == doctest::Approx(2.0));
  CHECK(s.cumulative(0.5, 1.5) == doctest::Approx(2.0));
  CHECK(s.advance(0.5, 2.0) == doctest::Approx(1.5));
  CHECK(std::isinf(s.advance(2.5, 5.0)));
}

TEST_CASE("cosine schedule integral") {
  auto s = NoiseSchedule::cosine();
  for (double t : {0.1, 0.4, 0.9}) {
    CHECK(s.cumulative(0.0, t) == doctest::Approx(1.0 - std::sqrt(std::cos(std::numbers::pi * t / 2))).epsilon(1e-12));
    const int n = 20000;
    double sum = 0;
    for (int i = 0; i < n; ++i) sum += s.beta((i + 0.5) * t / n) * t / n;
    CHECK(sum == doctest::Approx(s.cumulative(0.0, t)).epsilon(1e-6));
  }
  double t = s.advance(0.2, 0.3);
  CHECK(s.cumulative(0.2, t) == doctest::Approx(0.3).epsilon(1e-9));
  CHECK_THROWS(s.cumulative(0.5, 0.4));
}

TEST_CASE("uniform rate closed form matches the series") {
  for (int c : {2, 3, 5}) {
    auto rate = RateSpec::uniform(c);
    CHECK(rate.is_uniform());
    CHECK(rate.exit_rate(0) == doctest::Approx(c - 1));
    for (double tau : {0.0, 0.05, 0.7, 3.0}) {
      auto closed = rate.transition(tau);
      auto series = transition_matrix_general(rate, tau);
      CHECK((closed - series).cwiseAbs().maxCoeff() < 1e-12);
      auto row = uniform_transition_row(c, tau);
      CHECK(closed(0, 0) == doctest::Approx(row.stay));
      CHECK(closed(0, 1) == doctest::Approx(row.move));
      CHECK(row.stay + (c - 1) * row.move == doctest::Approx(1.0));
    }
  }
}

TEST_CASE("general generator") {
  Eigen::MatrixXd q(3, 3);
  q << -1.0, 0.6, 0.4, 0.2, -0.5, 0.3, 1.0, 1.0, -2.0;
  auto rate = RateSpec::from_matrix(q);
  CHECK_FALSE(rate.is_uniform());
  CHECK(rate.max_exit_rate() == doctest::Approx(2.0));
  auto k = rate.transition(0.8);
  for (int i = 0; i < 3; ++i) CHECK(k.row(i).sum() == doctest::Approx(1.0).epsilon(1e-12));
  auto half = rate.transition(0.4);
  CHECK((half * half - k).cwiseAbs().maxCoeff() < 1e-12);

  Eigen::MatrixXd bad = q;
  bad(0, 1) = -0.1;
  CHECK_THROWS(RateSpec::from_matrix(bad));
}

TEST_CASE("expm of a diagonal matrix") {
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(2, 2);
  a(0, 0) = 1.5;
  a(1, 1) = -4.0;
  auto e = expm_taylor(a);
  CHECK(e(0, 0) == doctest::Approx(std::exp(1.5)).epsilon(1e-13));
  CHECK(e(1, 1) == doctest::Approx(std::exp(-4.0)).epsilon(1e-13));
  CHECK(e(0, 1) == 0.0);
}
