#include "doctest.h"

#include <cmath>

#include "cdiff/error.hpp"
#include "cdiff/eval.hpp"
#include "cdiff/random.hpp"
#include "cdiff/training.hpp"

using namespace cdiff;

TEST_CASE("identical sets have zero biased mmd") {
  StateSpace space(8, 2);
  Rng rng(1);
  std::vector<State> xs;
  for (int i = 0; i < 50; ++i) {
    State x(8);
    for (auto& v : x) v = rng.uniform_int(0, 1);
    xs.push_back(x);
  }
  MmdConfig cfg;
  CHECK(std::abs(mmd_exp_hamming(xs, xs, space, cfg)) < 1e-14);
}

TEST_CASE("two point sets") {
  StateSpace space(1, 2);
  std::vector<State> x{State{0}}, y{State{1}};
  MmdConfig cfg;
  cfg.bandwidth = 0.5;
  CHECK(mmd_exp_hamming(x, y, space, cfg) == doctest::Approx(2.0 * (1.0 - std::exp(-2.0))));

  StateSpace four(4, 2);
  std::vector<State> a{State{0, 0, 0, 0}}, b{State{1, 1, 0, 0}};
  cfg.bandwidth = 0.1;
  CHECK(mmd_exp_hamming(a, b, four, cfg) == doctest::Approx(2.0 * (1.0 - std::exp(-5.0))));
  cfg.normalize_hamming = false;
  CHECK(mmd_exp_hamming(a, b, four, cfg) == doctest::Approx(2.0 * (1.0 - std::exp(-20.0))));
}

TEST_CASE("kernel table") {
  MmdConfig cfg;
  auto t = exp_hamming_table(10, cfg);
  CHECK(t.size() == 11);
  CHECK(t[0] == 1.0);
  CHECK(t[10] == doctest::Approx(std::exp(-10.0)));
}

TEST_CASE("unbiased estimator is centred for equal laws") {
  StateSpace space(6, 2);
  Rng rng(2);
  MmdConfig cfg;
  cfg.estimator = MmdEstimator::unbiased;
  double sum = 0;
  const int reps = 200;
  for (int r = 0; r < reps; ++r) {
    std::vector<State> x, y;
    for (int i = 0; i < 40; ++i) {
      State a(6), b(6);
      for (int d = 0; d < 6; ++d) {
        a[d] = rng.uniform() < 0.3;
        b[d] = rng.uniform() < 0.3;
      }
      x.push_back(a);
      y.push_back(b);
    }
    sum += mmd_exp_hamming(x, y, space, cfg);
  }
  CHECK(std::abs(sum / reps) < 5e-3);
}

TEST_CASE("mmd separates different laws") {
  StateSpace space(6, 2);
  std::vector<State> zeros(200, State(6, 0)), ones(200, State(6, 1));
  MmdConfig cfg;
  CHECK(mmd_exp_hamming(zeros, ones, space, cfg) > 1.9);
}

TEST_CASE("config validation") {
  MmdConfig cfg;
  cfg.bandwidth = 0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = MmdConfig{};
  cfg.repeats = 0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  CHECK(parse_mmd_estimator("unbiased") == MmdEstimator::unbiased);
}

TEST_CASE("empirical distribution") {
  StateSpace space(1, 3);
  std::vector<State> xs{State{0}, State{2}, State{2}, State{2}};
  auto e = empirical_distribution(xs, space);
  CHECK(e[0] == 0.25);
  CHECK(e[1] == 0.0);
  CHECK(e[2] == 0.75);
}

TEST_CASE("evaluate_run reports mean, error and tv") {
  Rng rng(3);
  TabularDataSource data(TabularDistribution::random(StateSpace(3, 2), rng));
  MmdConfig cfg;
  cfg.repeats = 4;
  cfg.samples = 500;
  auto same = evaluate_run([&](std::size_t n, std::uint64_t seed) { return data.sample(n, seed); }, data, cfg, 1);
  CHECK(same.per_repeat.size() == 4);
  CHECK(same.metrics.at("mmd_mean") < 5e-3);
  CHECK(same.metrics.count("mmd_stderr") == 1);
  CHECK(same.metrics.at("mmd_mean_x1e4") == doctest::Approx(same.metrics.at("mmd_mean") * 1e4));
  CHECK(same.metrics.at("tv") < 0.05);

  auto off = evaluate_run([](std::size_t n, std::uint64_t) { return std::vector<State>(n, State{1, 1, 1}); }, data,
                          cfg, 1);
  CHECK(off.metrics.at("mmd_mean") > 10 * same.metrics.at("mmd_mean"));

  auto again = evaluate_run([&](std::size_t n, std::uint64_t seed) { return data.sample(n, seed); }, data, cfg, 1);
  CHECK(again.per_repeat == same.per_repeat);
  auto j = same.to_json();
  CHECK(j.contains("metrics"));
  CHECK(same.to_csv().find("mmd_mean") != std::string::npos);
}
