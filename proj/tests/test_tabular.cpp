#include "doctest.h"

#include <filesystem>
#include <fstream>

#include "cdiff/error.hpp"
#include "cdiff/random.hpp"
#include "cdiff/tabular.hpp"

using namespace cdiff;

TEST_CASE("construction validates") {
  StateSpace space(1, 3);
  CHECK_THROWS(TabularDistribution(space, {0.5, 0.5}));
  CHECK_THROWS(TabularDistribution(space, {0.5, 0.6, -0.1}));
  CHECK_THROWS(TabularDistribution(space, {0.5, 0.2, 0.2}));
  auto w = TabularDistribution::from_weights(space, {1, 2, 1});
  CHECK(w[1] == doctest::Approx(0.5));
}

TEST_CASE("tv distance") {
  StateSpace space(1, 2);
  TabularDistribution p(space, {1.0, 0.0});
  TabularDistribution q(space, {0.0, 1.0});
  CHECK(tv_distance(p, q) == doctest::Approx(1.0));
  CHECK(tv_distance(p, p) == 0.0);
  CHECK(tv_distance(TabularDistribution::uniform(space), p) == doctest::Approx(0.5));
}

TEST_CASE("product and point mass") {
  StateSpace space(2, 2);
  auto prod = TabularDistribution::product(space, {{0.3, 0.7}, {0.9, 0.1}});
  CHECK(prod.prob(State{1, 0}) == doctest::Approx(0.63));
  auto pm = TabularDistribution::point_mass(space, State{1, 1});
  CHECK(pm.prob(State{1, 1}) == 1.0);
  Rng rng(1);
  for (int i = 0; i < 10; ++i) CHECK(pm.sample(rng) == State{1, 1});
}

TEST_CASE("sampling frequencies") {
  Rng rng(3);
  StateSpace space(2, 3);
  auto p = TabularDistribution::random(space, rng);
  std::vector<double> counts(space.state_count(), 0.0);
  const int n = 200000;
  for (int i = 0; i < n; ++i) counts[space.index(p.sample(rng))] += 1.0 / n;
  CHECK(tv_distance(p, TabularDistribution(space, counts)) < 0.01);
}

TEST_CASE("binary and json round trips") {
  Rng rng(5);
  auto p = TabularDistribution::random(StateSpace(3, 4, true), rng, 0.5);
  auto path = std::filesystem::temp_directory_path() / "cdiff_test_table.bin";
  save_tabular(p, path);
  auto back = load_tabular(path);
  CHECK(back.space() == p.space());
  CHECK(tv_distance(back, p) == 0.0);

  auto j = tabular_from_json(tabular_to_json(p));
  CHECK(tv_distance(j, p) < 1e-15);

  {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << "CDIFFTAB";
  }
  CHECK_THROWS_AS(load_tabular(path), IoError);
  std::filesystem::remove(path);
}
