#include "doctest.h"

#include <cmath>

#include "cdiff/error.hpp"
#include "cdiff/toy_data.hpp"

using namespace cdiff;

TEST_CASE("toy names round trip") {
  for (const auto& name : toy_density_names()) CHECK(toy_density_name(parse_toy_density(name)) == name);
  CHECK_THROWS_AS(parse_toy_density("spiral"), ConfigError);
}

TEST_CASE("toy sampling is deterministic and bounded") {
  for (const auto& name : toy_density_names()) {
    ToyDatasetSpec spec;
    spec.density = parse_toy_density(name);
    spec.bits_per_axis = 6;
    auto a = sample_toy2d(spec, 3000, 11);
    auto b = sample_toy2d(spec, 3000, 11);
    auto c = sample_toy2d(spec, 3000, 12);
    CHECK(a == b);
    CHECK(a != c);
    for (const auto& p : a) {
      CHECK(std::abs(p[0]) <= spec.lim);
      CHECK(std::abs(p[1]) <= spec.lim);
    }
  }
}

TEST_CASE("prefixes agree across counts") {
  ToyDatasetSpec spec;
  auto small = sample_toy2d(spec, 100, 3);
  auto large = sample_toy2d(spec, 2500, 3);
  for (std::size_t i = 0; i < small.size(); ++i) CHECK(small[i] == large[i]);
}

TEST_CASE("checkerboard points land on populated cells") {
  ToyDatasetSpec spec;
  spec.density = ToyDensity::checkerboard;
  for (const auto& p : sample_toy2d(spec, 2000, 5)) CHECK(checkerboard_black(p, spec.lim));
}

TEST_CASE("quantization") {
  ToyDatasetSpec spec;
  spec.bits_per_axis = 4;
  CHECK(spec.cell_width() == doctest::Approx(0.5));
  CHECK(quantize_axis(-4.0, spec) == 0);
  CHECK(quantize_axis(4.0, spec) == 15);
  CHECK(quantize_axis(0.1, spec) == 8);
  for (std::uint64_t cell = 0; cell < 16; ++cell) CHECK(quantize_axis(dequantize_axis(cell, spec), spec) == cell);

  Point2 p{1.3, -2.2};
  State s = quantize2d(p, spec);
  CHECK(s.size() == 8);
  Point2 back = dequantize2d(s, spec);
  CHECK(std::abs(back[0] - p[0]) <= 0.25 + 1e-12);
  CHECK(std::abs(back[1] - p[1]) <= 0.25 + 1e-12);
  CHECK(quantize2d(back, spec) == s);
}

TEST_CASE("dataset settings validation") {
  ToyDatasetSpec spec;
  spec.bits_per_axis = 0;
  CHECK_THROWS_AS(spec.validate(), ConfigError);
  spec.bits_per_axis = 8;
  spec.lim = -1;
  CHECK_THROWS_AS(spec.validate(), ConfigError);
}
