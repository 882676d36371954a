#include "doctest.h"

#include "cdiff/error.hpp"
#include "cdiff/state_space.hpp"

using namespace cdiff;

TEST_CASE("index and state_at are inverse") {
  StateSpace space(4, 3);
  CHECK(space.state_count() == 81);
  for (std::uint64_t i = 0; i < space.state_count(); ++i) CHECK(space.index(space.state_at(i)) == i);
  CHECK(space.index(State{0, 0, 0, 1}) == 1);
  CHECK(space.index(State{1, 0, 0, 0}) == 27);
  CHECK(space.stride(0) == 27);
  CHECK(space.stride(3) == 1);
}

TEST_CASE("invalid states are rejected") {
  StateSpace space(3, 2);
  CHECK_FALSE(space.contains(State{0, 2, 1}));
  CHECK_FALSE(space.contains(State{0, 1}));
  CHECK_THROWS_AS(space.validate(State{0, -1, 0}), DomainError);
  CHECK_THROWS(StateSpace(0, 2));
  CHECK_THROWS(StateSpace(2, 1));
}

TEST_CASE("state count saturates and enumeration is capped") {
  StateSpace big(64, 4);
  CHECK(big.state_count() == UINT64_MAX);
  CHECK_FALSE(big.enumerable());
  CHECK_THROWS_AS(big.require_enumerable(), CapacityError);
  CHECK(StateSpace(24, 2).enumerable());
  CHECK_FALSE(StateSpace(25, 2).enumerable());
}

TEST_CASE("hamming distance") {
  CHECK(hamming(State{0, 1, 2}, State{0, 1, 2}) == 0);
  CHECK(hamming(State{0, 1, 2}, State{1, 1, 0}) == 2);
}

TEST_CASE("gray code round trip and adjacency") {
  const int bits = 6;
  for (std::uint64_t n = 0; n < 64; ++n) {
    auto g = gray_encode(n, bits);
    CHECK(g.size() == 6);
    CHECK(gray_decode(g) == n);
    if (n > 0) {
      auto prev = gray_encode(n - 1, bits);
      CHECK(hamming(State(g.begin(), g.end()), State(prev.begin(), prev.end())) == 1);
    }
  }
  CHECK(gray_encode(2, 2) == std::vector<int>{1, 1});
}
