#include "doctest.h"

#include "cdiff/error.hpp"
#include "cdiff/verify.hpp"

using namespace cdiff;

TEST_CASE("flipped reverse rates are detected") {
  VerifyOptions opt;
  auto r = check_reverse_negative_control(opt);
  CHECK(r.passed);
  CHECK(r.value > r.threshold);
}

TEST_CASE("loss equivalence at the fast level") {
  auto r = check_loss_equivalence(VerifyOptions{});
  CHECK(r.passed);
  CHECK(r.value < 1e-10);
}

TEST_CASE("verdict json") {
  CheckResult r;
  r.id = "x";
  r.name = "example";
  r.passed = true;
  auto j = verdict_json({r}, VerifyOptions{});
  CHECK(j.dump().find("example") != std::string::npos);
  CHECK(parse_verify_level("full") == VerifyLevel::full);
  CHECK_THROWS_AS(parse_verify_level("slow"), ConfigError);
}
