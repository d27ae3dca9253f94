#include "pwgee/penalty.hpp"

#include <doctest.h>

#include <cmath>

using namespace pwgee;

TEST_CASE("scad and mcp rates at the documented points") {
  const PenaltySpec scad{PenaltyKind::scad, 0.5, 3.7};
  CHECK(rate(scad, 0.2) == 0.5);
  CHECK(rate(scad, 1.0) == doctest::Approx(0.5 * (1.85 - 1.0) / (2.7 * 0.5)));
  CHECK(rate(scad, 1.0) == doctest::Approx(0.31481).epsilon(1e-4));
  CHECK(rate(scad, 2.0) == 0.0);
  const PenaltySpec mcp{PenaltyKind::mcp, 0.5, 3.7, 3.0};
  CHECK(rate(mcp, 0.6) == doctest::Approx(0.3));
  CHECK(rate({PenaltyKind::lasso, 0.5}, 10.0) == 0.5);
  for (PenaltyKind k : {PenaltyKind::scad, PenaltyKind::mcp, PenaltyKind::lasso}) {
    CHECK(rate({k, 0.0}, 0.3) == 0.0);
  }
}

TEST_CASE("rate at zero plus") {
  for (PenaltyKind k : {PenaltyKind::scad, PenaltyKind::mcp, PenaltyKind::lasso}) {
    CHECK(rate_at_zero_plus({k, 0.4}) == 1.0);
    CHECK_THROWS_AS(rate_at_zero_plus({k, 0.0}), Error);
  }
}

TEST_CASE("continuity at the breakpoints") {
  const double lam = 0.7;
  const PenaltySpec scad{PenaltyKind::scad, lam, 3.7};
  const PenaltySpec mcp{PenaltyKind::mcp, lam, 3.7, 3.0};
  for (double t : {lam, 3.7 * lam}) {
    CHECK(std::abs(rate(scad, t + 1e-9) - rate(scad, t)) <= 1e-8 * lam);
    CHECK(std::abs(rate(scad, t - 1e-9) - rate(scad, t)) <= 1e-8 * lam);
  }
  const double t = 3.0 * lam;
  CHECK(std::abs(rate(mcp, t + 1e-9) - rate(mcp, t)) <= 1e-8 * lam);
  CHECK(std::abs(rate(mcp, t - 1e-9) - rate(mcp, t)) <= 1e-8 * lam);
}

TEST_CASE("monotone in t, vanishing at large signals, (A1) monotone in lambda") {
  const PenaltySpec scad{PenaltyKind::scad, 0.3, 3.7};
  const PenaltySpec mcp{PenaltyKind::mcp, 0.3, 3.7, 3.0};
  double ps = rate(scad, 0.0), pm = rate(mcp, 0.0);
  for (double t = 0.0; t < 2.0; t += 0.01) {
    CHECK(rate(scad, t) <= ps);
    CHECK(rate(mcp, t) <= pm);
    ps = rate(scad, t);
    pm = rate(mcp, t);
  }
  CHECK(rate(scad, 3.7 * 0.3) == 0.0);
  CHECK(rate(mcp, 3.0 * 0.3) == 0.0);
  for (PenaltyKind k : {PenaltyKind::scad, PenaltyKind::mcp, PenaltyKind::lasso}) {
    for (double t : {0.05, 0.3, 0.9, 2.0}) {
      double prev = -1.0;
      for (double lam = 0.01; lam <= 1.0 + 1e-12; lam += 0.01) {
        const double bar = rate({k, lam}, t) / lam;
        CHECK(bar >= prev - 1e-12);
        prev = bar;
      }
    }
  }
}

TEST_CASE("validation and parsing") {
  CHECK_THROWS_AS(validate({PenaltyKind::scad, -1.0}), Error);
  CHECK_THROWS_AS(validate({PenaltyKind::scad, 0.1, 2.0}), Error);
  CHECK_THROWS_AS(validate({PenaltyKind::mcp, 0.1, 3.7, 1.0}), Error);
  CHECK(parse_penalty("mcp") == PenaltyKind::mcp);
  CHECK(to_string(PenaltyKind::lasso) == "lasso");
  CHECK_THROWS_AS(parse_penalty("ridge"), Error);
}
