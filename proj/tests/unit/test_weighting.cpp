#include "pwgee/weighting.hpp"

#include "pwgee/correlation.hpp"
#include "pwgee/equations.hpp"
#include "pwgee/simgen.hpp"

#include "helpers.hpp"

#include <doctest.h>

#include <cmath>

using namespace pwgee;

TEST_CASE("rademacher draws are symmetric, reproducible and balanced") {
  const RademacherStream s(1234);
  CHECK(s.draw(5, 1, 3) == s.draw(5, 3, 1));
  CHECK(s.draw(5, 1, 3) == RademacherStream(1234).draw(5, 1, 3));
  long sum = 0;
  const int n = 100000;
  for (int k = 0; k < n; ++k) {
    const int b = s.draw(static_cast<std::uint64_t>(k / 10), k % 10, 10 + k % 7);
    REQUIRE((b == 1 || b == -1));
    sum += b;
  }
  CHECK(std::abs(static_cast<double>(sum) / n) <= 3.0 / std::sqrt(n));
}

TEST_CASE("weight matrix examples") {
  const RademacherStream s(7);
  const Matrix wi = build_weight_matrix(Matrix::Identity(3, 3), s, 0);
  CHECK((wi - Matrix::Identity(3, 3) / 3.0).cwiseAbs().maxCoeff() == 0.0);

  const Matrix ginv = correlation_inverse(CorrelationKind::exchangeable, 0.5, 3);
  const Matrix w = build_weight_matrix(ginv, s, 4);
  CHECK(w(1, 1) == doctest::Approx(2.0 / 9.0));
  for (Index k = 0; k < 3; ++k) {
    for (Index l = 0; l < 3; ++l) {
      if (k == l) continue;
      CHECK(w(k, l) == doctest::Approx(-s.draw(4, k, l) / 3.0));
      CHECK(w(k, l) == w(l, k));
    }
  }
  const Matrix gt = weighted_inverse(ginv, w);
  CHECK(gt(0, 0) == doctest::Approx(1.0 / 3.0));
  CHECK(std::abs(gt(0, 1)) == doctest::Approx(1.0 / 6.0));
  CHECK(gt.trace() == doctest::Approx(1.0));

  Matrix one(1, 1);
  one << 2.5;
  CHECK(build_weight_matrix(one, s, 0)(0, 0) == doctest::Approx(0.4));
  CHECK(weighted_inverse(ginv, Matrix::Ones(3, 3)) == ginv);
  CHECK(unweighted_mode(ginv) == ginv);
  CHECK_THROWS_AS(weighted_inverse(ginv, Matrix::Ones(2, 2)), Error);
}

TEST_CASE("independence with weighting on gives exactly I/M per cluster") {
  const auto d = testutil::random_data(3, 20, 6, 2);
  const auto blocks = build_cluster_inverses(d, CorrelationKind::independence, 0.0, Weighting::on, RademacherStream(1));
  for (Index i = 0; i < d.n(); ++i) {
    const Index m = d.cluster(i).size();
    const Matrix expect = Matrix::Identity(m, m) / static_cast<double>(m);
    CHECK(blocks[static_cast<std::size_t>(i)] == expect);
  }
}

TEST_CASE("weighted inverse diagonal is g_kk / sum g_jj with unit trace") {
  for (CorrelationKind k : {CorrelationKind::exchangeable, CorrelationKind::ar1}) {
    const Matrix ginv = correlation_inverse(k, 0.4, 5);
    const Matrix gt = weighted_inverse(ginv, build_weight_matrix(ginv, RademacherStream(3), 9));
    for (Index j = 0; j < 5; ++j) CHECK(gt(j, j) == doctest::Approx(ginv(j, j) / ginv.trace()));
    CHECK(gt.trace() == doctest::Approx(1.0));
    CHECK((gt - gt.transpose()).norm() == 0.0);
  }
}

TEST_CASE("off-diagonal part averages to zero over seeds") {
  const Matrix ginv = correlation_inverse(CorrelationKind::exchangeable, 0.5, 4);
  const int seeds = 10000;
  Matrix sum = Matrix::Zero(4, 4);
  double max_abs = 0.0;
  for (int s = 0; s < seeds; ++s) {
    const Matrix gt = weighted_inverse(ginv, build_weight_matrix(ginv, RademacherStream(static_cast<std::uint64_t>(s)), 0));
    sum += gt;
    max_abs = std::max(max_abs, gt(0, 1));
  }
  sum /= seeds;
  // Each off-diagonal entry is +-sigma; the mean of 1e4 of them has sd sigma/100.
  for (Index k = 0; k < 4; ++k) {
    for (Index l = 0; l < 4; ++l) {
      if (k != l) CHECK(std::abs(sum(k, l)) <= 3.0 * max_abs / std::sqrt(seeds));
    }
  }
}

TEST_CASE("parsing") {
  CHECK(parse_weighting("on") == Weighting::on);
  CHECK(parse_weighting("off") == Weighting::off);
  CHECK(to_string(Weighting::off) == "off");
  CHECK_THROWS_AS(parse_weighting("yes"), Error);
}
