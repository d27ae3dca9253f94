#include "pwgee/tuning.hpp"

#include "pwgee/simgen.hpp"

#include "helpers.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

using namespace pwgee;

namespace {

ModelSpec scad_model(Weighting w = Weighting::on) {
  ModelSpec m;
  m.family = {FamilyKind::gaussian_identity};
  m.correlation = {CorrelationKind::independence, std::nullopt};
  m.penalty = {PenaltyKind::scad, 0.0};
  m.weighting = w;
  return m;
}

}  // namespace

TEST_CASE("folds partition the clusters with balanced sizes") {
  const auto f8 = make_folds(8, 1);
  for (const auto& f : f8) CHECK(f.size() == 2);
  const auto f9 = make_folds(9, 1);
  std::vector<std::size_t> sizes;
  for (const auto& f : f9) sizes.push_back(f.size());
  CHECK(sizes == std::vector<std::size_t>{3, 2, 2, 2});
  const auto big = make_folds(103, 4);
  std::set<Index> all;
  for (const auto& f : big) {
    CHECK(std::is_sorted(f.begin(), f.end()));
    all.insert(f.begin(), f.end());
  }
  CHECK(all.size() == 103);
  CHECK(*all.begin() == 0);
  CHECK(*all.rbegin() == 102);
  CHECK(make_folds(50, 9) == make_folds(50, 9));
  CHECK(make_folds(50, 9) != make_folds(50, 10));
  CHECK_THROWS_AS(make_folds(3, 0), Error);
}

TEST_CASE("held-out loss") {
  Matrix x(2, 1);
  x << 1.0, 2.0;
  Vector y(2);
  y << 1.0, 5.0;
  const LongitudinalDataset d({{"a", y, x}});
  const Vector beta = Vector::Ones(1);
  CHECK(held_out_loss(d, {FamilyKind::gaussian_identity}, beta) == doctest::Approx(9.0));
  CHECK(held_out_loss(d, {FamilyKind::gaussian_identity}, beta, CvLossWeighting::cluster) == doctest::Approx(4.5));
  const double pois = held_out_loss(d, {FamilyKind::poisson_log}, beta);
  const double expect = -2.0 * ((1.0 * 1.0 - std::exp(1.0) - 0.0) + (5.0 * 2.0 - std::exp(2.0) - std::lgamma(6.0)));
  CHECK(pois == doctest::Approx(expect));
}

TEST_CASE("lambda_max screens out everything at zero") {
  ScenarioSpec spec{1, 80, 15, 0.5, 3};
  const auto d = generate(spec);
  auto model = scad_model();
  model.seed = 5;
  const double top = lambda_max(d, model);
  const auto grid = default_lambda_grid(d, model, {}, 25, 0.01);
  REQUIRE(grid.size() == 25);
  CHECK(grid.front() == doctest::Approx(top));
  CHECK(grid.back() == doctest::Approx(0.01 * top));
  CHECK(std::is_sorted(grid.rbegin(), grid.rend()));
  model.penalty.lambda = top * 1.0001;
  const auto fit = fit_pwgee(d, model);
  CHECK(fit.beta.isZero(0.0));
}

TEST_CASE("single-point grid returns that lambda") {
  const auto d = generate({1, 40, 8, 0.5, 2});
  const auto cv = cv_select(d, scad_model(), {0.3}, {}, {7, 1});
  CHECK(cv.lambda_star == 0.3);
  CHECK(cv.curve.size() == 4);
  CHECK_THROWS_AS(cv_select(d, scad_model(), {}, {}, {7, 1}), Error);
  CHECK_THROWS_AS(cv_select(d, scad_model(), {0.1, -0.2}, {}, {7, 1}), Error);
}

TEST_CASE("cv selects the true support on the informative-size design") {
  const auto d = generate({1, 200, 30, 0.5, 11});
  auto model = scad_model();
  const auto grid = default_lambda_grid(d, model);
  const auto cv = cv_select(d, model, grid, {}, {13, 1});
  model.penalty.lambda = cv.lambda_star;
  model.seed = 13;
  const auto fit = fit_pwgee(d, model);
  for (Index j = 0; j < 4; ++j) CHECK(fit.beta(j) != 0.0);
}

TEST_CASE("cv is reproducible, thread-count independent, and ties go to the larger lambda") {
  const auto d = generate({3, 60, 10, 0.5, 4});
  const std::vector<double> grid{0.5, 0.3, 0.2, 0.1};
  const auto a = cv_select(d, scad_model(), grid, {}, {21, 1});
  const auto b = cv_select(d, scad_model(), grid, {}, {21, 3});
  CHECK(a.lambda_star == b.lambda_star);
  CHECK(a.total_loss == b.total_loss);
  for (std::size_t k = 0; k < a.curve.size(); ++k) CHECK(a.curve[k].loss == b.curve[k].loss);

  // Two grid points so large that every fit is the zero vector: identical losses.
  const auto tie = cv_select(d, scad_model(), {1e4, 2e4}, {}, {21, 1, CvLossWeighting::follow_fit, CvRule::min});
  CHECK(tie.total_loss[0] == tie.total_loss[1]);
  CHECK(tie.lambda_star == 2e4);
}

TEST_CASE("held-out responses never influence the training fit") {
  const auto d = generate({1, 40, 8, 0.5, 6});
  const auto folds = make_folds(d.n(), 3);
  IndexSet train;
  for (int f = 1; f < kCvFolds; ++f) train.insert(train.end(), folds[f].begin(), folds[f].end());
  std::sort(train.begin(), train.end());
  std::vector<ClusterData> mutated(d.clusters().begin(), d.clusters().end());
  for (Index i : folds[0]) mutated[static_cast<std::size_t>(i)].y.array() += 100.0;
  const LongitudinalDataset d2(std::move(mutated));
  auto model = scad_model();
  model.penalty.lambda = 0.2;
  const auto a = fit_pwgee(d.subset(train), model);
  const auto b = fit_pwgee(d2.subset(train), model);
  CHECK(a.beta == b.beta);
  // The cv curve for fold 0 changes; the other folds' training sets include
  // fold 0 and so change as well, but fold 0's own training fit does not.
  const auto ca = cv_select(d, model, {0.2}, {}, {3, 1});
  const auto cb = cv_select(d2, model, {0.2}, {}, {3, 1});
  CHECK(ca.curve[0].loss != cb.curve[0].loss);
}

TEST_CASE("pure-noise response selects the empty model") {
  int empty = 0;
  const int reps = 50;
  for (int r = 0; r < reps; ++r) {
    auto d = generate({3, 60, 10, 0.5, static_cast<std::uint64_t>(1000 + r)});
    std::vector<ClusterData> cs(d.clusters().begin(), d.clusters().end());
    CounterRng rng(static_cast<std::uint64_t>(r), 5);
    for (auto& c : cs) {
      for (Index j = 0; j < c.size(); ++j) c.y(j) = rng.normal();
    }
    const LongitudinalDataset noise(std::move(cs));
    auto model = scad_model();
    const auto grid = default_lambda_grid(noise, model, {}, 10, 0.05);
    const auto cv = cv_select(noise, model, grid, {}, {static_cast<std::uint64_t>(r), 1});
    model.penalty.lambda = cv.lambda_star;
    const auto fit = fit_pwgee(noise, model);
    if (fit.beta.isZero(0.0)) ++empty;
  }
  MESSAGE("empty model in " << empty << " of " << reps << " replicates");
  CHECK(empty >= 45);
}

TEST_CASE("parallel_for runs every index once and rethrows") {
  std::vector<int> hits(100, 0);
  parallel_for(100, 4, [&](Index i) { ++hits[static_cast<std::size_t>(i)]; });
  CHECK(std::all_of(hits.begin(), hits.end(), [](int h) { return h == 1; }));
  CHECK_THROWS_AS(parallel_for(10, 3, [](Index i) { if (i == 7) throw Error("boom"); }), Error);
}

TEST_CASE("rule and loss parsing") {
  CHECK(parse_cv_rule("min") == CvRule::min);
  CHECK(parse_cv_rule("one_se") == CvRule::one_se);
  CHECK(parse_cv_rule("min_stationary") == CvRule::min_stationary);
  CHECK(parse_cv_rule("one_se_paired") == CvRule::one_se_paired);
  CHECK(to_string(CvRule::one_se_paired) == "one_se_paired");
  CHECK(parse_cv_loss("cluster") == CvLossWeighting::cluster);
  CHECK_THROWS_AS(parse_cv_rule("bic"), Error);
}
